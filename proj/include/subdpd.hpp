// Copyright 2026 The subdpd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "subdpd/align.hpp"
#include "subdpd/basis.hpp"
#include "subdpd/dpd.hpp"
#include "subdpd/errors.hpp"
#include "subdpd/fir.hpp"
#include "subdpd/learn.hpp"
#include "subdpd/metrics.hpp"
#include "subdpd/observe.hpp"
#include "subdpd/pa.hpp"
#include "subdpd/rng.hpp"
#include "subdpd/scenario.hpp"
#include "subdpd/signal.hpp"
#include "subdpd/table_io.hpp"
#include "subdpd/waveform.hpp"
