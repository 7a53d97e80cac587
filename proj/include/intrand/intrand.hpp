// Copyright 2026 The intrand Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#define INTRAND_VERSION "0.1.0"

#include "intrand/audit.hpp"
#include "intrand/battery.hpp"
#include "intrand/capital_process.hpp"
#include "intrand/forecast.hpp"
#include "intrand/forecasting_system.hpp"
#include "intrand/gen.hpp"
#include "intrand/outcome.hpp"
#include "intrand/parallel.hpp"
#include "intrand/report_io.hpp"
#include "intrand/selection.hpp"
#include "intrand/strategies.hpp"
#include "intrand/tree.hpp"
