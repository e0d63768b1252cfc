// Copyright 2026 The umlmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "umlmc/config.hpp"
#include "umlmc/debias.hpp"
#include "umlmc/error.hpp"
#include "umlmc/harness.hpp"
#include "umlmc/langevin.hpp"
#include "umlmc/measure_change.hpp"
#include "umlmc/mlmc.hpp"
#include "umlmc/parallel.hpp"
#include "umlmc/potential.hpp"
#include "umlmc/rng.hpp"
#include "umlmc/stats.hpp"
#include "umlmc/tail_transform.hpp"
#include "umlmc/vec.hpp"
