// Copyright 2026 The nucleartight Authors.
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

#include "nucleartight/config.hpp"
#include "nucleartight/diagnostics.hpp"
#include "nucleartight/errors.hpp"
#include "nucleartight/expm.hpp"
#include "nucleartight/hermite_space.hpp"
#include "nucleartight/martingale_lab.hpp"
#include "nucleartight/parallel.hpp"
#include "nucleartight/path_space.hpp"
#include "nucleartight/quadrature.hpp"
#include "nucleartight/rng.hpp"
#include "nucleartight/spde_lab.hpp"
