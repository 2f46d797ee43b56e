/* Copyright 2026 The eieseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "eieseg/demos.hpp"
#include "eieseg/eie_loss.hpp"
#include "eieseg/evolve.hpp"
#include "eieseg/field.hpp"
#include "eieseg/format.hpp"
#include "eieseg/lane_io.hpp"
#include "eieseg/metrics.hpp"
#include "eieseg/rng.hpp"
#include "eieseg/spectral.hpp"
#include "eieseg/tensor_io.hpp"
#include "eieseg/toytrain.hpp"
