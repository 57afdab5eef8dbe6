// Copyright 2026 The mixpsro Authors
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


// Umbrella header for the whole library.

#ifndef MIXPSRO_MIXPSRO_HPP_
#define MIXPSRO_MIXPSRO_HPP_

#include "mixpsro/cli.hpp"
#include "mixpsro/config.hpp"
#include "mixpsro/engine.hpp"
#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/evaluation.hpp"
#include "mixpsro/game_model.hpp"
#include "mixpsro/hparam_search.hpp"
#include "mixpsro/leduc.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/meta_solvers.hpp"
#include "mixpsro/parallel.hpp"
#include "mixpsro/policy.hpp"
#include "mixpsro/q_mixing.hpp"
#include "mixpsro/rng.hpp"
#include "mixpsro/simulate.hpp"
#include "mixpsro/value_oracle.hpp"

#endif  // MIXPSRO_MIXPSRO_HPP_
