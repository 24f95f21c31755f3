// Copyright 2026 The onell-dac Authors.
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

#include "onell/bitstring.hpp"
#include "onell/config.hpp"
#include "onell/ddqn_agent.hpp"
#include "onell/errors.hpp"
#include "onell/experiment.hpp"
#include "onell/metrics.hpp"
#include "onell/onell_env.hpp"
#include "onell/policies.hpp"
#include "onell/qnetwork.hpp"
#include "onell/replay_buffer.hpp"
#include "onell/rewards.hpp"
#include "onell/seeding.hpp"
#include "onell/stats.hpp"
#include "onell/tabular_mdp.hpp"
#include "onell/verify.hpp"
