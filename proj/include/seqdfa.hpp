// Copyright 2026 The seqdfa Authors
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

#include "seqdfa/baselines.hpp"
#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/eval.hpp"
#include "seqdfa/inference.hpp"
#include "seqdfa/interpret.hpp"
#include "seqdfa/learn.hpp"
#include "seqdfa/models.hpp"
#include "seqdfa/office.hpp"
#include "seqdfa/pipeline.hpp"
#include "seqdfa/prefix_tree.hpp"
#include "seqdfa/program.hpp"
#include "seqdfa/regex.hpp"
#include "seqdfa/solver.hpp"
#include "seqdfa/traces.hpp"
