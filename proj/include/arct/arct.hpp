// Copyright 2026 The ARCT Toolkit Authors. All Rights Reserved.
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

// Umbrella header for the toolkit.

#include "arct/autodiff.hpp"
#include "arct/checkpoint.hpp"
#include "arct/corpus.hpp"
#include "arct/embeddings.hpp"
#include "arct/encoder.hpp"
#include "arct/error.hpp"
#include "arct/experiments.hpp"
#include "arct/gradcheck.hpp"
#include "arct/gradient_suite.hpp"
#include "arct/heads.hpp"
#include "arct/optim.hpp"
#include "arct/perturb.hpp"
#include "arct/rng.hpp"
#include "arct/stats.hpp"
#include "arct/tensor.hpp"
#include "arct/text.hpp"
#include "arct/trainer.hpp"
