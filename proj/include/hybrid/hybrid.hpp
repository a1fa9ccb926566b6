// Copyright 2026 The Hybrid Retrieval Authors.
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

#include "hybrid/corpus.hpp"
#include "hybrid/dense.hpp"
#include "hybrid/error.hpp"
#include "hybrid/eval.hpp"
#include "hybrid/fusion.hpp"
#include "hybrid/hit.hpp"
#include "hybrid/pipeline.hpp"
#include "hybrid/run.hpp"
#include "hybrid/sparse.hpp"
#include "hybrid/text.hpp"
