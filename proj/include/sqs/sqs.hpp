// Copyright 2026 SQS Contributors
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

#include "sqs/classical.hpp"
#include "sqs/dataset.hpp"
#include "sqs/errors.hpp"
#include "sqs/evolution.hpp"
#include "sqs/fitness.hpp"
#include "sqs/kernel.hpp"
#include "sqs/linalg.hpp"
#include "sqs/parallel.hpp"
#include "sqs/pauli.hpp"
#include "sqs/pipeline.hpp"
#include "sqs/reduction.hpp"
#include "sqs/rng.hpp"
#include "sqs/run_config.hpp"
#include "sqs/statevector.hpp"
#include "sqs/svm.hpp"
