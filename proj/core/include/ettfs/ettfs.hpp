// Copyright 2026 The ETTFS Authors
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

#ifndef ETTFS_ETTFS_HPP_
#define ETTFS_ETTFS_HPP_

#include "ettfs/analyze.hpp"
#include "ettfs/arch.hpp"
#include "ettfs/checkpoint.hpp"
#include "ettfs/conv.hpp"
#include "ettfs/data.hpp"
#include "ettfs/decode.hpp"
#include "ettfs/error.hpp"
#include "ettfs/init.hpp"
#include "ettfs/network.hpp"
#include "ettfs/neuron.hpp"
#include "ettfs/ops.hpp"
#include "ettfs/spike.hpp"
#include "ettfs/tape.hpp"
#include "ettfs/tensor.hpp"
#include "ettfs/train.hpp"

#endif  // ETTFS_ETTFS_HPP_
