// Copyright 2026 The pcgan Authors
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

#ifndef PCGAN__NUMERICS_HPP_
#define PCGAN__NUMERICS_HPP_

#include "pcgan/numerics/ops.hpp"
#include "pcgan/numerics/params.hpp"
#include "pcgan/numerics/tape.hpp"
#include "pcgan/numerics/tensor.hpp"

#endif  // PCGAN__NUMERICS_HPP_
