// Copyright 2026 The KCQF Authors.
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


#ifndef KCQF_KCQF_HPP
#define KCQF_KCQF_HPP

/**
 * \file
 * \brief Includes the filtering library: models, noise laws, the quotient filter and baselines.
 *
 * The benchmark harness lives under `kcqf/bench/` and is included separately.
 */

#include <kcqf/baselines.hpp>
#include <kcqf/klnoise.hpp>
#include <kcqf/linalg.hpp>
#include <kcqf/models.hpp>
#include <kcqf/quotient_filter.hpp>
#include <kcqf/random.hpp>
#include <kcqf/ssm.hpp>

#endif  // KCQF_KCQF_HPP
