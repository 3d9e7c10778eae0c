/*
 * Copyright 2026 The aslsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ASLSIM_SELFTEST_HPP
#define ASLSIM_SELFTEST_HPP

#include <iosfwd>

namespace aslsim {

/// Runs the library's core invariants at reduced scale, printing one line per
/// check. Returns true when everything holds. Meant as a fast post-install
/// sanity gate; the full test suite lives with the build tree.
bool run_selftest(std::ostream& out);

}  // namespace aslsim

#endif  // ASLSIM_SELFTEST_HPP
