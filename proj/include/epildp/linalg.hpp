/*
* Copyright (C) 2026 epildp contributors
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
#ifndef EPILDP_LINALG_HPP
#define EPILDP_LINALG_HPP

#include <span>

namespace epildp
{

/// Solves M x = rhs in place by Gaussian elimination with partial pivoting.
/// `matrix` is row-major n x n and is overwritten; on return `rhs` holds x.
/// Throws SingularSystem when a pivot falls below `min_pivot` in magnitude.
void solve_in_place(std::span<double> matrix, std::span<double> rhs, double min_pivot = 1e-14);

} // namespace epildp

#endif // EPILDP_LINALG_HPP
