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
#include "epildp/linalg.hpp"
#include "epildp/errors.hpp"

#include <cmath>
#include <utility>

namespace epildp
{

void solve_in_place(std::span<double> matrix, std::span<double> rhs, double min_pivot)
{
    const std::size_t n = rhs.size();
    if (matrix.size() != n * n) {
        throw SingularSystem("solve_in_place: matrix/rhs size mismatch");
    }
    auto at = [&](std::size_t r, std::size_t c) -> double& {
        return matrix[r * n + c];
    };

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) {
                pivot = r;
            }
        }
        if (!(std::abs(at(pivot, col)) >= min_pivot)) {
            throw SingularSystem("pivot below threshold in column " + std::to_string(col));
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(at(col, c), at(pivot, c));
            }
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = at(r, col) / at(col, col);
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                at(r, c) -= factor * at(col, c);
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            sum -= at(i, c) * rhs[c];
        }
        rhs[i] = sum / at(i, i);
    }
}

} // namespace epildp
