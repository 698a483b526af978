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
#ifndef EPILDP_RANDOM_HPP
#define EPILDP_RANDOM_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace epildp
{

/// Random stream for one replicate. Streams with equal (seed, stream) produce equal
/// sequences; different stream indices are seeded independently through seed_seq.
class RngStream
{
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const
    {
        return m_seed;
    }
    std::uint64_t stream() const
    {
        return m_stream;
    }

    static constexpr result_type min()
    {
        return std::mt19937_64::min();
    }
    static constexpr result_type max()
    {
        return std::mt19937_64::max();
    }
    result_type operator()()
    {
        return m_engine();
    }

    /// Uniform on the open interval (0, 1), 53 random bits.
    double uniform();
    /// Exponential with the given rate (inversion); +inf for rate 0.
    double exponential(double rate);
    /// Poisson: inversion for mean < 10, transformed rejection (PTRS) above.
    std::int64_t poisson(double mean);
    std::int64_t binomial(std::int64_t trials, double probability);
    /// Smallest j with w_0 + ... + w_j > u * total, u uniform. Zero weights are never chosen.
    std::size_t categorical(std::span<const double> weights, double total);

private:
    std::uint64_t m_seed;
    std::uint64_t m_stream;
    std::mt19937_64 m_engine;
};

} // namespace epildp

#endif // EPILDP_RANDOM_HPP
