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
#include "epildp/random.hpp"
#include "epildp/errors.hpp"

#include <cmath>

namespace epildp
{

namespace
{

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(sequence);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : m_seed(seed)
    , m_stream(stream)
    , m_engine(make_engine(seed, stream))
{
}

double RngStream::uniform()
{
    return (static_cast<double>(m_engine() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential(double rate)
{
    if (!(rate > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return -std::log(uniform()) / rate;
}

std::int64_t RngStream::poisson(double mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw DomainError("Poisson mean must be finite and non-negative");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 10.0) {
        const double u = uniform();
        double p       = std::exp(-mean);
        double cdf     = p;
        std::int64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Hoermann (1993), transformed rejection with squeeze.
    const double root      = std::sqrt(mean);
    const double log_mean  = std::log(mean);
    const double b         = 0.931 + 2.53 * root;
    const double a         = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r       = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u  = uniform() - 0.5;
        const double v  = uniform();
        const double us = 0.5 - std::abs(u);
        const auto k    = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= v_r) {
            return k;
        }
        if (k < 0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double kd = static_cast<double>(k);
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + kd * log_mean - std::lgamma(kd + 1.0)) {
            return k;
        }
    }
}

std::int64_t RngStream::binomial(std::int64_t trials, double probability)
{
    if (trials < 0 || !(probability >= 0.0 && probability <= 1.0)) {
        throw DomainError("binomial parameters out of range");
    }
    if (trials == 0 || probability == 0.0) {
        return 0;
    }
    if (probability == 1.0) {
        return trials;
    }
    std::binomial_distribution<std::int64_t> distribution(trials, probability);
    return distribution(*this);
}

std::size_t RngStream::categorical(std::span<const double> weights, double total)
{
    const double threshold = uniform() * total;
    double sum             = 0.0;
    std::size_t last       = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] <= 0.0) {
            continue;
        }
        sum += weights[j];
        last = j;
        if (sum > threshold) {
            return j;
        }
    }
    // Rounding left the threshold above the accumulated sum: take the last positive weight.
    return last;
}

} // namespace epildp
