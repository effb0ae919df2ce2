#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "emsrc/cauchy.hpp"

namespace emsrc {

namespace detail {

// Uniform double in [-1, 1) from the top 53 bits of the generator output.
// Fixed mapping so the stream is identical across standard libraries.
inline double uniform_pm1(std::mt19937_64& gen) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

inline std::vector<CVec3> uniform_complex_array(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<CVec3> out(n);
    for (auto& v : out) {
        const double ar = uniform_pm1(gen), ai = uniform_pm1(gen);
        const double br = uniform_pm1(gen), bi = uniform_pm1(gen);
        const double cr = uniform_pm1(gen), ci = uniform_pm1(gen);
        v = {cplx(ar, ai), cplx(br, bi), cplx(cr, ci)};
    }
    return out;
}

inline double stacked_norm(const std::vector<CVec3>& a) {
    double s = 0.0;
    for (const auto& v : a)
        s += norm2(v);
    return std::sqrt(s);
}

} // namespace detail

// Additive relative noise per the model
//   E_delta = E + delta1 * (N1 / ||N1||) * ||E||,
// and likewise for curl E x nu with delta2 and an independent N2. Norms are
// Euclidean over all components of all points. N1 is drawn from
// mt19937_64(seed), N2 from mt19937_64(seed + 1).
inline CauchyData add_noise(const CauchyData& data, double delta1, double delta2,
                            std::uint64_t seed) {
    if (delta1 < 0.0 || delta2 < 0.0)
        throw std::invalid_argument("add_noise: noise levels must be nonnegative");

    CauchyData out = data;
    out.provenance.delta1 = delta1;
    out.provenance.delta2 = delta2;
    out.provenance.seed = seed;
    out.provenance.rng = "mt19937_64/top53";
    if (delta1 == 0.0 && delta2 == 0.0)
        return out;

    const std::size_t n = data.size();
    if (delta1 > 0.0) {
        const auto n1 = detail::uniform_complex_array(n, seed);
        const double scale = delta1 * detail::stacked_norm(data.E) / detail::stacked_norm(n1);
        for (std::size_t i = 0; i < n; ++i)
            out.E[i] += scale * n1[i];
    }
    if (delta2 > 0.0) {
        const auto n2 = detail::uniform_complex_array(n, seed + 1);
        const double scale = delta2 * detail::stacked_norm(data.curlE_cross_nu) / detail::stacked_norm(n2);
        for (std::size_t i = 0; i < n; ++i)
            out.curlE_cross_nu[i] += scale * n2[i];
    }
    return out;
}

} // namespace emsrc
