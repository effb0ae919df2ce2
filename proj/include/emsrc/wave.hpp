#pragma once

#include <numbers>
#include <stdexcept>

namespace emsrc {

inline constexpr double pi = std::numbers::pi;

// Fixed-frequency context: wavenumber k > 0, wavelength 2*pi/k.
struct WaveContext {
    double k = 0.0;

    WaveContext() = default;
    explicit WaveContext(double k_) : k(k_) {
        if (!(k > 0.0))
            throw std::invalid_argument("WaveContext: wavenumber k must be positive");
    }

    double lambda() const { return 2.0 * pi / k; }
};

} // namespace emsrc
