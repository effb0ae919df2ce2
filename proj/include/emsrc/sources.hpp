#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "emsrc/vec3.hpp"
#include "emsrc/wave.hpp"

namespace emsrc {

// Point dipole: location and nonzero complex moment vector.
struct PointSource {
    Vec3 location;
    CVec3 moment;
};

using SourceSet = std::vector<PointSource>;

// Small-volume source supported on a ball: p * indicator(ball).
struct BallSource {
    Vec3 center;
    double radius = 0.0;
    CVec3 vector;
};

// Validation warnings are advisory: the reconstruction theory assumes
// well-separated sources and small radii, but nothing structurally breaks.
inline std::vector<std::string> validate_sources(const SourceSet& sources, const WaveContext& ctx) {
    std::vector<std::string> warnings;
    for (const auto& s : sources) {
        if (norm(s.moment) == 0.0)
            throw std::invalid_argument("point source moment must be nonzero");
        if (!finite(s.location) || !finite(s.moment))
            throw std::invalid_argument("point source fields must be finite");
    }
    const double lam = ctx.lambda();
    for (std::size_t i = 0; i < sources.size(); ++i)
        for (std::size_t j = i + 1; j < sources.size(); ++j) {
            const double d = norm(sources[i].location - sources[j].location);
            if (d < 2.0 * lam)
                warnings.push_back("sources " + std::to_string(i) + " and " + std::to_string(j) +
                                   " are separated by " + std::to_string(d) +
                                   " < 2 wavelengths; reconstruction assumes well-separated sources");
        }
    return warnings;
}

inline std::vector<std::string> validate_balls(const std::vector<BallSource>& balls, const WaveContext& ctx) {
    std::vector<std::string> warnings;
    for (const auto& b : balls) {
        if (!(b.radius > 0.0))
            throw std::invalid_argument("ball source radius must be positive");
        if (norm(b.vector) == 0.0)
            throw std::invalid_argument("ball source vector must be nonzero");
        if (b.radius > ctx.lambda() / 4.0)
            warnings.push_back("ball radius " + std::to_string(b.radius) +
                               " exceeds lambda/4; the point-like asymptotics degrade");
    }
    for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size(); ++j)
            if (norm(balls[i].center - balls[j].center) <= balls[i].radius + balls[j].radius)
                throw std::invalid_argument("ball sources " + std::to_string(i) + " and " +
                                            std::to_string(j) + " overlap");
    return warnings;
}

} // namespace emsrc
