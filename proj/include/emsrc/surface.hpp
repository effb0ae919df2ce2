#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "emsrc/vec3.hpp"
#include "emsrc/wave.hpp"

namespace emsrc {

// Closed measurement surface discretization: points, outward unit normals
// and quadrature weights (area measure). Only spheres are built here, but
// consumers see just the point/normal/weight triples.
struct MeasurementSurface {
    Vec3 center;
    double radius = 0.0;
    int n_phi = 0;
    int n_theta = 0;
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::vector<double> weights;
    std::vector<double> phis;   // polar angle per point
    std::vector<double> thetas; // azimuth per point

    std::size_t size() const { return points.size(); }
};

// Midpoint grid in spherical angles: phi_i = (i+1/2) pi/n_phi,
// theta_j = (j+1/2) 2 pi/n_theta, weight = rho^2 sin(phi) dphi dtheta.
// Midpoints avoid the degenerate poles.
inline MeasurementSurface build_sphere_surface(const Vec3& center, double radius,
                                               int n_phi, int n_theta) {
    if (!(radius > 0.0))
        throw std::invalid_argument("build_sphere_surface: radius must be positive");
    if (n_phi < 2 || n_theta < 2)
        throw std::invalid_argument("build_sphere_surface: need n_phi >= 2 and n_theta >= 2");

    MeasurementSurface s;
    s.center = center;
    s.radius = radius;
    s.n_phi = n_phi;
    s.n_theta = n_theta;
    const std::size_t n = static_cast<std::size_t>(n_phi) * n_theta;
    s.points.reserve(n);
    s.normals.reserve(n);
    s.weights.reserve(n);
    s.phis.reserve(n);
    s.thetas.reserve(n);

    const double dphi = pi / n_phi;
    const double dtheta = 2.0 * pi / n_theta;
    for (int i = 0; i < n_phi; ++i) {
        const double phi = (i + 0.5) * dphi;
        const double sp = std::sin(phi), cp = std::cos(phi);
        const double w = radius * radius * sp * dphi * dtheta;
        for (int j = 0; j < n_theta; ++j) {
            const double theta = (j + 0.5) * dtheta;
            const Vec3 nu{sp * std::cos(theta), sp * std::sin(theta), cp};
            s.points.push_back(center + radius * nu);
            s.normals.push_back(nu);
            s.weights.push_back(w);
            s.phis.push_back(phi);
            s.thetas.push_back(theta);
        }
    }
    return s;
}

} // namespace emsrc
