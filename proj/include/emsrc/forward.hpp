#pragma once

#include <stdexcept>
#include <vector>

#include "emsrc/cauchy.hpp"
#include "emsrc/kernels.hpp"
#include "emsrc/quadrature.hpp"
#include "emsrc/sources.hpp"
#include "emsrc/surface.hpp"

namespace emsrc {

namespace detail {

inline void check_source_position(const Vec3& loc, const MeasurementSurface& surf,
                                  bool allow_exterior) {
    const double d = norm(loc - surf.center);
    // Reject anything too close to the surface; the synthesized data would be
    // dominated by the 1/R singularity at the nearest quadrature points.
    const double tol = 1e-9 * surf.radius;
    if (std::abs(d - surf.radius) <= tol)
        throw std::invalid_argument("source lies on the measurement surface");
    if (d > surf.radius && !allow_exterior)
        throw std::invalid_argument("source lies outside the measurement sphere");
}

} // namespace detail

// Exact Cauchy data of a sum of point dipoles:
//   E(x) = sum_j G(x, x_j) p_j,
//   curl E(x) x nu = (sum_j grad Phi(x, x_j) x p_j) x nu.
// Set allow_exterior to admit sources outside the sphere (the field is still
// well defined on the surface); by default that is a configuration error.
inline CauchyData synthesize_point_source_data(const SourceSet& sources,
                                               const MeasurementSurface& surface,
                                               const WaveContext& ctx,
                                               bool allow_exterior = false) {
    for (const auto& s : sources)
        detail::check_source_position(s.location, surface, allow_exterior);

    CauchyData data;
    data.surface = surface;
    data.k = ctx.k;
    data.E.resize(surface.size());
    data.curlE_cross_nu.resize(surface.size());
    for (std::size_t i = 0; i < surface.size(); ++i) {
        const Vec3& x = surface.points[i];
        CVec3 e{}, c{};
        for (const auto& s : sources) {
            e += green_tensor_apply(x, s.location, ctx, s.moment);
            c += curl_green_apply(x, s.location, ctx, s.moment);
        }
        data.E[i] = e;
        data.curlE_cross_nu[i] = cross(c, surface.normals[i]);
    }
    return data;
}

// Cauchy data of small-volume ball sources,
//   E(x) = sum_j int_{D_j} G(x,y) p_j dy,
// by a spherical product rule per ball: Gauss-Legendre in radius and
// cos(polar), uniform midpoints in azimuth, quad_order points per dimension.
inline CauchyData synthesize_small_volume_data(const std::vector<BallSource>& balls,
                                               const MeasurementSurface& surface,
                                               const WaveContext& ctx,
                                               int quad_order = 6,
                                               bool allow_exterior = false) {
    if (quad_order < 2)
        throw std::invalid_argument("synthesize_small_volume_data: quad_order must be >= 2");
    validate_balls(balls, ctx);
    for (const auto& b : balls)
        detail::check_source_position(b.center, surface, allow_exterior);

    // Volume nodes and weights per ball (relative to the center).
    struct Node {
        Vec3 offset;
        double weight;
    };
    std::vector<std::vector<Node>> nodes(balls.size());
    for (std::size_t j = 0; j < balls.size(); ++j) {
        const Quad1D qr = gauss_legendre(quad_order, 0.0, balls[j].radius);
        const Quad1D qu = gauss_legendre(quad_order, -1.0, 1.0); // u = cos(polar)
        const double dtheta = 2.0 * pi / quad_order;
        for (int ir = 0; ir < quad_order; ++ir)
            for (int iu = 0; iu < quad_order; ++iu)
                for (int it = 0; it < quad_order; ++it) {
                    const double r = qr.nodes[ir];
                    const double u = qu.nodes[iu];
                    const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
                    const double theta = (it + 0.5) * dtheta;
                    Node nd;
                    nd.offset = {r * su * std::cos(theta), r * su * std::sin(theta), r * u};
                    nd.weight = qr.weights[ir] * r * r * qu.weights[iu] * dtheta;
                    nodes[j].push_back(nd);
                }
    }

    CauchyData data;
    data.surface = surface;
    data.k = ctx.k;
    data.E.resize(surface.size());
    data.curlE_cross_nu.resize(surface.size());
    for (std::size_t i = 0; i < surface.size(); ++i) {
        const Vec3& x = surface.points[i];
        CVec3 e{}, c{};
        for (std::size_t j = 0; j < balls.size(); ++j)
            for (const auto& nd : nodes[j]) {
                const Vec3 y = balls[j].center + nd.offset;
                e += nd.weight * green_tensor_apply(x, y, ctx, balls[j].vector);
                c += nd.weight * curl_green_apply(x, y, ctx, balls[j].vector);
            }
        data.E[i] = e;
        data.curlE_cross_nu[i] = cross(c, surface.normals[i]);
    }
    return data;
}

} // namespace emsrc
