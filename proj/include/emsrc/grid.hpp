#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "emsrc/vec3.hpp"

namespace emsrc {

// Rectilinear sampling grid over a box; points are box_min + index * step
// per axis, with step = extent / (n - 1).
struct SamplingGrid {
    Vec3 box_min, box_max;
    std::array<int, 3> n{};

    SamplingGrid() = default;
    SamplingGrid(const Vec3& mn, const Vec3& mx, std::array<int, 3> n_)
        : box_min(mn), box_max(mx), n(n_) {
        for (int a = 0; a < 3; ++a) {
            if (n[a] < 2)
                throw std::invalid_argument("SamplingGrid: need at least 2 points per axis");
        }
        if (!(mn.x < mx.x && mn.y < mx.y && mn.z < mx.z))
            throw std::invalid_argument("SamplingGrid: box min must be below box max");
    }

    double step(int axis) const {
        const double lo = box_min[axis], hi = box_max[axis];
        return (hi - lo) / (n[axis] - 1);
    }

    std::size_t size() const {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }

    std::size_t flat(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n[0]) * (iy + static_cast<std::size_t>(n[1]) * iz);
    }

    std::array<int, 3> unflat(std::size_t f) const {
        const int ix = static_cast<int>(f % n[0]);
        const int iy = static_cast<int>((f / n[0]) % n[1]);
        const int iz = static_cast<int>(f / (static_cast<std::size_t>(n[0]) * n[1]));
        return {ix, iy, iz};
    }

    Vec3 point(int ix, int iy, int iz) const {
        return {box_min.x + ix * step(0), box_min.y + iy * step(1), box_min.z + iz * step(2)};
    }
    Vec3 point(std::size_t f) const {
        const auto idx = unflat(f);
        return point(idx[0], idx[1], idx[2]);
    }

    bool contains(const Vec3& p) const {
        return p.x >= box_min.x && p.x <= box_max.x && p.y >= box_min.y && p.y <= box_max.y &&
               p.z >= box_min.z && p.z <= box_max.z;
    }
};

// Real values of an imaging function over a grid; label records which
// variant and deflation round produced it.
struct ScalarField {
    SamplingGrid grid;
    std::vector<double> values;
    std::string label;

    double max_value() const {
        double m = 0.0;
        for (double v : values)
            if (v > m)
                m = v;
        return m;
    }
};

} // namespace emsrc
