#pragma once

#include <algorithm>
#include <vector>

#include "emsrc/grid.hpp"

namespace emsrc {

struct Peak {
    Vec3 location;
    double value = 0.0;
    int round = 1;
};

struct ReconstructionParams {
    double eta = 0.2;        // peak threshold fraction of the field max
    double gamma = 0.5;      // dominance grouping fraction
    double min_sep = -1.0;   // minimum peak separation; <0 resolves to lambda/2
    double tau_stop = 0.05;  // stop fraction of the round-1 peak, s-th-root scale
    int max_rounds = 8;
    double merge_radius = -1.0; // re/im pairing distance; <0 resolves to 3 fine steps
    double mask_radius = -1.0;  // clean-up radius; <0 resolves to lambda/2
    double mask_ratio = 6.0;    // auto-enable masking past this magnitude spread
    int coarse_n = 48;          // coarse pass resolution per axis
    bool two_stage = true;

    double resolved_min_sep(double lambda) const { return min_sep > 0.0 ? min_sep : lambda / 2.0; }
    double resolved_mask_radius(double lambda) const { return mask_radius > 0.0 ? mask_radius : lambda / 2.0; }
    double resolved_merge_radius(double fine_step) const {
        return merge_radius > 0.0 ? merge_radius : 3.0 * fine_step;
    }

    void validate() const {
        if (!(eta > 0.0 && eta < 1.0) || !(gamma > 0.0 && gamma < 1.0) ||
            !(tau_stop > 0.0 && tau_stop < 1.0))
            throw std::invalid_argument("reconstruction fractions must lie in (0,1)");
        if (max_rounds < 1)
            throw std::invalid_argument("max_rounds must be >= 1");
        if (coarse_n < 2)
            throw std::invalid_argument("coarse_n must be >= 2");
        if (mask_ratio <= 1.0)
            throw std::invalid_argument("mask_ratio must exceed 1");
    }
};

// Grid-local maxima: points >= all their (up to) 26 neighbors, strictly
// above at least one, and >= eta * global max. Peaks closer than min_sep
// are merged keeping the larger. Sorted by value, descending.
inline std::vector<Peak> detect_peaks(const ScalarField& field, const ReconstructionParams& params,
                                      double min_sep) {
    const SamplingGrid& g = field.grid;
    const double gmax = field.max_value();
    std::vector<Peak> found;
    if (gmax <= 0.0)
        return found;
    const double floor_value = params.eta * gmax;

    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const double v = field.values[g.flat(ix, iy, iz)];
                if (v < floor_value)
                    continue;
                bool is_max = true, strictly_above = false;
                for (int dz = -1; dz <= 1 && is_max; ++dz)
                    for (int dy = -1; dy <= 1 && is_max; ++dy)
                        for (int dx = -1; dx <= 1 && is_max; ++dx) {
                            if (dx == 0 && dy == 0 && dz == 0)
                                continue;
                            const int jx = ix + dx, jy = iy + dy, jz = iz + dz;
                            if (jx < 0 || jy < 0 || jz < 0 || jx >= g.n[0] || jy >= g.n[1] || jz >= g.n[2])
                                continue;
                            const double u = field.values[g.flat(jx, jy, jz)];
                            if (u > v)
                                is_max = false;
                            else if (u < v)
                                strictly_above = true;
                        }
                if (is_max && strictly_above)
                    found.push_back({g.point(ix, iy, iz), v, 1});
            }

    std::sort(found.begin(), found.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });

    std::vector<Peak> merged;
    for (const auto& p : found) {
        bool close = false;
        for (const auto& kept : merged)
            if (norm(p.location - kept.location) < min_sep) {
                close = true;
                break;
            }
        if (!close)
            merged.push_back(p);
    }
    return merged;
}

// Splits value-sorted peaks into the dominant group (>= gamma * strongest)
// and the rest, deferred to later rounds.
inline std::pair<std::vector<Peak>, std::vector<Peak>> group_dominant(const std::vector<Peak>& peaks,
                                                                      double gamma) {
    std::vector<Peak> dominant, deferred;
    if (peaks.empty())
        return {dominant, deferred};
    const double cutoff = gamma * peaks.front().value;
    for (const auto& p : peaks)
        (p.value >= cutoff ? dominant : deferred).push_back(p);
    return {dominant, deferred};
}

} // namespace emsrc
