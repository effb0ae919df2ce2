#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emsrc/surface.hpp"
#include "emsrc/vec3.hpp"

namespace emsrc {

// Provenance carried with every dataset so runs are reproducible.
struct DataProvenance {
    std::string source_config_hash; // hash of the generating configuration
    double delta1 = 0.0;            // relative noise on E
    double delta2 = 0.0;            // relative noise on curl E x nu
    std::uint64_t seed = 0;
    std::string rng = "none";
};

// Cauchy pair sampled on the measurement surface: E and curl E x nu.
struct CauchyData {
    MeasurementSurface surface;
    double k = 0.0;
    std::vector<CVec3> E;
    std::vector<CVec3> curlE_cross_nu;
    DataProvenance provenance;

    std::size_t size() const { return E.size(); }
};

} // namespace emsrc
