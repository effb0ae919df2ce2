#pragma once

// Reconstruction of electromagnetic point and small-volume sources from
// single-frequency Cauchy data on a closed measurement surface, plus the
// forward simulator that generates the synthetic data.

#include "emsrc/cauchy.hpp"
#include "emsrc/config.hpp"
#include "emsrc/forward.hpp"
#include "emsrc/grid.hpp"
#include "emsrc/imaging.hpp"
#include "emsrc/io.hpp"
#include "emsrc/kernels.hpp"
#include "emsrc/noise.hpp"
#include "emsrc/parallel.hpp"
#include "emsrc/peaks.hpp"
#include "emsrc/quadrature.hpp"
#include "emsrc/reconstruct.hpp"
#include "emsrc/sources.hpp"
#include "emsrc/surface.hpp"
#include "emsrc/vec3.hpp"
#include "emsrc/wave.hpp"
