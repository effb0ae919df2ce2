#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "emsrc/cauchy.hpp"
#include "emsrc/grid.hpp"
#include "emsrc/kernels.hpp"
#include "emsrc/parallel.hpp"
#include "emsrc/sources.hpp"

// Boundary-integral imaging functionals. The base functional pairs the
// Cauchy data with Im G(.,z) q over the measurement surface,
//
//   I(z,q) = int_S curl(Im G(x,z) q) x nu . E - curl E x nu . Im G(x,z) q ds,
//
// and equals sum_j p_j . Im G(x_j, z) q for data radiated by point dipoles.
// The conjugate variant uses conj(G) instead of Im G (with an i/2 factor)
// and is only usable away from the measurement surface.

namespace emsrc {

enum class BaseKind { InteriorI, ConjugateIhat };
enum class Variant { Modulus, RealPart, ImagPart };

struct ImagingSpec {
    BaseKind base = BaseKind::InteriorI;
    Variant variant = Variant::Modulus;
    int s = 4;

    ImagingSpec() = default;
    ImagingSpec(BaseKind b, Variant v, int s_) : base(b), variant(v), s(s_) {
        if (s < 1)
            throw std::invalid_argument("ImagingSpec: exponent s must be >= 1");
    }
};

inline std::string to_string(Variant v) {
    switch (v) {
    case Variant::Modulus: return "abs";
    case Variant::RealPart: return "re";
    default: return "im";
    }
}
inline std::string to_string(BaseKind b) {
    return b == BaseKind::InteriorI ? "I" : "Ihat";
}

// One recovered contribution p . Im G(location, z) e_i subtracted during
// deflation; part_vector is a recovered Re p_j or Im p_j.
struct DeflationTerm {
    Vec3 location;
    Vec3 part_vector;
};

// I(z, e_1..e_3) evaluated together; the three probes share all geometry.
using BaseTriple = std::array<cplx, 3>;

// Abstract source of base values. The quadrature evaluator is the
// production path; the oracle evaluator exists for tests and diagnostics.
class BaseEvaluator {
public:
    virtual ~BaseEvaluator() = default;
    virtual BaseTriple triple(const Vec3& z) const = 0;
    // False where the functional is undefined (conjugate kernel near the surface).
    virtual bool valid_at(const Vec3&) const { return true; }
    virtual double wavenumber() const = 0;
};

class QuadratureBase final : public BaseEvaluator {
public:
    QuadratureBase(const CauchyData& data, BaseKind kind, double surface_tol = -1.0)
        : data_(data), kind_(kind), ctx_(data.k) {
        surface_tol_ = surface_tol >= 0.0 ? surface_tol : ctx_.lambda() / 10.0;
        const std::size_t n = data.size();
        if (n == 0 || data.curlE_cross_nu.size() != n || data.surface.size() != n)
            throw std::invalid_argument("QuadratureBase: inconsistent Cauchy data");
        nu_cross_E_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            nu_cross_E_[i] = cross(data.surface.normals[i], data.E[i]);
    }

    double wavenumber() const override { return ctx_.k; }
    BaseKind kind() const { return kind_; }
    double surface_tol() const { return surface_tol_; }

    bool valid_at(const Vec3& z) const override {
        if (kind_ == BaseKind::InteriorI)
            return true;
        const double d = std::abs(norm(z - data_.surface.center) - data_.surface.radius);
        return d > surface_tol_;
    }

    BaseTriple triple(const Vec3& z) const override {
        if (!valid_at(z))
            throw std::domain_error("conjugate base functional evaluated within tolerance of the measurement surface");
        return kind_ == BaseKind::InteriorI ? triple_interior(z) : triple_conjugate(z);
    }

private:
    BaseTriple triple_interior(const Vec3& z) const {
        const double k = ctx_.k;
        cplx a0{}, a1{}, a2{};
        const std::size_t n = data_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 w = data_.surface.points[i] - z;
            const double r = norm(w);
            const auto [A, B] = detail::im_green_coeffs(k, r);
            const double g = detail::curl_im_green_coeff_over_r(k, r);
            const CVec3& T = nu_cross_E_[i];
            const CVec3& C = data_.curlE_cross_nu[i];
            const cplx cw = dot(C, w);
            const double wq = data_.surface.weights[i];
            a0 += wq * (g * (w.z * T.y - w.y * T.z) - (A * C.x + B * w.x * cw));
            a1 += wq * (g * (w.x * T.z - w.z * T.x) - (A * C.y + B * w.y * cw));
            a2 += wq * (g * (w.y * T.x - w.x * T.y) - (A * C.z + B * w.z * cw));
        }
        return {a0, a1, a2};
    }

    BaseTriple triple_conjugate(const Vec3& z) const {
        const double k = ctx_.k;
        cplx a0{}, a1{}, a2{};
        const std::size_t n = data_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 w = data_.surface.points[i] - z;
            const double r = norm(w);
            const auto [ga, gb] = detail::green_dyadic_coeffs(k, r);
            const cplx phi = std::polar(1.0 / (4.0 * pi * r), k * r);
            const cplx gc = phi * (cplx(0.0, k) - 1.0 / r) / r;
            const cplx ca = std::conj(ga), cb = std::conj(gb), cc = std::conj(gc);
            const CVec3& T = nu_cross_E_[i];
            const CVec3& C = data_.curlE_cross_nu[i];
            const cplx cw = dot(C, w);
            const double wq = data_.surface.weights[i];
            a0 += wq * (cc * (w.z * T.y - w.y * T.z) - (ca * C.x + cb * w.x * cw));
            a1 += wq * (cc * (w.x * T.z - w.z * T.x) - (ca * C.y + cb * w.y * cw));
            a2 += wq * (cc * (w.y * T.x - w.x * T.y) - (ca * C.z + cb * w.z * cw));
        }
        const cplx half_i(0.0, 0.5);
        return {half_i * a0, half_i * a1, half_i * a2};
    }

    const CauchyData& data_;
    BaseKind kind_;
    WaveContext ctx_;
    double surface_tol_;
    std::vector<CVec3> nu_cross_E_;
};

// Lemma-style closed form sum_j p_j . Im G(x_j, z) q, bypassing quadrature.
// Test oracle; never part of the reconstruction path.
class OracleBase final : public BaseEvaluator {
public:
    OracleBase(SourceSet sources, const WaveContext& ctx) : sources_(std::move(sources)), ctx_(ctx) {}

    double wavenumber() const override { return ctx_.k; }

    BaseTriple triple(const Vec3& z) const override {
        BaseTriple out{};
        for (const auto& s : sources_) {
            const Vec3 w = s.location - z;
            const double r = norm(w);
            const auto [A, B] = detail::im_green_coeffs(ctx_.k, r);
            const cplx pw = dot(s.moment, w);
            out[0] += A * s.moment.x + B * w.x * pw;
            out[1] += A * s.moment.y + B * w.y * pw;
            out[2] += A * s.moment.z + B * w.z * pw;
        }
        return out;
    }

private:
    SourceSet sources_;
    WaveContext ctx_;
};

inline cplx base_from_triple(const BaseTriple& t, const Vec3& q) {
    return t[0] * q.x + t[1] * q.y + t[2] * q.z;
}

// I(z,q) by surface quadrature; linear in q, valid for any z.
inline cplx base_I(const Vec3& z, const Vec3& q, const CauchyData& data) {
    if (norm(q) == 0.0)
        throw std::invalid_argument("base_I: probe vector q must be nonzero");
    return base_from_triple(QuadratureBase(data, BaseKind::InteriorI).triple(z), q);
}

// Conjugate-kernel variant; throws within surface_tol of the measurement surface.
inline cplx base_I_hat(const Vec3& z, const Vec3& q, const CauchyData& data, double surface_tol = -1.0) {
    if (norm(q) == 0.0)
        throw std::invalid_argument("base_I_hat: probe vector q must be nonzero");
    return base_from_triple(QuadratureBase(data, BaseKind::ConjugateIhat, surface_tol).triple(z), q);
}

inline cplx oracle_base(const Vec3& z, const Vec3& q, const SourceSet& sources, const WaveContext& ctx) {
    if (norm(q) == 0.0)
        throw std::invalid_argument("oracle_base: probe vector q must be nonzero");
    return base_from_triple(OracleBase(sources, ctx).triple(z), q);
}

// Value of one deflation term at z: part . Im G(location, z) e_i.
inline double deflation_term_value(const DeflationTerm& term, const Vec3& z, int i,
                                   const WaveContext& ctx) {
    const Vec3 w = term.location - z;
    const double r = norm(w);
    const auto [A, B] = detail::im_green_coeffs(ctx.k, r);
    return A * term.part_vector[i] + B * w[i] * dot(term.part_vector, w);
}

inline double deflation_sum(const std::vector<DeflationTerm>& terms, const Vec3& z, int i,
                            const WaveContext& ctx) {
    double s = 0.0;
    for (const auto& t : terms)
        s += deflation_term_value(t, z, i, ctx);
    return s;
}

// Projected, deflated base component: Re or Im of base(z, e_i) minus the
// accumulated real terms. The modulus variant has no real projection and is
// not accepted here.
inline double deflated_from_triple(const BaseTriple& t, const Vec3& z, int i, Variant variant,
                                   const std::vector<DeflationTerm>& terms, const WaveContext& ctx) {
    double proj;
    switch (variant) {
    case Variant::RealPart: proj = t[i].real(); break;
    case Variant::ImagPart: proj = t[i].imag(); break;
    default:
        throw std::invalid_argument("deflated base requires the real-part or imag-part variant");
    }
    return proj - deflation_sum(terms, z, i, ctx);
}

inline double deflated_base(const Vec3& z, int i, const CauchyData& data,
                            const std::vector<DeflationTerm>& terms, Variant variant,
                            BaseKind kind = BaseKind::InteriorI) {
    if (i < 0 || i > 2)
        throw std::invalid_argument("deflated_base: axis index out of range");
    const QuadratureBase eval(data, kind);
    return deflated_from_triple(eval.triple(z), z, i, variant, terms, WaveContext(data.k));
}

// Value of the exponent-s imaging function at one point given its base triple.
inline double field_value_from_triple(const BaseTriple& t, const Vec3& z, const ImagingSpec& spec,
                                      const std::vector<DeflationTerm>& terms, const WaveContext& ctx) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        double mag;
        if (spec.variant == Variant::Modulus) {
            mag = std::abs(t[i] - deflation_sum(terms, z, i, ctx));
        } else {
            mag = std::abs(deflated_from_triple(t, z, i, spec.variant, terms, ctx));
        }
        acc += std::pow(mag, spec.s);
    }
    return acc;
}

// Dense evaluation of the imaging function over a grid. Grid points where
// the evaluator is undefined (conjugate kernel within tolerance of the
// surface) contribute a zero value.
inline ScalarField imaging_field(const SamplingGrid& grid, const ImagingSpec& spec,
                                 const BaseEvaluator& eval,
                                 const std::vector<DeflationTerm>& terms = {}) {
    ScalarField field;
    field.grid = grid;
    field.values.assign(grid.size(), 0.0);
    field.label = to_string(spec.base) + "~" + to_string(spec.variant) +
                  " s=" + std::to_string(spec.s) + " terms=" + std::to_string(terms.size());
    const WaveContext ctx(eval.wavenumber());
    parallel_for(grid.size(), [&](std::size_t f) {
        const Vec3 z = grid.point(f);
        if (!eval.valid_at(z))
            return;
        field.values[f] = field_value_from_triple(eval.triple(z), z, spec, terms, ctx);
    });
    return field;
}

inline ScalarField imaging_field(const SamplingGrid& grid, const ImagingSpec& spec,
                                 const CauchyData& data,
                                 const std::vector<DeflationTerm>& terms = {}) {
    const QuadratureBase eval(data, spec.base);
    return imaging_field(grid, spec, eval, terms);
}

} // namespace emsrc
