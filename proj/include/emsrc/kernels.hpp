#pragma once

#include <cmath>
#include <stdexcept>

#include "emsrc/vec3.hpp"
#include "emsrc/wave.hpp"

// Closed-form kernels of the free-space Maxwell Green's tensor
//
//   G(x,y) = Phi(x,y) I + (1/k^2) grad div (Phi(x,y) I),
//   Phi(x,y) = exp(ik|x-y|) / (4 pi |x-y|),
//
// together with Im G and curl Im G, which stay bounded at coincidence and
// are evaluated through a Taylor branch below a switch radius.

namespace emsrc {

// Series branch when k|x-y| < this; below it the closed forms lose digits
// to cancellation while the truncated series is already at full precision.
inline constexpr double kernel_switch_kr = 1e-2;

struct Mat3 {
    double m[3][3] = {};
    Vec3 apply(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
};

namespace detail {
inline double separation(const Vec3& x, const Vec3& y) {
    const double r = norm(x - y);
    if (!(r > 0.0))
        throw std::domain_error("kernel evaluation at coincident points");
    return r;
}
} // namespace detail

// Phi(x,y) = e^{ikR}/(4 pi R)
inline cplx scalar_green(const Vec3& x, const Vec3& y, const WaveContext& ctx) {
    const double r = detail::separation(x, y);
    return std::polar(1.0 / (4.0 * pi * r), ctx.k * r);
}

// grad_x Phi = Phi(R) (ik - 1/R) (x-y)/R
inline CVec3 grad_scalar_green(const Vec3& x, const Vec3& y, const WaveContext& ctx) {
    const Vec3 w = x - y;
    const double r = detail::separation(x, y);
    const cplx phi = std::polar(1.0 / (4.0 * pi * r), ctx.k * r);
    const cplx c = phi * (cplx(0.0, ctx.k) - 1.0 / r) / r;
    return {c * w.x, c * w.y, c * w.z};
}

namespace detail {

// G(x,y) p = a p + b (w.p) w with w = x - y (unnormalized).
struct DyadicCoeffs {
    cplx a, b;
};

inline DyadicCoeffs green_dyadic_coeffs(double k, double r) {
    const double t = k * r;
    const cplx phi = std::polar(1.0 / (4.0 * pi * r), t);
    const cplx it_inv = cplx(0.0, 1.0) / t;
    const double t2_inv = 1.0 / (t * t);
    const cplx a = phi * (1.0 + it_inv - t2_inv);
    const cplx b = phi * (-1.0 - 3.0 * it_inv + 3.0 * t2_inv) / (r * r);
    return {a, b};
}

// Im G(x,y) q = A q + B (w.q) w.
struct ImCoeffs {
    double A, B;
};

inline ImCoeffs im_green_coeffs(double k, double r) {
    const double t = k * r;
    if (t < kernel_switch_kr) {
        // (k/6pi) q - (k^3/60pi) (2 q |w|^2 - w (q.w))
        const double A = k / (6.0 * pi) - k * k * k * r * r / (30.0 * pi);
        const double B = k * k * k / (60.0 * pi);
        return {A, B};
    }
    const double j0 = std::sin(t) / t;
    const double c = std::cos(t);
    const double inv4pi = 1.0 / (4.0 * pi);
    const double A = (k * j0 - (j0 - c) / (k * r * r)) * inv4pi;
    const double B = (-k * j0 / (r * r) + 3.0 * (j0 - c) / (k * r * r * r * r)) * inv4pi;
    return {A, B};
}

// curl_x (Im G(x,y) q) = g_over_r * (w x q).
inline double curl_im_green_coeff_over_r(double k, double r) {
    const double t = k * r;
    if (t < kernel_switch_kr)
        return -k * k * k / (12.0 * pi) * (1.0 - t * t / 10.0);
    return (k * std::cos(t) - std::sin(t) / r) / (4.0 * pi * r * r);
}

} // namespace detail

// Dyadic action: G(x,y) p = Phi [(1 + i/t - 1/t^2) p + (-1 - 3i/t + 3/t^2) (what.p) what],
// t = kR. Validated against the finite-difference definition in the test suite.
inline CVec3 green_tensor_apply(const Vec3& x, const Vec3& y, const WaveContext& ctx, const CVec3& p) {
    const Vec3 w = x - y;
    const double r = detail::separation(x, y);
    const auto [a, b] = detail::green_dyadic_coeffs(ctx.k, r);
    const cplx wp = dot(p, w);
    return a * p + (b * wp) * CVec3(w);
}

// curl_x (G(x,y) p) = grad_x Phi x p; the grad-div part is curl-free.
inline CVec3 curl_green_apply(const Vec3& x, const Vec3& y, const WaveContext& ctx, const CVec3& p) {
    const Vec3 w = x - y;
    const double r = detail::separation(x, y);
    const cplx phi = std::polar(1.0 / (4.0 * pi * r), ctx.k * r);
    const cplx c = phi * (cplx(0.0, ctx.k) - 1.0 / r) / r;
    // c * (w x p)
    const CVec3 wxp = cross(w, p);
    return c * wxp;
}

// Im G(x,y) q; defined for all x, y including coincidence.
inline Vec3 im_green_apply(const Vec3& x, const Vec3& y, const WaveContext& ctx, const Vec3& q) {
    const Vec3 w = x - y;
    const double r = norm(w);
    if (r == 0.0)
        return (ctx.k / (6.0 * pi)) * q;
    const auto [A, B] = detail::im_green_coeffs(ctx.k, r);
    return A * q + (B * dot(q, w)) * w;
}

// curl_x (Im G(x,y) q) = Im(grad_x Phi) x q; odd in w, vanishes at coincidence.
inline Vec3 curl_im_green_apply(const Vec3& x, const Vec3& y, const WaveContext& ctx, const Vec3& q) {
    const Vec3 w = x - y;
    const double r = norm(w);
    if (r == 0.0)
        return {0.0, 0.0, 0.0};
    const double g = detail::curl_im_green_coeff_over_r(ctx.k, r);
    return g * cross(w, q);
}

// [Im G(x,x)]^{-1} = (6 pi / k) I.
inline Mat3 im_green_coincidence_inverse(const WaveContext& ctx) {
    Mat3 out;
    const double d = 6.0 * pi / ctx.k;
    out.m[0][0] = out.m[1][1] = out.m[2][2] = d;
    return out;
}

} // namespace emsrc
