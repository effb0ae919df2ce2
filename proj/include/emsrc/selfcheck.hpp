#pragma once

#include <random>
#include <string>
#include <vector>

#include "emsrc/kernels.hpp"
#include "emsrc/surface.hpp"

// Kernel identity suite behind the `selfcheck` command: every closed form
// is checked against an independent route (finite differences, series
// limits, exact arithmetic) at fixed probe geometry.

namespace emsrc {

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

namespace detail {

template <class F>
cplx fd1(F&& f, Vec3 x, int axis, double h) {
    Vec3 xp = x, xm = x;
    if (axis == 0) { xp.x += h; xm.x -= h; }
    if (axis == 1) { xp.y += h; xm.y -= h; }
    if (axis == 2) { xp.z += h; xm.z -= h; }
    return (f(xp) - f(xm)) / (2.0 * h);
}

template <class F>
cplx fd2(F&& f, Vec3 x, int i, int j, double h) {
    auto shift = [](Vec3 v, int axis, double d) {
        if (axis == 0) v.x += d;
        if (axis == 1) v.y += d;
        if (axis == 2) v.z += d;
        return v;
    };
    if (i == j)
        return (f(shift(x, i, h)) - 2.0 * f(x) + f(shift(x, i, -h))) / (h * h);
    return (f(shift(shift(x, i, h), j, h)) - f(shift(shift(x, i, h), j, -h)) -
            f(shift(shift(x, i, -h), j, h)) + f(shift(shift(x, i, -h), j, -h))) /
           (4.0 * h * h);
}

template <class F>
CVec3 fd_curl_of(F&& field, const Vec3& x, double h) {
    auto comp = [&](const Vec3& p, int c) { return field(p)[c]; };
    return {fd1([&](const Vec3& p) { return comp(p, 2); }, x, 1, h) -
                fd1([&](const Vec3& p) { return comp(p, 1); }, x, 2, h),
            fd1([&](const Vec3& p) { return comp(p, 0); }, x, 2, h) -
                fd1([&](const Vec3& p) { return comp(p, 2); }, x, 0, h),
            fd1([&](const Vec3& p) { return comp(p, 1); }, x, 0, h) -
                fd1([&](const Vec3& p) { return comp(p, 0); }, x, 1, h)};
}

} // namespace detail

inline std::vector<CheckResult> run_selfcheck() {
    std::vector<CheckResult> out;
    const WaveContext ctx(20.0);
    const double k = ctx.k;
    auto push = [&](const std::string& name, double residual, double tol) {
        out.push_back({name, residual, tol, residual <= tol});
    };

    { // coincidence limit Im G(x,x) q = (k/6pi) q
        const Vec3 x{0.37, -0.21, 0.83}, q{0.4, -1.1, 0.7};
        const Vec3 got = im_green_apply(x, x, ctx, q);
        const Vec3 want = (k / (6.0 * pi)) * q;
        push("coincidence limit (k/6pi)", norm(got - want) / norm(want), 1e-10);
    }

    { // closed form vs Taylor branch at the switch radius
        const double r = kernel_switch_kr / k;
        const auto closed = detail::im_green_coeffs(k, r * (1.0 + 1e-12));
        const auto taylor = detail::im_green_coeffs(k, r * (1.0 - 1e-12));
        const Vec3 w{r * 0.48, r * 0.6, r * 0.64}, q{1.0, -0.3, 0.2};
        const Vec3 wr = w * (r / norm(w));
        const Vec3 a = closed.A * q + (closed.B * dot(q, wr)) * wr;
        const Vec3 b = taylor.A * q + (taylor.B * dot(q, wr)) * wr;
        push("branch agreement at switch", norm(a - b) / norm(a), 1e-8);
    }

    { // symmetry of the Im G action
        std::mt19937_64 gen(2024);
        auto u = [&] { return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0; };
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            const Vec3 x{u(), u(), u()}, y{u(), u(), u()}, q{u(), u(), u()};
            worst = std::max(worst, norm(im_green_apply(x, y, ctx, q) - im_green_apply(y, x, ctx, q)));
        }
        push("Im G symmetry", worst, 1e-13);
    }

    const Vec3 y0{0.1, -0.2, 0.05};
    { // gradient vs central differences at R = 0.7
        const Vec3 x = y0 + Vec3{0.7, 0.0, 0.0};
        const CVec3 g = grad_scalar_green(x, y0, ctx);
        auto phi = [&](const Vec3& p) { return scalar_green(p, y0, ctx); };
        const CVec3 fd{detail::fd1(phi, x, 0, 1e-5), detail::fd1(phi, x, 1, 1e-5),
                       detail::fd1(phi, x, 2, 1e-5)};
        push("grad Phi finite differences", norm(g - fd) / norm(g), 1e-5);
    }

    { // dyadic action vs grad-div finite differences at R = 0.9
        const Vec3 x = y0 + Vec3{0.9 / std::sqrt(2.0), 0.9 / std::sqrt(2.0), 0.0};
        const CVec3 p{cplx(1.0, 0.5), cplx(-2.0, 1.0), cplx(0.3, -0.7)};
        auto phi = [&](const Vec3& q) { return scalar_green(q, y0, ctx); };
        CVec3 fd{};
        for (int i = 0; i < 3; ++i) {
            cplx acc{};
            for (int j = 0; j < 3; ++j)
                acc += detail::fd2(phi, x, i, j, 1e-4) * p[j];
            if (i == 0) fd.x = acc;
            if (i == 1) fd.y = acc;
            if (i == 2) fd.z = acc;
        }
        const CVec3 expected = (1.0 / (k * k)) * fd + scalar_green(x, y0, ctx) * p;
        const CVec3 got = green_tensor_apply(x, y0, ctx, p);
        push("G p finite differences", norm(got - expected) / norm(got), 1e-5);
    }

    { // curl of the tensor action at R = 1.1
        const Vec3 x = y0 + Vec3{1.1 / std::sqrt(3.0), -1.1 / std::sqrt(3.0), 1.1 / std::sqrt(3.0)};
        const CVec3 p{cplx(1.0, 1.0), cplx(0.0, -2.0), cplx(3.0, 0.5)};
        auto field = [&](const Vec3& q) { return green_tensor_apply(q, y0, ctx, p); };
        const CVec3 fd = detail::fd_curl_of(field, x, 1e-5);
        const CVec3 got = curl_green_apply(x, y0, ctx, p);
        push("curl G p finite differences", norm(got - fd) / norm(got), 1e-5);
    }

    { // curl of the imaginary part at R = 0.8
        const Vec3 x = y0 + Vec3{0.8, 0.0, 0.0};
        const Vec3 q{-0.2, 1.0, 0.5};
        auto field = [&](const Vec3& p) { return CVec3(im_green_apply(p, y0, ctx, q)); };
        const CVec3 fd = detail::fd_curl_of(field, x, 1e-5);
        const Vec3 got = curl_im_green_apply(x, y0, ctx, q);
        push("curl Im G q finite differences", norm(CVec3(got) - fd) / norm(got), 1e-5);
    }

    { // at least one dominance condition holds for random nonzero vectors
        std::mt19937_64 gen(99);
        auto u = [&] { return 20.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 10.0; };
        int counterexamples = 0;
        for (int t = 0; t < 1000; ++t) {
            const double p1 = u(), p2 = u(), p3 = u();
            const bool any = (8 * p1 * p1 - p2 * p2 - p3 * p3 > 0) ||
                             (8 * p2 * p2 - p1 * p1 - p3 * p3 > 0) ||
                             (8 * p3 * p3 - p1 * p1 - p2 * p2 > 0);
            if (!any)
                ++counterexamples;
        }
        push("component dominance conditions", counterexamples, 0.0);
    }

    { // surface quadrature integrates the constant function
        const auto s = build_sphere_surface({0, 0, 0}, 25.0, 100, 100);
        double wsum = 0.0;
        for (double w : s.weights)
            wsum += w;
        push("sphere weight sum", std::abs(wsum / (4.0 * pi * 25.0 * 25.0) - 1.0), 1e-3);
    }

    { // coincidence inverse
        const Mat3 inv = im_green_coincidence_inverse(ctx);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(inv.m[i][i] * k / (6.0 * pi) - 1.0));
        push("coincidence inverse product", worst, 1e-14);
    }

    return out;
}

} // namespace emsrc
