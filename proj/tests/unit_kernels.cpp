#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "emsrc/kernels.hpp"

using namespace emsrc;

namespace {

// Deterministic point/vector draws for property checks.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) {
        return a + (b - a) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    }
    Vec3 vec(double a, double b) { return {uniform(a, b), uniform(a, b), uniform(a, b)}; }
};

// Central difference of a complex scalar function along one axis.
template <class F>
cplx diff1(F&& f, Vec3 x, int axis, double h) {
    Vec3 xp = x, xm = x;
    if (axis == 0) { xp.x += h; xm.x -= h; }
    if (axis == 1) { xp.y += h; xm.y -= h; }
    if (axis == 2) { xp.z += h; xm.z -= h; }
    return (f(xp) - f(xm)) / (2.0 * h);
}

// Mixed second partial d^2 f / dx_i dx_j by 4-point (or 3-point on-diagonal) stencil.
template <class F>
cplx diff2(F&& f, Vec3 x, int i, int j, double h) {
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
CVec3 fd_curl(F&& field, const Vec3& x, double h) {
    auto comp = [&](const Vec3& p, int c) { return field(p)[c]; };
    const cplx cx = diff1([&](const Vec3& p) { return comp(p, 2); }, x, 1, h) -
                    diff1([&](const Vec3& p) { return comp(p, 1); }, x, 2, h);
    const cplx cy = diff1([&](const Vec3& p) { return comp(p, 0); }, x, 2, h) -
                    diff1([&](const Vec3& p) { return comp(p, 2); }, x, 0, h);
    const cplx cz = diff1([&](const Vec3& p) { return comp(p, 1); }, x, 0, h) -
                    diff1([&](const Vec3& p) { return comp(p, 0); }, x, 1, h);
    return {cx, cy, cz};
}

// curl curl F = grad(div F) - Laplacian(F), all by finite differences.
template <class F>
CVec3 fd_curl_curl(F&& field, const Vec3& x, double h) {
    CVec3 out;
    cplx grad_div[3];
    for (int i = 0; i < 3; ++i) {
        cplx gi{};
        for (int j = 0; j < 3; ++j)
            gi += diff2([&](const Vec3& p) { return field(p)[j]; }, x, i, j, h);
        grad_div[i] = gi;
    }
    cplx lap[3];
    for (int c = 0; c < 3; ++c) {
        cplx l{};
        for (int i = 0; i < 3; ++i)
            l += diff2([&](const Vec3& p) { return field(p)[c]; }, x, i, i, h);
        lap[c] = l;
    }
    return {grad_div[0] - lap[0], grad_div[1] - lap[1], grad_div[2] - lap[2]};
}

} // namespace

TEST_CASE("scalar Green function closed form", "[kernels]") {
    const WaveContext ctx(20.0);

    SECTION("value at one wavelength separation") {
        const Vec3 x{0.0, 0.0, 0.0}, y{ctx.lambda(), 0.0, 0.0};
        const cplx phi = scalar_green(x, y, ctx);
        CHECK(phi.real() == Catch::Approx(10.0 / (4.0 * pi * pi)).epsilon(1e-12));
        CHECK(std::abs(phi.imag()) < 1e-15);
    }

    SECTION("depends only on separation") {
        Rng rng(11);
        for (int t = 0; t < 20; ++t) {
            const Vec3 x = rng.vec(-2.0, 2.0), y = rng.vec(-2.0, 2.0);
            if (norm(x - y) < 1e-6)
                continue;
            const cplx a = scalar_green(x, y, ctx), b = scalar_green(y, x, ctx);
            CHECK(std::abs(a - b) <= 1e-14 * std::abs(a));
        }
    }

    SECTION("imaginary part vanishes at kR = pi") {
        const Vec3 x{0.3, -0.2, 0.1};
        const Vec3 y = x + Vec3{pi / ctx.k, 0.0, 0.0};
        CHECK(std::abs(scalar_green(x, y, ctx).imag()) < 1e-14);
    }

    SECTION("coincident points rejected") {
        const Vec3 x{1.0, 2.0, 3.0};
        CHECK_THROWS_AS(scalar_green(x, x, ctx), std::domain_error);
    }
}

TEST_CASE("gradient of scalar Green function", "[kernels]") {
    const WaveContext ctx(20.0);
    const Vec3 y{0.1, -0.2, 0.05};

    SECTION("matches central differences at R=0.7") {
        const Vec3 x = y + Vec3{0.7 / std::sqrt(3.0), 0.7 / std::sqrt(3.0), 0.7 / std::sqrt(3.0)};
        const CVec3 g = grad_scalar_green(x, y, ctx);
        auto phi = [&](const Vec3& p) { return scalar_green(p, y, ctx); };
        const double h = 1e-5;
        const CVec3 fd{diff1(phi, x, 0, h), diff1(phi, x, 1, h), diff1(phi, x, 2, h)};
        CHECK(norm(g - fd) <= 1e-6 * norm(g));
    }

    SECTION("parallel to x - y") {
        Rng rng(5);
        for (int t = 0; t < 20; ++t) {
            const Vec3 x = rng.vec(-1.5, 1.5), yy = rng.vec(-1.5, 1.5);
            if (norm(x - yy) < 0.05)
                continue;
            const CVec3 g = grad_scalar_green(x, yy, ctx);
            const CVec3 c = cross(g, x - yy);
            CHECK(norm(c) <= 1e-12 * norm(g) * norm(x - yy));
        }
    }

    SECTION("odd under swapping arguments") {
        Rng rng(6);
        const Vec3 x = rng.vec(-1.0, 1.0), yy = rng.vec(1.5, 2.5);
        const CVec3 a = grad_scalar_green(x, yy, ctx);
        const CVec3 b = grad_scalar_green(yy, x, ctx);
        CHECK(norm(a + b) <= 1e-13 * norm(a));
    }
}

TEST_CASE("dyadic Green tensor action", "[kernels]") {
    const WaveContext ctx(20.0);
    const Vec3 y{-0.3, 0.4, 0.1};

    SECTION("linear in the moment") {
        const Vec3 x = y + Vec3{0.5, -0.4, 0.3};
        const CVec3 p{cplx(1.0, -2.0), cplx(0.5, 0.0), cplx(-1.0, 3.0)};
        const CVec3 a = green_tensor_apply(x, y, ctx, p * cplx(2.0, 0.0));
        const CVec3 b = green_tensor_apply(x, y, ctx, p) * cplx(2.0, 0.0);
        CHECK(norm(a - b) <= 1e-13 * norm(a));
    }

    SECTION("closed dyadic form matches grad-div finite differences at R=0.9") {
        const Vec3 x = y + Vec3{0.9, 0.0, 0.0} * (1.0 / std::sqrt(2.0)) + Vec3{0.0, 0.9, 0.0} * (1.0 / std::sqrt(2.0));
        const CVec3 p{cplx(1.0, 0.5), cplx(-2.0, 1.0), cplx(0.3, -0.7)};
        auto phi = [&](const Vec3& q) { return scalar_green(q, y, ctx); };
        const double h = 1e-4;
        CVec3 fd{};
        // (1/k^2) * Hessian(Phi) p + Phi p, assembled from second differences
        for (int i = 0; i < 3; ++i) {
            cplx acc{};
            for (int j = 0; j < 3; ++j)
                acc += diff2(phi, x, i, j, h) * p[j];
            if (i == 0) fd.x = acc;
            if (i == 1) fd.y = acc;
            if (i == 2) fd.z = acc;
        }
        const CVec3 expected = (1.0 / (ctx.k * ctx.k)) * fd + scalar_green(x, y, ctx) * p;
        const CVec3 got = green_tensor_apply(x, y, ctx, p);
        CHECK(norm(got - expected) <= 1e-5 * norm(got));
    }

    SECTION("satisfies curl curl - k^2 away from the source") {
        const Vec3 x = y + Vec3{0.31, -0.52, 0.44};
        const CVec3 p{cplx(2.0, 1.0), cplx(-1.0, 0.0), cplx(0.5, -0.5)};
        auto field = [&](const Vec3& q) { return green_tensor_apply(q, y, ctx, p); };
        const double h = 1.2e-5;
        const CVec3 cc = fd_curl_curl(field, x, h);
        const CVec3 k2g = (ctx.k * ctx.k) * field(x);
        CHECK(norm(cc - k2g) <= 1e-3 * norm(k2g));
    }
}

TEST_CASE("curl of the Green tensor action", "[kernels]") {
    const WaveContext ctx(20.0);
    const Vec3 y{0.2, 0.1, -0.3};

    SECTION("vanishes for moments parallel to x - y") {
        const Vec3 w{0.4, -0.2, 0.6};
        const Vec3 x = y + w;
        const CVec3 p = CVec3(w) * cplx(2.0, -1.0);
        CHECK(norm(curl_green_apply(x, y, ctx, p)) <= 1e-12 * norm(p));
    }

    SECTION("matches finite-difference curl of the tensor action at R=1.1") {
        const Vec3 x = y + Vec3{1.1 / std::sqrt(3.0), -1.1 / std::sqrt(3.0), 1.1 / std::sqrt(3.0)};
        const CVec3 p{cplx(1.0, 1.0), cplx(0.0, -2.0), cplx(3.0, 0.5)};
        auto field = [&](const Vec3& q) { return green_tensor_apply(q, y, ctx, p); };
        const CVec3 fd = fd_curl(field, x, 1e-5);
        const CVec3 got = curl_green_apply(x, y, ctx, p);
        CHECK(norm(got - fd) <= 1e-5 * norm(got));
    }

    SECTION("orthogonal to x - y") {
        Rng rng(7);
        for (int t = 0; t < 20; ++t) {
            const Vec3 x = rng.vec(-1.0, 1.0), yy = rng.vec(1.2, 2.0);
            const CVec3 p{cplx(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                          cplx(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                          cplx(rng.uniform(-3, 3), rng.uniform(-3, 3))};
            const CVec3 c = curl_green_apply(x, yy, ctx, p);
            const Vec3 w = x - yy;
            CHECK(std::abs(dot(c, w)) <= 1e-12 * norm(c) * norm(w));
        }
    }
}

TEST_CASE("imaginary part of the Green tensor", "[kernels]") {
    const WaveContext ctx(20.0);

    SECTION("coincidence limit (k/6pi) q") {
        const Vec3 x{0.4, 0.4, -0.2};
        const Vec3 v = im_green_apply(x, x, ctx, {1.0, 0.0, 0.0});
        CHECK(v.x == Catch::Approx(1.0610329539459689).epsilon(1e-12));
        CHECK(v.y == 0.0);
        CHECK(v.z == 0.0);
    }

    SECTION("symmetric under swapping arguments") {
        Rng rng(8);
        for (int t = 0; t < 30; ++t) {
            const Vec3 x = rng.vec(-1.0, 1.0), y = rng.vec(-1.0, 1.0), q = rng.vec(-1.0, 1.0);
            const Vec3 a = im_green_apply(x, y, ctx, q);
            const Vec3 b = im_green_apply(y, x, ctx, q);
            CHECK(norm(a - b) <= 1e-13);
        }
    }

    SECTION("matches Im of the complex tensor action for real moments") {
        const Vec3 y{0.1, 0.0, -0.1};
        const Vec3 x = y + Vec3{0.7, 0.0, 0.0};
        const Vec3 q{0.3, -1.2, 0.8};
        const CVec3 gp = green_tensor_apply(x, y, ctx, CVec3(q));
        const Vec3 got = im_green_apply(x, y, ctx, q);
        CHECK(norm(got - imag(gp)) <= 1e-10 * norm(got));
    }

    SECTION("closed form and Taylor branch agree at the switch radius") {
        const double r = kernel_switch_kr / ctx.k;
        const auto closed = detail::im_green_coeffs(ctx.k, r * (1.0 + 1e-12));
        const auto taylor = detail::im_green_coeffs(ctx.k, r * (1.0 - 1e-12));
        const Vec3 w{r, 0.0, 0.0};
        const Vec3 q{0.5, -0.7, 0.3};
        const Vec3 a = closed.A * q + (closed.B * dot(q, w)) * w;
        const Vec3 b = taylor.A * q + (taylor.B * dot(q, w)) * w;
        CHECK(norm(a - b) <= 1e-8 * norm(a));
    }

    SECTION("Taylor remainder is fourth order") {
        // |closed - taylor| / |w|^4 stays bounded for k|w| in (0, 0.5]
        const Vec3 q{1.0, 0.5, -0.25};
        double ratio_min = 1e300, ratio_max = 0.0;
        for (double t = 0.05; t <= 0.5; t += 0.025) {
            const double r = t / ctx.k;
            const Vec3 w{r * 0.6, r * 0.48, r * 0.6402343749999999};
            const double rr = norm(w);
            const auto closed = detail::im_green_coeffs(ctx.k, rr);
            const double tayA = ctx.k / (6.0 * pi) - std::pow(ctx.k, 3) * rr * rr / (30.0 * pi);
            const double tayB = std::pow(ctx.k, 3) / (60.0 * pi);
            const Vec3 a = closed.A * q + (closed.B * dot(q, w)) * w;
            const Vec3 b = tayA * q + (tayB * dot(q, w)) * w;
            const double ratio = norm(a - b) / std::pow(rr, 4);
            ratio_min = std::min(ratio_min, ratio);
            ratio_max = std::max(ratio_max, ratio);
        }
        CHECK(ratio_max < 10.0 * ratio_min); // bounded, no blowup toward either end
        CHECK(ratio_max < std::pow(ctx.k, 5));
    }

    SECTION("decays like 1/R at large separation") {
        const Vec3 q{0.0, 1.0, 0.0};
        const Vec3 x{0.0, 0.0, 0.0};
        const double lam = ctx.lambda();
        double near_env = 0.0, far_env = 0.0;
        for (double r = 5.0 * lam; r <= 10.0 * lam; r += lam / 7.0)
            near_env = std::max(near_env, norm(im_green_apply(x, {r, 0.001, 0.0}, ctx, q)) * r);
        for (double r = 50.0 * lam; r <= 100.0 * lam; r += lam / 7.0)
            far_env = std::max(far_env, norm(im_green_apply(x, {r, 0.001, 0.0}, ctx, q)) * r);
        CHECK(far_env <= 1.05 * near_env);
        CHECK(far_env <= 1.0); // |Im G q| R stays O(1/4pi) scale
    }

    SECTION("homogeneous Maxwell residual vanishes near and far") {
        const Vec3 zsrc{0.05, -0.1, 0.2};
        const Vec3 q{1.0, -0.5, 0.25};
        auto field = [&](const Vec3& p) {
            const Vec3 v = im_green_apply(p, zsrc, ctx, q);
            return CVec3(v);
        };
        for (const Vec3& x : {zsrc + Vec3{0.4, 0.1, -0.2}, zsrc + Vec3{0.01, 0.005, -0.002}}) {
            const CVec3 cc = fd_curl_curl(field, x, 1.2e-5);
            const CVec3 k2g = (ctx.k * ctx.k) * field(x);
            CHECK(norm(cc - k2g) <= 1e-3 * norm(k2g));
        }
    }
}

TEST_CASE("curl of the imaginary part", "[kernels]") {
    const WaveContext ctx(20.0);
    const Vec3 y{0.0, 0.25, -0.4};

    SECTION("exactly zero at coincidence and vanishing nearby") {
        const Vec3 q{0.3, 0.8, -0.1};
        CHECK(norm(curl_im_green_apply(y, y, ctx, q)) == 0.0);
        // odd leading order ~ k^3 R / 12 pi
        const Vec3 x = y + Vec3{1e-12, 0.0, 0.0};
        CHECK(norm(curl_im_green_apply(x, y, ctx, q)) <= 1e-8);
        const Vec3 x6 = y + Vec3{1e-6, 0.0, 0.0};
        const double expect = std::pow(ctx.k, 3) * 1e-6 / (12.0 * pi) * norm(cross(Vec3{1, 0, 0}, q));
        CHECK(norm(curl_im_green_apply(x6, y, ctx, q)) == Catch::Approx(expect).epsilon(1e-4));
    }

    SECTION("matches finite-difference curl at R=0.8") {
        const Vec3 x = y + Vec3{0.8, 0.0, 0.0};
        const Vec3 q{-0.2, 1.0, 0.5};
        auto field = [&](const Vec3& p) { return CVec3(im_green_apply(p, y, ctx, q)); };
        const CVec3 fd = fd_curl(field, x, 1e-5);
        const Vec3 got = curl_im_green_apply(x, y, ctx, q);
        CHECK(norm(CVec3(got) - fd) <= 1e-5 * norm(got));
    }

    SECTION("orthogonal to x - y") {
        Rng rng(9);
        for (int t = 0; t < 20; ++t) {
            const Vec3 x = rng.vec(-1.0, 1.0), yy = rng.vec(-1.0, 1.0), q = rng.vec(-2.0, 2.0);
            if (norm(x - yy) < 1e-3)
                continue;
            const Vec3 c = curl_im_green_apply(x, yy, ctx, q);
            CHECK(std::abs(dot(c, x - yy)) <= 1e-12 * norm(c) * norm(x - yy) + 1e-300);
        }
    }
}

TEST_CASE("coincidence inverse", "[kernels]") {
    const WaveContext ctx(20.0);
    const Mat3 inv = im_green_coincidence_inverse(ctx);

    SECTION("diagonal 6 pi / k") {
        CHECK(inv.m[0][0] == Catch::Approx(0.9424777960769379).epsilon(1e-12));
        CHECK(inv.m[0][1] == 0.0);
    }

    SECTION("inverse of (k/6pi) I") {
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(inv.m[i][i] * ctx.k / (6.0 * pi) - 1.0) <= 1e-14);
    }

    SECTION("probe recovers unit vectors through the kernel") {
        const Vec3 x{0.7, -0.7, 0.2};
        for (int i = 0; i < 3; ++i) {
            const Vec3 probe = inv.apply(axis_unit(i));
            const Vec3 e = im_green_apply(x, x, ctx, probe);
            CHECK(norm(e - axis_unit(i)) <= 1e-13);
        }
    }
}

TEST_CASE("component dominance arithmetic", "[kernels]") {
    // For every nonzero real p at least one of 8 p_i^2 - p_j^2 - p_l^2 is positive.
    Rng rng(1234);
    for (int t = 0; t < 1000; ++t) {
        Vec3 p = rng.vec(-10.0, 10.0);
        if (norm(p) == 0.0)
            p.x = 1.0;
        const bool c1 = 8 * p.x * p.x - p.y * p.y - p.z * p.z > 0;
        const bool c2 = 8 * p.y * p.y - p.x * p.x - p.z * p.z > 0;
        const bool c3 = 8 * p.z * p.z - p.x * p.x - p.y * p.y > 0;
        REQUIRE((c1 || c2 || c3));
    }
}

TEST_CASE("single-probe local maxima around a source", "[kernels]") {
    // For p = (17,-7,-8) every |p . Im G(x,z) e_i|^2 is maximal at z = x
    // within a ball of radius lambda/4.
    const WaveContext ctx(20.0);
    const Vec3 p{17.0, -7.0, -8.0};
    const Vec3 x{-0.5, 0.0, 0.5};
    const double rad = ctx.lambda() / 4.0;

    double center_val[3], ball_max[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i)
        center_val[i] = std::pow(dot(p, im_green_apply(x, x, ctx, axis_unit(i))), 2);

    const int m = 10;
    for (int ix = -m; ix <= m; ++ix)
        for (int iy = -m; iy <= m; ++iy)
            for (int iz = -m; iz <= m; ++iz) {
                const Vec3 dz{rad * ix / m, rad * iy / m, rad * iz / m};
                if (norm(dz) > rad)
                    continue;
                const Vec3 z = x + dz;
                for (int i = 0; i < 3; ++i) {
                    const double v = std::pow(dot(p, im_green_apply(x, z, ctx, axis_unit(i))), 2);
                    ball_max[i] = std::max(ball_max[i], v);
                }
            }
    for (int i = 0; i < 3; ++i)
        CHECK(ball_max[i] <= center_val[i] * (1.0 + 1e-12));
}
