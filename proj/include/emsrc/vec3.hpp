#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace emsrc {

using cplx = std::complex<double>;

// Real 3-vector with value semantics. Used for positions, normals and
// real probe/moment vectors.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline constexpr double norm2(const Vec3& v) { return dot(v, v); }

inline constexpr Vec3 axis_unit(int i) {
    return {i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0, i == 2 ? 1.0 : 0.0};
}

// Complex 3-vector (field amplitudes, moment vectors).
struct CVec3 {
    cplx x{}, y{}, z{};

    constexpr CVec3() = default;
    constexpr CVec3(cplx x_, cplx y_, cplx z_) : x(x_), y(y_), z(z_) {}
    constexpr CVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

    constexpr cplx operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr CVec3 operator+(const CVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr CVec3 operator-(const CVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    CVec3 operator*(cplx s) const { return {x * s, y * s, z * s}; }
    CVec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    CVec3& operator+=(const CVec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline CVec3 operator*(cplx s, const CVec3& v) { return v * s; }
inline CVec3 operator*(double s, const CVec3& v) { return v * s; }

// Bilinear (unconjugated) dot products; the boundary-integral identities
// use p . v with no conjugation.
inline cplx dot(const CVec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline cplx dot(const Vec3& a, const CVec3& b) { return b.x * a.x + b.y * a.y + b.z * a.z; }
inline cplx dot(const CVec3& a, const CVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline CVec3 cross(const CVec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline CVec3 cross(const Vec3& a, const CVec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const CVec3& v) { return std::sqrt(std::norm(v.x) + std::norm(v.y) + std::norm(v.z)); }
inline double norm2(const CVec3& v) { return std::norm(v.x) + std::norm(v.y) + std::norm(v.z); }

inline Vec3 real(const CVec3& v) { return {v.x.real(), v.y.real(), v.z.real()}; }
inline Vec3 imag(const CVec3& v) { return {v.x.imag(), v.y.imag(), v.z.imag()}; }
inline CVec3 conj(const CVec3& v) { return {std::conj(v.x), std::conj(v.y), std::conj(v.z)}; }
inline CVec3 make_cvec(const Vec3& re, const Vec3& im) {
    return {cplx(re.x, im.x), cplx(re.y, im.y), cplx(re.z, im.z)};
}

inline bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
inline bool finite(const CVec3& v) {
    return std::isfinite(v.x.real()) && std::isfinite(v.x.imag()) &&
           std::isfinite(v.y.real()) && std::isfinite(v.y.imag()) &&
           std::isfinite(v.z.real()) && std::isfinite(v.z.imag());
}

} // namespace emsrc
