#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cusplab {

// Error taxonomy. Everything thrown by the library derives from Error so
// callers can catch once; the CLI maps ConfigError to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct ResourceError : Error {
    using Error::Error;
};
struct ConvergenceError : Error {
    double residual = 0.0;
    ConvergenceError(const std::string& what, double r) : Error(what), residual(r) {}
};

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm1(const Vec3& a) { return std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]); }

inline constexpr double pi = std::numbers::pi;

inline std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// Asymptotic constant of the order-zero model operator with Phi(x) = x/|x| in 3D.
inline constexpr double model_constant_nu = 4.0 / (3.0 * pi);

}  // namespace cusplab
