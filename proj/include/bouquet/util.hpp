#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bouquet {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Largest exponent for which exp() is finite in double precision.
inline constexpr double kMaxExp = 709.0;

struct OverflowError : std::range_error {
    using std::range_error::range_error;
};

struct InvariantError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContourError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Neumaier-compensated sum of complex terms. Addition order is fixed by the
// caller, which keeps results bit-identical across thread counts.
class CompensatedComplexSum {
public:
    void add(Complex term) {
        addPart(re_, creRe_, term.real());
        addPart(im_, cimIm_, term.imag());
    }

    Complex value() const { return {re_ + creRe_, im_ + cimIm_}; }

private:
    static void addPart(double& s, double& c, double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x)) {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }

    double re_ = 0.0, im_ = 0.0;
    double creRe_ = 0.0, cimIm_ = 0.0;
};

// Wrap an angle into (-pi, pi].
inline double normalizeAngle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

// Shortest round-trip decimal representation.
inline std::string formatDouble(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hashHex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace bouquet
