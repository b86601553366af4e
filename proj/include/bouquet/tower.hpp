#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "bouquet/util.hpp"

namespace bouquet {

// Nonnegative magnitude stored as exp^level(x). Orbit moduli and max-modulus
// iterates outgrow double (and double-of-log, and so on) within a few steps of
// iterating an exponential sum, so magnitudes carry an explicit stack of exps.
//
// Canonical form: level == 0 holds any x in [0, kPromote); level >= 1 requires
// x in (kDemote, kPromote). Multiplying by a moderate factor at level >= 2 is
// a no-op because the factor's log is below one ulp of the stored exponent;
// comparisons are exact in the stored representation.
class TowerReal {
public:
    TowerReal() = default;

    static TowerReal fromValue(double v) {
        if (!(v >= 0.0)) throw InvariantError("TowerReal: negative or NaN value");
        return normalized(0, v);
    }

    // Value e^{logV}; logV may be any finite double.
    static TowerReal fromLog(double logV) {
        if (std::isnan(logV)) throw InvariantError("TowerReal: NaN log");
        if (logV == -std::numeric_limits<double>::infinity()) return normalized(0, 0.0);
        if (logV < kDemote) return normalized(0, std::exp(logV));
        return normalized(1, logV);
    }

    int level() const { return level_; }
    double mantissa() const { return x_; }

    bool isZero() const { return level_ == 0 && x_ == 0.0; }

    // Natural log; value must be positive. The result of a log may carry a
    // negative level-0 mantissa (log of a value below 1); comparisons and
    // display still work on such results.
    TowerReal log() const {
        if (isZero()) throw InvariantError("TowerReal: log of zero");
        if (level_ == 0) {
            if (x_ < 0.0) throw InvariantError("TowerReal: log of negative");
            return normalized(0, std::log(x_));
        }
        return normalized(level_ - 1, x_);
    }

    TowerReal exp() const { return normalized(level_ + 1, x_); }

    // Multiply by a positive double. Exact at level 0, shifts the exponent at
    // level 1, and is a documented no-op at level >= 2 (below representable
    // precision of the stored exponent).
    TowerReal scaled(double c) const {
        if (!(c > 0.0)) throw InvariantError("TowerReal: nonpositive scale");
        if (level_ == 0) {
            if (x_ == 0.0) return *this;
            const double lg = std::log(x_) + std::log(c);
            return fromLog(lg);
        }
        if (level_ == 1) return fromLog(x_ + std::log(c));
        return *this;
    }

    double toDouble() const {
        if (level_ == 0) return x_;
        if (level_ == 1 && x_ <= kMaxExp) return std::exp(x_);
        return std::numeric_limits<double>::infinity();
    }

    // log(value) as a double, +inf when even the log is out of double range.
    double logToDouble() const {
        if (level_ == 0) return x_ > 0.0 ? std::log(x_) : -std::numeric_limits<double>::infinity();
        if (level_ == 1) return x_;
        if (level_ == 2 && x_ <= kMaxExp) return std::exp(x_);
        return std::numeric_limits<double>::infinity();
    }

    friend int compare(const TowerReal& a, const TowerReal& b) {
        if (a.level_ == b.level_) return cmpDouble(a.x_, b.x_);
        const TowerReal& hi = a.level_ > b.level_ ? a : b;
        const TowerReal& lo = a.level_ > b.level_ ? b : a;
        // Bring the lower-level operand to the higher level by repeated logs.
        double y = lo.x_;
        for (int i = 0; i < hi.level_ - lo.level_; ++i) {
            if (y <= 0.0) {
                y = -std::numeric_limits<double>::infinity();
                break;
            }
            y = std::log(y);
        }
        const int c = cmpDouble(y, hi.x_);
        return a.level_ > b.level_ ? -c : c;
    }

    friend bool operator<(const TowerReal& a, const TowerReal& b) { return compare(a, b) < 0; }
    friend bool operator>(const TowerReal& a, const TowerReal& b) { return compare(a, b) > 0; }
    friend bool operator<=(const TowerReal& a, const TowerReal& b) { return compare(a, b) <= 0; }
    friend bool operator>=(const TowerReal& a, const TowerReal& b) { return compare(a, b) >= 0; }
    friend bool operator==(const TowerReal& a, const TowerReal& b) { return compare(a, b) == 0; }

    std::string str() const {
        if (level_ == 0) return formatDouble(x_);
        std::string s = formatDouble(x_);
        for (int i = 0; i < level_; ++i) s = "exp(" + s + ")";
        return s;
    }

    friend std::ostream& operator<<(std::ostream& os, const TowerReal& t) { return os << t.str(); }

private:
    // exp(kDemote) is still comfortably finite; log(kPromote) > kDemote keeps
    // the normalization loop from oscillating.
    static constexpr double kDemote = 700.0;
    static constexpr double kPromote = 1e304;

    static int cmpDouble(double a, double b) { return a < b ? -1 : (a > b ? 1 : 0); }

    static TowerReal normalized(int level, double x) {
        while (level >= 1 && x <= kDemote) {
            x = std::exp(x);
            --level;
        }
        while (x >= kPromote) {
            x = std::log(x);
            ++level;
        }
        TowerReal t;
        t.level_ = level;
        t.x_ = x;
        return t;
    }

    int level_ = 0;
    double x_ = 0.0;
};

}  // namespace bouquet
