#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

#include "abundanza/errors.hpp"

namespace abundanza {

using Precision = mpfr_prec_t;

inline constexpr Precision kDefaultPrecision = 128;
inline constexpr Precision kMaxPrecision = 4096;

/// Verdict of a certified sign or comparison query.
enum class SignDecision { Negative, Zero, Positive, Ambiguous };

const char* to_string(SignDecision s);

/// Arbitrary-precision midpoint/radius ball with outward rounding.
///
/// The represented set is [midpoint - radius, midpoint + radius]. Every
/// operation returns a ball that contains the exact image of its input
/// balls: midpoints are computed with MPFR round-to-nearest, the rounding
/// error is absorbed into the radius, and propagated radii are rounded up.
/// Midpoint and radius are both dyadic, so endpoint queries (sign, floor,
/// containment) are exact integer comparisons, never themselves rounded.
class RealBall {
public:
    explicit RealBall(Precision prec = kDefaultPrecision);
    RealBall(const RealBall& other);
    RealBall(RealBall&& other) noexcept;
    RealBall& operator=(const RealBall& other);
    RealBall& operator=(RealBall&& other) noexcept;
    ~RealBall();

    /// Exact point balls (radius 0 when representable, else half-ulp).
    static RealBall exact_int(long v, Precision prec = kDefaultPrecision);
    static RealBall exact_uint(unsigned long v, Precision prec = kDefaultPrecision);
    static RealBall exact(const mpz_class& v, Precision prec = kDefaultPrecision);
    static RealBall exact(const mpq_class& v, Precision prec = kDefaultPrecision);
    static RealBall from_double(double v, Precision prec = kDefaultPrecision);
    /// Ball with explicit midpoint/radius given as doubles (both exact).
    static RealBall from_midpoint_radius(double mid, double rad,
                                         Precision prec = kDefaultPrecision);

    /// Euler--Mascheroni constant. MPFR evaluates it by a binary-splitting
    /// scheme of the Brent--McMillan family with a proven tail bound and
    /// guarantees correct rounding, so the returned radius (half an ulp of
    /// the midpoint) rigorously contains gamma. Checked in the test suite
    /// against 40 published digits.
    static RealBall euler_gamma(Precision prec = kDefaultPrecision);
    static RealBall pi(Precision prec = kDefaultPrecision);

    Precision precision() const { return mpfr_get_prec(mid_); }
    bool is_exact() const { return mpfr_zero_p(rad_); }

    double mid_double() const { return mpfr_get_d(mid_, MPFR_RNDN); }
    double rad_double() const { return mpfr_get_d(rad_, MPFR_RNDU); }

    /// Exact dyadic midpoint / radius as rationals.
    mpq_class mid_rational() const;
    mpq_class rad_rational() const;
    /// Requires is_exact(); the represented dyadic value.
    mpq_class to_exact_rational() const;

    /// Positive iff mid - rad > 0, Negative iff mid + rad < 0,
    /// Zero iff the ball is exactly {0}, Ambiguous otherwise.
    /// Endpoint comparisons are exact.
    SignDecision sign() const;

    bool contains_zero() const;
    bool contains(const mpq_class& q) const;
    bool contains(const mpz_class& z) const;
    bool overlaps(const RealBall& other) const;

    /// Floor valid for every point of the ball. Throws PrecisionError if
    /// the ball straddles an integer.
    mpz_class floor() const;

    /// Same value re-rounded at a (usually smaller) precision; the result
    /// still contains the input ball.
    RealBall rounded_to(Precision prec) const;

    RealBall operator-() const;

    friend RealBall operator+(const RealBall& a, const RealBall& b);
    friend RealBall operator-(const RealBall& a, const RealBall& b);
    friend RealBall operator*(const RealBall& a, const RealBall& b);
    friend RealBall operator/(const RealBall& a, const RealBall& b);

    RealBall& operator+=(const RealBall& b) { return *this = *this + b; }
    RealBall& operator-=(const RealBall& b) { return *this = *this - b; }
    RealBall& operator*=(const RealBall& b) { return *this = *this * b; }
    RealBall& operator/=(const RealBall& b) { return *this = *this / b; }

    friend RealBall abs(const RealBall& a);
    friend RealBall log(const RealBall& a);
    friend RealBall exp(const RealBall& a);
    friend RealBall sqrt(const RealBall& a);

    /// Integer power by repeated squaring (any sign of e; base may be any
    /// ball for e >= 0, must exclude zero for e < 0).
    RealBall pow_int(long e) const;

    /// Real power exp(e * log(base)); base must be certifiably positive.
    friend RealBall pow(const RealBall& base, const RealBall& e);

    /// "mid (+/- rad)" with the midpoint at `digits` significant digits and
    /// the radius rounded up to two digits; deterministic.
    std::string to_string(int digits = 15) const;

    /// Deterministic CSV fields. The printed radius is inflated by the
    /// midpoint's decimal truncation error, so the printed pair still
    /// contains the exact value.
    std::string csv_midpoint(int digits = 15) const;
    std::string csv_radius(int digits = 15) const;

private:
    mpfr_t mid_;
    mpfr_t rad_;  // fixed small precision, always rounded up

    friend struct RealBallOps;
};

/// sign(a - b) without building the difference's midpoint error: exact
/// endpoint comparison of the two balls.
SignDecision cmp(const RealBall& a, const RealBall& b);

inline SignDecision sign(const RealBall& b) { return b.sign(); }
inline mpz_class certified_floor(const RealBall& b) { return b.floor(); }

/// True iff a < b certified (cmp == Negative).
inline bool certified_lt(const RealBall& a, const RealBall& b) {
    return cmp(a, b) == SignDecision::Negative;
}

/// Doubling retry ladder: runs f(prec) for prec = start, 2*start, ...,
/// rethrowing the last PrecisionError once max is exceeded.
struct PrecisionLadder {
    Precision start = kDefaultPrecision;
    Precision max = kMaxPrecision;
};

template <typename F>
auto with_precision_ladder(const PrecisionLadder& ladder, F&& f) {
    for (Precision p = ladder.start;; p *= 2) {
        try {
            return f(p);
        } catch (const PrecisionError&) {
            if (p * 2 > ladder.max) throw;
        }
    }
}

}  // namespace abundanza
