#include "abundanza/realball.hpp"

#include <cassert>
#include <cstdio>
#include <mutex>
#include <vector>

namespace abundanza {

namespace {

constexpr Precision kRadiusPrec = 32;

// Scratch mpfr value with scoped lifetime.
struct Scratch {
    mpfr_t v;
    explicit Scratch(Precision p) { mpfr_init2(v, p); }
    ~Scratch() { mpfr_clear(v); }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
};

std::mutex& const_mutex() {
    static std::mutex m;
    return m;
}

// Exact rational view of a dyadic mpfr value.
mpq_class dyadic_to_mpq(const mpfr_t x) {
    if (mpfr_zero_p(x)) return mpq_class(0);
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
    mpq_class q(m);
    if (e >= 0) {
        mpz_mul_2exp(mpq_numref(q.get_mpq_t()), mpq_numref(q.get_mpq_t()),
                     static_cast<mp_bitcnt_t>(e));
    } else {
        mpz_mul_2exp(mpq_denref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()),
                     static_cast<mp_bitcnt_t>(-e));
    }
    q.canonicalize();
    return q;
}

}  // namespace

// Internal helpers that need access to mid_/rad_.
struct RealBallOps {
    // Absorbs the rounding error of a round-to-nearest midpoint operation:
    // |error| <= 2^(exp - prec - 1) when the ternary flag reports inexact.
    static void add_half_ulp(RealBall& r, int ternary) {
        if (ternary == 0) return;
        if (mpfr_zero_p(r.mid_) || !mpfr_number_p(r.mid_))
            throw Error("ball midpoint left the representable range");
        mpfr_exp_t e = mpfr_get_exp(r.mid_);
        Precision p = mpfr_get_prec(r.mid_);
        Scratch t(kRadiusPrec);
        mpfr_set_ui_2exp(t.v, 1, e - p - 1, MPFR_RNDU);
        mpfr_add(r.rad_, r.rad_, t.v, MPFR_RNDU);
    }

    static mpfr_ptr mid(RealBall& b) { return b.mid_; }
    static mpfr_srcptr mid(const RealBall& b) { return b.mid_; }
    static mpfr_ptr rad(RealBall& b) { return b.rad_; }
    static mpfr_srcptr rad(const RealBall& b) { return b.rad_; }
};

using Ops = RealBallOps;

const char* to_string(SignDecision s) {
    switch (s) {
        case SignDecision::Negative: return "negative";
        case SignDecision::Zero: return "zero";
        case SignDecision::Positive: return "positive";
        case SignDecision::Ambiguous: return "ambiguous";
    }
    return "?";
}

RealBall::RealBall(Precision prec) {
    if (prec < MPFR_PREC_MIN) prec = MPFR_PREC_MIN;
    mpfr_init2(mid_, prec);
    mpfr_init2(rad_, kRadiusPrec);
    mpfr_set_zero(mid_, 1);
    mpfr_set_zero(rad_, 1);
}

RealBall::RealBall(const RealBall& other) {
    mpfr_init2(mid_, mpfr_get_prec(other.mid_));
    mpfr_init2(rad_, kRadiusPrec);
    mpfr_set(mid_, other.mid_, MPFR_RNDN);
    mpfr_set(rad_, other.rad_, MPFR_RNDU);
}

RealBall::RealBall(RealBall&& other) noexcept {
    mpfr_init2(mid_, MPFR_PREC_MIN);
    mpfr_init2(rad_, kRadiusPrec);
    mpfr_swap(mid_, other.mid_);
    mpfr_swap(rad_, other.rad_);
}

RealBall& RealBall::operator=(const RealBall& other) {
    if (this != &other) {
        mpfr_set_prec(mid_, mpfr_get_prec(other.mid_));
        mpfr_set(mid_, other.mid_, MPFR_RNDN);
        mpfr_set(rad_, other.rad_, MPFR_RNDU);
    }
    return *this;
}

RealBall& RealBall::operator=(RealBall&& other) noexcept {
    mpfr_swap(mid_, other.mid_);
    mpfr_swap(rad_, other.rad_);
    return *this;
}

RealBall::~RealBall() {
    mpfr_clear(mid_);
    mpfr_clear(rad_);
}

RealBall RealBall::exact_int(long v, Precision prec) {
    RealBall r(prec);
    int t = mpfr_set_si(r.mid_, v, MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::exact_uint(unsigned long v, Precision prec) {
    RealBall r(prec);
    int t = mpfr_set_ui(r.mid_, v, MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::exact(const mpz_class& v, Precision prec) {
    RealBall r(prec);
    int t = mpfr_set_z(r.mid_, v.get_mpz_t(), MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::exact(const mpq_class& v, Precision prec) {
    RealBall r(prec);
    int t = mpfr_set_q(r.mid_, v.get_mpq_t(), MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::from_double(double v, Precision prec) {
    RealBall r(prec);
    int t = mpfr_set_d(r.mid_, v, MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::from_midpoint_radius(double mid, double rad, Precision prec) {
    if (rad < 0) throw DomainError("ball radius must be non-negative");
    RealBall r(prec);
    int t = mpfr_set_d(r.mid_, mid, MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    Scratch s(kRadiusPrec);
    mpfr_set_d(s.v, rad, MPFR_RNDU);
    mpfr_add(r.rad_, r.rad_, s.v, MPFR_RNDU);
    return r;
}

RealBall RealBall::euler_gamma(Precision prec) {
    std::lock_guard<std::mutex> lock(const_mutex());
    RealBall r(prec);
    int t = mpfr_const_euler(Ops::mid(r), MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::pi(Precision prec) {
    std::lock_guard<std::mutex> lock(const_mutex());
    RealBall r(prec);
    int t = mpfr_const_pi(Ops::mid(r), MPFR_RNDN);
    Ops::add_half_ulp(r, t);
    return r;
}

mpq_class RealBall::mid_rational() const { return dyadic_to_mpq(mid_); }
mpq_class RealBall::rad_rational() const { return dyadic_to_mpq(rad_); }

mpq_class RealBall::to_exact_rational() const {
    if (!is_exact()) throw Error("ball is not exact");
    return mid_rational();
}

SignDecision RealBall::sign() const {
    if (mpfr_zero_p(rad_)) {
        int s = mpfr_sgn(mid_);
        if (s > 0) return SignDecision::Positive;
        if (s < 0) return SignDecision::Negative;
        return SignDecision::Zero;
    }
    // mid - rad > 0  <=>  mid > 0 and |mid| > rad; exact comparison.
    int s = mpfr_sgn(mid_);
    if (s > 0 && mpfr_cmpabs(mid_, rad_) > 0) return SignDecision::Positive;
    if (s < 0 && mpfr_cmpabs(mid_, rad_) > 0) return SignDecision::Negative;
    return SignDecision::Ambiguous;
}

bool RealBall::contains_zero() const {
    return mpfr_cmpabs(mid_, rad_) <= 0;
}

bool RealBall::contains(const mpq_class& q) const {
    mpq_class d = q - mid_rational();
    if (sgn(d) < 0) d = -d;
    return d <= rad_rational();
}

bool RealBall::contains(const mpz_class& z) const {
    return contains(mpq_class(z));
}

bool RealBall::overlaps(const RealBall& other) const {
    mpq_class d = mid_rational() - other.mid_rational();
    if (sgn(d) < 0) d = -d;
    return d <= rad_rational() + other.rad_rational();
}

mpz_class RealBall::floor() const {
    mpq_class lo = mid_rational() - rad_rational();
    mpq_class hi = mid_rational() + rad_rational();
    mpz_class flo, fhi;
    mpz_fdiv_q(flo.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
    mpz_fdiv_q(fhi.get_mpz_t(), hi.get_num_mpz_t(), hi.get_den_mpz_t());
    if (flo != fhi)
        throw PrecisionError("certified_floor: ball straddles an integer: " +
                             to_string());
    return flo;
}

RealBall RealBall::rounded_to(Precision prec) const {
    RealBall r(prec);
    int t = mpfr_set(Ops::mid(r), mid_, MPFR_RNDN);
    mpfr_set(Ops::rad(r), rad_, MPFR_RNDU);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::operator-() const {
    RealBall r(*this);
    mpfr_neg(r.mid_, r.mid_, MPFR_RNDN);  // exact
    return r;
}

RealBall operator+(const RealBall& a, const RealBall& b) {
    RealBall r(std::max(a.precision(), b.precision()));
    int t = mpfr_add(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    mpfr_add(r.rad_, a.rad_, b.rad_, MPFR_RNDU);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall operator-(const RealBall& a, const RealBall& b) {
    RealBall r(std::max(a.precision(), b.precision()));
    int t = mpfr_sub(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    mpfr_add(r.rad_, a.rad_, b.rad_, MPFR_RNDU);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall operator*(const RealBall& a, const RealBall& b) {
    RealBall r(std::max(a.precision(), b.precision()));
    int t = mpfr_mul(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    // |a.mid|*b.rad + |b.mid|*a.rad + a.rad*b.rad, rounded up throughout
    Scratch u(kRadiusPrec);
    mpfr_mul(u.v, a.mid_, b.rad_, MPFR_RNDA);
    mpfr_abs(u.v, u.v, MPFR_RNDU);
    mpfr_add(r.rad_, r.rad_, u.v, MPFR_RNDU);
    mpfr_mul(u.v, b.mid_, a.rad_, MPFR_RNDA);
    mpfr_abs(u.v, u.v, MPFR_RNDU);
    mpfr_add(r.rad_, r.rad_, u.v, MPFR_RNDU);
    mpfr_mul(u.v, a.rad_, b.rad_, MPFR_RNDU);
    mpfr_add(r.rad_, r.rad_, u.v, MPFR_RNDU);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall operator/(const RealBall& a, const RealBall& b) {
    if (mpfr_zero_p(Ops::mid(b)) && mpfr_zero_p(Ops::rad(b)))
        throw DomainError("division by exact zero ball");
    if (mpfr_cmpabs(Ops::mid(b), Ops::rad(b)) <= 0)
        throw PrecisionError("division by a ball containing zero: " +
                             b.to_string());
    RealBall r(std::max(a.precision(), b.precision()));
    int t = mpfr_div(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    // |x/y - xm/ym| <= (xr|ym| + |xm|yr) / (|ym| (|ym| - yr))
    Scratch num(kRadiusPrec), den(kRadiusPrec), u(kRadiusPrec);
    mpfr_mul(num.v, a.rad_, b.mid_, MPFR_RNDA);
    mpfr_abs(num.v, num.v, MPFR_RNDU);
    mpfr_mul(u.v, a.mid_, b.rad_, MPFR_RNDA);
    mpfr_abs(u.v, u.v, MPFR_RNDU);
    mpfr_add(num.v, num.v, u.v, MPFR_RNDU);
    mpfr_abs(den.v, b.mid_, MPFR_RNDD);
    mpfr_sub(u.v, den.v, b.rad_, MPFR_RNDD);
    if (!(mpfr_sgn(u.v) > 0))
        throw PrecisionError("division by a ball too close to zero: " +
                             b.to_string());
    mpfr_mul(den.v, den.v, u.v, MPFR_RNDD);
    mpfr_div(num.v, num.v, den.v, MPFR_RNDU);
    mpfr_add(r.rad_, r.rad_, num.v, MPFR_RNDU);
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall abs(const RealBall& a) {
    RealBall r(a);
    mpfr_abs(Ops::mid(r), Ops::mid(r), MPFR_RNDN);  // exact
    return r;
}

RealBall log(const RealBall& a) {
    int s = mpfr_sgn(Ops::mid(a));
    bool lo_positive = s > 0 && mpfr_cmpabs(Ops::mid(a), Ops::rad(a)) > 0;
    if (!lo_positive) {
        bool entirely_nonpositive =
            (s < 0 && mpfr_cmpabs(Ops::mid(a), Ops::rad(a)) >= 0) ||
            (s <= 0 && mpfr_zero_p(Ops::rad(a)));
        if (entirely_nonpositive)
            throw DomainError("log of a non-positive ball: " + a.to_string());
        throw PrecisionError("log of a ball touching zero: " + a.to_string());
    }
    RealBall r(a.precision());
    int t = mpfr_log(Ops::mid(r), Ops::mid(a), MPFR_RNDN);
    if (!mpfr_zero_p(Ops::rad(a))) {
        // log(m/(m-r)) <= r/(m-r) bounds the deviation on both sides
        Scratch lo(std::max<Precision>(a.precision(), 64)), u(kRadiusPrec);
        mpfr_sub(lo.v, Ops::mid(a), Ops::rad(a), MPFR_RNDD);
        if (!(mpfr_sgn(lo.v) > 0))
            throw PrecisionError("log of a ball too close to zero: " +
                                 a.to_string());
        mpfr_div(u.v, Ops::rad(a), lo.v, MPFR_RNDU);
        mpfr_add(Ops::rad(r), Ops::rad(r), u.v, MPFR_RNDU);
    }
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall exp(const RealBall& a) {
    RealBall r(a.precision());
    int t = mpfr_exp(Ops::mid(r), Ops::mid(a), MPFR_RNDN);
    if (!mpfr_number_p(Ops::mid(r)))
        throw Error("exp overflow in ball arithmetic");
    if (!mpfr_zero_p(Ops::rad(a))) {
        // |exp(x) - exp(m)| <= exp(m) * (exp(r) - 1)
        Scratch eu(kRadiusPrec), em(kRadiusPrec);
        mpfr_exp(eu.v, Ops::mid(a), MPFR_RNDU);
        mpfr_expm1(em.v, Ops::rad(a), MPFR_RNDU);
        mpfr_mul(eu.v, eu.v, em.v, MPFR_RNDU);
        mpfr_add(Ops::rad(r), Ops::rad(r), eu.v, MPFR_RNDU);
    }
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall sqrt(const RealBall& a) {
    int s = mpfr_sgn(Ops::mid(a));
    bool lo_nonnegative =
        (s > 0 && mpfr_cmpabs(Ops::mid(a), Ops::rad(a)) >= 0) ||
        (s == 0 && mpfr_zero_p(Ops::rad(a)));
    if (!lo_nonnegative) {
        bool entirely_negative = s < 0 && mpfr_cmpabs(Ops::mid(a), Ops::rad(a)) > 0;
        if (entirely_negative)
            throw DomainError("sqrt of a negative ball: " + a.to_string());
        throw PrecisionError("sqrt of a ball straddling zero: " + a.to_string());
    }
    RealBall r(a.precision());
    int t = mpfr_sqrt(Ops::mid(r), Ops::mid(a), MPFR_RNDN);
    if (!mpfr_zero_p(Ops::rad(a))) {
        // sqrt(m) - sqrt(m - r) <= r / sqrt(m); m > 0 here since m >= r > 0
        Scratch sd(kRadiusPrec), u(kRadiusPrec);
        mpfr_sqrt(sd.v, Ops::mid(a), MPFR_RNDD);
        mpfr_div(u.v, Ops::rad(a), sd.v, MPFR_RNDU);
        mpfr_add(Ops::rad(r), Ops::rad(r), u.v, MPFR_RNDU);
    }
    Ops::add_half_ulp(r, t);
    return r;
}

RealBall RealBall::pow_int(long e) const {
    if (e == 0) return exact_int(1, precision());
    if (e < 0) return exact_int(1, precision()) / pow_int(-e);
    RealBall acc = exact_int(1, precision());
    RealBall base(*this);
    unsigned long k = static_cast<unsigned long>(e);
    while (k != 0) {
        if (k & 1UL) acc = acc * base;
        k >>= 1;
        if (k != 0) base = base * base;
    }
    return acc;
}

RealBall pow(const RealBall& base, const RealBall& e) {
    return exp(e * log(base));
}

std::string RealBall::to_string(int digits) const {
    char mid_buf[128];
    mpfr_snprintf(mid_buf, sizeof mid_buf, "%.*Rg", digits, mid_);
    if (mpfr_zero_p(rad_)) return std::string(mid_buf);
    char rad_buf[64];
    mpfr_snprintf(rad_buf, sizeof rad_buf, "%.1RUe", rad_);
    return std::string(mid_buf) + " (+/- " + rad_buf + ")";
}

std::string RealBall::csv_midpoint(int digits) const {
    char buf[128];
    mpfr_snprintf(buf, sizeof buf, "%.*Rg", digits, mid_);
    return std::string(buf);
}

std::string RealBall::csv_radius(int digits) const {
    // rad + |mid| * 10^(1 - digits) covers the midpoint truncation.
    Scratch r(kRadiusPrec), t(kRadiusPrec);
    mpfr_set(r.v, rad_, MPFR_RNDU);
    if (!mpfr_zero_p(mid_)) {
        mpfr_abs(t.v, mid_, MPFR_RNDU);
        Scratch e(kRadiusPrec);
        mpfr_set_si(e.v, 1 - digits, MPFR_RNDN);
        mpfr_exp10(e.v, e.v, MPFR_RNDU);
        mpfr_mul(t.v, t.v, e.v, MPFR_RNDU);
        mpfr_add(r.v, r.v, t.v, MPFR_RNDU);
    }
    char buf[64];
    mpfr_snprintf(buf, sizeof buf, "%.1RUe", r.v);
    return std::string(buf);
}

SignDecision cmp(const RealBall& a, const RealBall& b) {
    // Exact endpoint comparison through the dyadic rationals.
    mpq_class d = a.mid_rational() - b.mid_rational();
    mpq_class rs = a.rad_rational() + b.rad_rational();
    if (d > rs) return SignDecision::Positive;
    mpq_class nd = -d;
    if (nd > rs) return SignDecision::Negative;
    if (sgn(d) == 0 && sgn(rs) == 0) return SignDecision::Zero;
    return SignDecision::Ambiguous;
}

}  // namespace abundanza
