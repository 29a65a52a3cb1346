#include "abundanza/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace abundanza {

namespace {

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e != 0) {
        if (e & 1ULL) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

// First thirteen prime bases: deterministic below 3.317e24
// (Sorenson-Webster), hence for every 64-bit integer.
constexpr std::uint64_t kMrBases[] = {2,  3,  5,  7,  11, 13, 17,
                                      19, 23, 29, 31, 37, 41};

bool miller_rabin_u64(std::uint64_t n) {
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1ULL) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : kMrBases) {
        if (a % n == 0) continue;
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

bool miller_rabin_mpz(const mpz_class& n) {
    mpz_class d = n - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    mpz_class nm1 = n - 1;
    for (std::uint64_t a : kMrBases) {
        mpz_class base(static_cast<unsigned long>(a));
        if (mpz_divisible_p(base.get_mpz_t(), n.get_mpz_t())) continue;
        mpz_class x;
        mpz_powm(x.get_mpz_t(), base.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
        if (x == 1 || x == nm1) continue;
        bool composite = true;
        for (unsigned long i = 1; i < s; ++i) {
            mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), 2, n.get_mpz_t());
            if (x == nm1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// 3.317e24, the validity bound of the twelve-base test.
const mpz_class& mr_validity_bound() {
    static const mpz_class bound("3317044064679887385961981");
    return bound;
}

}  // namespace

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL, 41ULL}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    return miller_rabin_u64(n);
}

bool is_prime(const mpz_class& n) {
    if (n < 2) return false;
    if (mpz_fits_ulong_p(n.get_mpz_t()))
        return is_prime_u64(mpz_get_ui(n.get_mpz_t()));
    if (n >= mr_validity_bound())
        throw DomainError(
            "primality check beyond the deterministic Miller-Rabin range: " +
            n.get_str());
    if (mpz_even_p(n.get_mpz_t())) return false;
    return miller_rabin_mpz(n);
}

Factorization::Factorization(std::vector<PrimePower> factors)
    : factors_(std::move(factors)) {
    const mpz_class* prev = nullptr;
    for (const auto& pp : factors_) {
        if (pp.exponent < 1)
            throw DomainError("factorization exponent must be >= 1");
        if (prev != nullptr && !(*prev < pp.prime))
            throw DomainError("factorization primes must strictly increase");
        if (!is_prime(pp.prime))
            throw DomainError("factorization entry is not prime: " +
                              pp.prime.get_str());
        prev = &pp.prime;
    }
}

Factorization Factorization::of_u64(std::uint64_t n) {
    if (n == 0) throw DomainError("cannot factor 0");
    Factorization f;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p != 0) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.factors_.push_back({mpz_class(static_cast<unsigned long>(p)), e});
    }
    if (n > 1)
        f.factors_.push_back({mpz_class(static_cast<unsigned long>(n)), 1});
    return f;
}

unsigned Factorization::exponent_of(const mpz_class& p) const {
    for (const auto& pp : factors_)
        if (pp.prime == p) return pp.exponent;
    return 0;
}

void Factorization::bump(const mpz_class& p) {
    auto it = std::lower_bound(
        factors_.begin(), factors_.end(), p,
        [](const PrimePower& pp, const mpz_class& q) { return pp.prime < q; });
    if (it != factors_.end() && it->prime == p) {
        ++it->exponent;
        return;
    }
    if (!is_prime(p))
        throw DomainError("bump with a non-prime: " + p.get_str());
    factors_.insert(it, PrimePower{p, 1});
}

mpz_class Factorization::value() const {
    mpz_class v = 1;
    mpz_class pw;
    for (const auto& pp : factors_) {
        mpz_pow_ui(pw.get_mpz_t(), pp.prime.get_mpz_t(), pp.exponent);
        v *= pw;
    }
    return v;
}

mpz_class Factorization::largest_prime() const {
    if (factors_.empty()) return 1;
    return factors_.back().prime;
}

std::string Factorization::to_string() const {
    if (factors_.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i != 0) s += " * ";
        s += factors_[i].prime.get_str();
        if (factors_[i].exponent != 1)
            s += "^" + std::to_string(factors_[i].exponent);
    }
    return s;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit,
                                        std::uint64_t max_limit) {
    if (limit < 2) throw DomainError("primes_up_to requires limit >= 2");
    if (limit > max_limit)
        throw ResourceError("primes_up_to limit " + std::to_string(limit) +
                            " exceeds the memory budget " +
                            std::to_string(max_limit));
    std::vector<std::uint8_t> composite(limit + 1, 0);
    for (std::uint64_t i = 2; i * i <= limit; ++i) {
        if (composite[i]) continue;
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
    }
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 2; i <= limit; ++i)
        if (!composite[i]) out.push_back(i);
    return out;
}

void sigma_segment(std::uint64_t seg_lo, std::uint64_t seg_hi,
                   std::vector<std::uint64_t>& out) {
    if (seg_lo < 1 || seg_lo > seg_hi) throw DomainError("bad sigma segment");
    out.assign(seg_hi - seg_lo + 1, 0);
    // Every divisor pair (d, m/d) with d <= sqrt(m) is met once: d runs
    // to sqrt(seg_hi) and multiples start no earlier than d*d.
    for (std::uint64_t d = 1; d * d <= seg_hi; ++d) {
        std::uint64_t m0 = std::max(seg_lo, d * d);
        m0 = ((m0 + d - 1) / d) * d;
        for (std::uint64_t m = m0; m <= seg_hi; m += d) {
            std::uint64_t q = m / d;
            out[m - seg_lo] += d;
            if (q != d) out[m - seg_lo] += q;
        }
    }
}

void for_each_sigma_segment(
    std::uint64_t lo, std::uint64_t hi, std::uint64_t segment_len,
    const std::function<void(std::uint64_t, std::span<const std::uint64_t>)>& fn) {
    if (lo < 1 || lo > hi) throw DomainError("bad sigma segment range");
    if (segment_len == 0) throw DomainError("segment length must be positive");
    std::vector<std::uint64_t> sig;
    for (std::uint64_t seg_lo = lo; seg_lo <= hi;) {
        std::uint64_t seg_hi = std::min(hi, seg_lo + segment_len - 1);
        sigma_segment(seg_lo, seg_hi, sig);
        fn(seg_lo, std::span<const std::uint64_t>(sig.data(), sig.size()));
        if (seg_hi == hi) break;
        seg_lo = seg_hi + 1;
    }
}

SigmaTable sigma_sieve(std::uint64_t limit, std::uint64_t budget_entries) {
    if (limit < 2) throw DomainError("sigma_sieve requires limit >= 2");
    if (limit > kSigmaLimitCap)
        throw DomainError("sigma_sieve limit above the 10^9 cap");
    if (limit + 1 > budget_entries)
        throw ResourceError("sigma_sieve limit " + std::to_string(limit) +
                            " exceeds the budget of " +
                            std::to_string(budget_entries) + " entries");
    SigmaTable t;
    t.limit = limit;
    t.sigma.assign(limit + 1, 0);
    for_each_sigma_segment(
        1, limit, std::min<std::uint64_t>(limit, 1 << 20),
        [&](std::uint64_t seg_lo, std::span<const std::uint64_t> vals) {
            std::copy(vals.begin(), vals.end(), t.sigma.begin() + seg_lo);
        });
    return t;
}

mpz_class sigma_of_factorization(const Factorization& f) {
    mpz_class s = 1;
    mpz_class pw, num;
    for (const auto& pp : f.factors()) {
        mpz_pow_ui(pw.get_mpz_t(), pp.prime.get_mpz_t(), pp.exponent + 1);
        num = pw - 1;
        mpz_class den = pp.prime - 1;
        mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        s *= num;
    }
    return s;
}

std::uint64_t sigma_u64(std::uint64_t n) {
    if (n == 0) throw DomainError("sigma_u64(0)");
    std::uint64_t s = 1;
    auto mul_term = [&s](std::uint64_t p, unsigned e) {
        std::uint64_t term = 1, pw = 1;
        for (unsigned i = 0; i < e; ++i) {
            pw *= p;
            term += pw;
        }
        s *= term;
    };
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p != 0) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        mul_term(p, e);
    }
    if (n > 1) mul_term(n, 1);
    return s;
}

mpq_class parse_rational(const std::string& s) {
    if (s.empty()) throw DomainError("empty rational literal");
    if (s.find('/') != std::string::npos) {
        mpq_class q;
        if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0 || sgn(q.get_den()) <= 0)
            throw DomainError("bad rational literal '" + s + "'");
        q.canonicalize();
        return q;
    }
    std::size_t dot = s.find('.');
    if (dot == std::string::npos) {
        mpz_class z;
        if (mpz_set_str(z.get_mpz_t(), s.c_str(), 10) != 0)
            throw DomainError("bad integer literal '" + s + "'");
        return mpq_class(z);
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    if (digits.empty() || digits == "-" || digits == "+")
        throw DomainError("bad decimal literal '" + s + "'");
    mpz_class num;
    if (mpz_set_str(num.get_mpz_t(), digits.c_str(), 10) != 0)
        throw DomainError("bad decimal literal '" + s + "'");
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, s.size() - dot - 1);
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

mpq_class abundancy(const Factorization& f) {
    mpq_class q(sigma_of_factorization(f), f.value());
    q.canonicalize();
    return q;
}

ValueAndLog value_and_log(const Factorization& f, Precision prec,
                          bool with_value) {
    ValueAndLog out{std::nullopt, RealBall::exact_int(0, prec)};
    for (const auto& pp : f.factors()) {
        RealBall lp = log(RealBall::exact(pp.prime, prec));
        out.log += lp * RealBall::exact_uint(pp.exponent, prec);
    }
    if (with_value) out.value = f.value();
    return out;
}

}  // namespace abundanza
