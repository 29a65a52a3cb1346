#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abundanza/errors.hpp"
#include "abundanza/realball.hpp"

namespace abundanza {

/// Default memory budget for dense sigma tables, in entries (8 bytes each).
inline constexpr std::uint64_t kDefaultSieveBudget = 100'000'000;

/// Hard cap keeping every sigma value below 2^64 with a wide margin.
inline constexpr std::uint64_t kSigmaLimitCap = 1'000'000'000;

struct PrimePower {
    mpz_class prime;
    unsigned exponent = 1;
};

/// A positive integer as ordered (prime, exponent) pairs; the empty
/// sequence is n = 1. Primes are strictly increasing and checked with a
/// deterministic Miller-Rabin test on construction.
class Factorization {
public:
    Factorization() = default;
    explicit Factorization(std::vector<PrimePower> factors);

    /// Trial-division factorization for sieve-range integers.
    static Factorization of_u64(std::uint64_t n);

    const std::vector<PrimePower>& factors() const { return factors_; }
    bool is_one() const { return factors_.empty(); }
    std::size_t distinct_primes() const { return factors_.size(); }

    unsigned exponent_of(const mpz_class& p) const;

    /// Raises the exponent of p by one (inserting p if absent), keeping the
    /// ordering invariant. The prime is validated on first insertion.
    void bump(const mpz_class& p);

    mpz_class value() const;
    mpz_class largest_prime() const;  // 1 for the empty factorization

    /// "2^4 * 3^2 * 5 * 7"; "1" when empty.
    std::string to_string() const;

private:
    std::vector<PrimePower> factors_;
};

/// Deterministic primality. Uses the first twelve prime bases, valid for
/// all n < 3.317e24; inputs beyond that range raise DomainError (nothing
/// in this artifact produces them).
bool is_prime(const mpz_class& n);
bool is_prime_u64(std::uint64_t n);

/// All primes <= limit, increasing. ResourceError above max_limit.
std::vector<std::uint64_t> primes_up_to(std::uint64_t limit,
                                        std::uint64_t max_limit = kSigmaLimitCap);

/// Dense sigma table for 1..limit.
struct SigmaTable {
    std::uint64_t limit = 0;
    std::vector<std::uint64_t> sigma;  // index n in 1..limit; [0] unused

    std::uint64_t operator[](std::uint64_t n) const { return sigma[n]; }
};

/// Divisor-sum sieve over 1..limit, O(limit log limit) additions.
SigmaTable sigma_sieve(std::uint64_t limit,
                       std::uint64_t budget_entries = kDefaultSieveBudget);

/// Streams sigma over [lo, hi] in fixed-size segments without holding the
/// whole table: fn(seg_lo, values) where values[i] = sigma(seg_lo + i).
void for_each_sigma_segment(
    std::uint64_t lo, std::uint64_t hi, std::uint64_t segment_len,
    const std::function<void(std::uint64_t, std::span<const std::uint64_t>)>& fn);

/// One segment of the divisor-sum sieve: out[i] = sigma(seg_lo + i) for
/// seg_lo..seg_hi inclusive. Reuses out's capacity; safe to call from
/// several threads on disjoint outputs.
void sigma_segment(std::uint64_t seg_lo, std::uint64_t seg_hi,
                   std::vector<std::uint64_t>& out);

/// sigma(n) = prod (p^(e+1) - 1)/(p - 1) over the factorization.
mpz_class sigma_of_factorization(const Factorization& f);

/// Exact sigma for a single sieve-range integer (factor, then formula).
std::uint64_t sigma_u64(std::uint64_t n);

/// Exact reduced sigma(n)/n.
mpq_class abundancy(const Factorization& f);

/// Exact rational from "p/q", an integer, or a plain decimal literal.
mpq_class parse_rational(const std::string& s);

struct ValueAndLog {
    std::optional<mpz_class> value;
    RealBall log;
};

/// Exact product value (skippable for very large inputs) and a certified
/// ball for log n = sum e_i log p_i.
ValueAndLog value_and_log(const Factorization& f, Precision prec,
                          bool with_value = true);

}  // namespace abundanza
