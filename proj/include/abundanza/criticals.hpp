#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "abundanza/arithmetic.hpp"
#include "abundanza/realball.hpp"

namespace abundanza {

/// One element of the critical set E: the value
/// F(p, k) = log(1 + 1/(p + p^2 + ... + p^k)) / log p with its provenance.
struct CriticalEpsilon {
    std::uint64_t p = 0;
    unsigned k = 0;
    RealBall value;
};

/// Certified ball for F(p, k); the geometric sum is exact.
RealBall critical_epsilon_value(std::uint64_t p, unsigned k,
                                Precision prec = kDefaultPrecision);
CriticalEpsilon critical_epsilon(std::uint64_t p, unsigned k,
                                 Precision prec = kDefaultPrecision);

/// Merges the per-prime decreasing generators E_p into the globally
/// decreasing stream E = {eps_1 > eps_2 > ...}. Primes are seeded lazily:
/// a prime enters the queue only while F(p, 1) cannot be certified below
/// the current front. Consecutive outputs are certified strictly
/// decreasing, escalating precision as needed; inseparable candidates at
/// max precision become a tie group (allow_ties) or a TieDetected error.
class EpsilonStream {
public:
    struct Options {
        PrecisionLadder ladder{};
        bool allow_ties = false;
    };

    EpsilonStream() : EpsilonStream(Options{}) {}
    explicit EpsilonStream(Options opts);

    /// Next tie group: one epsilon normally, two at a detected tie.
    std::vector<CriticalEpsilon> next_group();

    /// Next single epsilon; throws TieDetected when a group of two forms.
    CriticalEpsilon next();

private:
    struct Entry {
        double key;
        std::uint64_t p;
        unsigned k;
        RealBall value;
    };
    struct EntryLess {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.key < b.key;
        }
    };

    void ensure_seeded();
    Entry pop_entry();

    Options opts_;
    std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap_;
    std::vector<std::uint64_t> prime_pool_;
    std::size_t next_prime_idx_ = 0;
};

/// The `count` largest elements of E in strictly decreasing certified order.
std::vector<CriticalEpsilon> epsilon_stream(std::size_t count,
                                            PrecisionLadder ladder = {});

/// The unique maximizer n_eps of sigma(k)/k^(1+eps) for non-critical eps,
/// built from the closed-form exponents
/// a_eps(p) = floor((log(p^(1+eps) - 1) - log(p^eps - 1)) / log p) - 1.
/// The callback re-supplies eps at each rung of the retry ladder.
Factorization n_for_epsilon(const std::function<RealBall(Precision)>& eps_at,
                            PrecisionLadder ladder = {});
Factorization n_for_epsilon(const mpq_class& eps, PrecisionLadder ladder = {});

/// One colossally abundant number: n_i with the epsilon interval it is the
/// maximizer on, the quotient from its predecessor, and running exact data.
struct CaRecord {
    std::size_t index = 0;  // 1-based
    Factorization n;
    mpz_class value;
    mpz_class sigma;
    RealBall log_n;
    CriticalEpsilon eps_hi;  // crossing that produced n_i (interval top)
    CriticalEpsilon eps_lo;  // next crossing (interval bottom)
    Factorization quotient;  // one prime, or two distinct primes at a tie
    bool tie = false;
};

/// Incremental CA generator: one epsilon crossing per step, O(1) big-int
/// work; value, sigma and log n are maintained exactly alongside.
class CaEnumerator {
public:
    struct Options {
        PrecisionLadder ladder{};
        bool allow_ties = false;
    };

    CaEnumerator() : CaEnumerator(Options{}) {}
    explicit CaEnumerator(Options opts);

    CaRecord next();

    /// Applies one crossing group directly; exposed so the (conjecturally
    /// unreachable) tie path stays testable.
    CaRecord step_with_group(std::vector<CriticalEpsilon> group,
                             std::vector<CriticalEpsilon> lookahead);

private:
    std::vector<CriticalEpsilon> take_group();
    void apply(const CriticalEpsilon& eps);

    Options opts_;
    EpsilonStream stream_;
    Factorization current_;
    mpz_class value_{1};
    mpz_class sigma_{1};
    std::vector<std::pair<std::uint64_t, mpz_class>> sigma_parts_;  // p -> sigma(p^e)
    RealBall log_n_;
    std::size_t index_ = 0;
    bool have_pending_ = false;
    std::vector<CriticalEpsilon> pending_;
};

/// The first `count` CA numbers n_1 .. n_count.
std::vector<CaRecord> ca_enumerate(std::size_t count,
                                   CaEnumerator::Options opts = CaEnumerator::Options());

/// All superabundant numbers <= limit by a dense sigma scan with exact
/// 128-bit cross-multiplied abundancy comparisons.
std::vector<std::uint64_t> sa_enumerate(
    std::uint64_t limit, std::uint64_t budget_entries = kDefaultSieveBudget);

/// Convergence diagnostics along a CA run: log n_{i-1} / log n_i and the
/// largest prime factor P(n_i), for i >= 2.
struct CaDiagnostic {
    std::size_t index = 0;
    RealBall log_ratio;
    mpz_class largest_prime;
};

std::vector<CaDiagnostic> ca_diagnostics(std::span<const CaRecord> records);

}  // namespace abundanza
