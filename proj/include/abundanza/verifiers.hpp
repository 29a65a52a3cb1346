#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abundanza/arithmetic.hpp"
#include "abundanza/ha.hpp"
#include "abundanza/realball.hpp"

namespace abundanza {

// The RH-false regime admits a complementary upper bound on the deficit
// with non-effective constants; having no computable constants, it is not
// represented by any check here.

/// One integer's inequality audit.
struct VerificationRecord {
    std::uint64_t n = 0;
    mpz_class sigma;
    RealBall r0;        // e^gamma n log log n - sigma(n)
    RealBall gronwall;  // sigma(n) / (n log log n)
    std::optional<RealBall> l0;
    std::vector<std::pair<std::string, SignDecision>> verdicts;
};

/// G(n) = sigma(n)/(n log log n); n >= 3.
RealBall gronwall(std::uint64_t n, Precision prec = kDefaultPrecision);

/// R_0(n), the unweighted Robin deficit; n >= 2.
RealBall robin_deficit(std::uint64_t n, Precision prec = kDefaultPrecision);

/// Robin's unconditional lower-bound constant. The sharp supremum of
/// (sigma(n)/n - e^gamma log log n) log log n over n >= 3 is 0.64821364...,
/// attained at n = 12, so the bound needs a constant above it; 0.6483 is
/// the classical rounding. (0.6482 fails at exactly n = 12; see the tests.)
inline const mpq_class kRobinLowerConstant{6483, 10000};

/// Certified sign of R_0(n) + c n / log log n (positive for all n >= 3
/// with the default constant); retries internally up to max_prec and
/// throws PrecisionError if still ambiguous.
SignDecision robin_lower_bound_check(std::uint64_t n,
                                     Precision prec = kDefaultPrecision,
                                     Precision max_prec = kMaxPrecision,
                                     const mpq_class& c = kRobinLowerConstant);

/// Exact harmonic number as a rational; n <= 10^4.
mpq_class harmonic_exact(std::uint64_t n);

/// h_n as a certified ball: exact rational route below 10^4, running ball
/// summation above (O(n)).
RealBall harmonic(std::uint64_t n, Precision prec = kDefaultPrecision);

/// L_0(n) = h_n + exp(h_n) log(h_n) - sigma(n).
RealBall lagarias_value(std::uint64_t n, Precision prec = kDefaultPrecision);

/// Certified sign of L_0(n); n >= 2.
SignDecision lagarias_check(std::uint64_t n,
                            Precision prec = kDefaultPrecision,
                            Precision max_prec = kMaxPrecision);

/// Signs of (L_0 - R_0 - h_n, R_0 + 7n/log n - L_0); both non-negative for
/// n > 20 by the Lagarias lemmas.
std::pair<SignDecision, SignDecision> lagarias_sandwich(
    std::uint64_t n, Precision prec = kDefaultPrecision,
    Precision max_prec = kMaxPrecision);

/// L_tau(n) = L_0(n) tau(n) through the same weight family.
RealBall lagarias_weighted(std::uint64_t n, const Weight& w,
                           Precision prec = kDefaultPrecision);

struct ScanOptions {
    PrecisionLadder ladder{};
    std::uint64_t budget_entries = kDefaultSieveBudget;
    unsigned threads = 0;
    /// Relative margin under which the double pre-filter defers to balls;
    /// 1.0 sends every decision through certified arithmetic.
    double rel_margin = 1e-6;
    /// Violation records, streamed in increasing n.
    std::function<void(const VerificationRecord&)> on_record;
    /// Called as the certified contiguous prefix advances (gap-free).
    std::function<void(std::uint64_t)> on_frontier;
};

struct ScanResult {
    std::vector<std::uint64_t> violations;
    std::uint64_t last_certified = 0;
};

/// All n in [lo, hi] with sigma(n) >= e^gamma n log log n. Double
/// pre-filter; relative margins below 1e-6 are re-decided by balls.
ScanResult robin_scan(std::uint64_t lo, std::uint64_t hi,
                      const ScanOptions& opts = {});

/// n in [lo, hi] violating Robin's unconditional lower bound (7);
/// expected empty for lo >= 3.
ScanResult robin_lower_scan(std::uint64_t lo, std::uint64_t hi,
                            const ScanOptions& opts = {});

/// n in [lo, hi] with L_0(n) <= 0; expected empty for lo >= 2.
ScanResult lagarias_scan(std::uint64_t lo, std::uint64_t hi,
                         const ScanOptions& opts = {});

/// n in [lo, hi] failing either side of the sandwich (9); lo > 20.
ScanResult sandwich_scan(std::uint64_t lo, std::uint64_t hi,
                         const ScanOptions& opts = {});

void write_record_csv_header(std::ostream& out);
void write_record_csv(std::ostream& out, const VerificationRecord& rec);

/// Frontier file: a single line "last_certified=<n>".
std::optional<std::uint64_t> read_frontier(const std::string& path);
void write_frontier(const std::string& path, std::uint64_t last_certified);

}  // namespace abundanza
