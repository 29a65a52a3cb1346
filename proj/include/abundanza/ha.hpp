#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "abundanza/arithmetic.hpp"
#include "abundanza/envelope.hpp"
#include "abundanza/realball.hpp"

namespace abundanza {

/// Weight family tau(n) = (log n)^s with exact rational exponent; s = 0
/// gives the plain Robin deficit, s = 1 the Example 2/3 weight.
struct Weight {
    mpq_class s;

    static Weight log_power(mpq_class exponent) {
        return Weight{std::move(exponent)};
    }

    bool is_integer() const { return s.get_den() == 1; }

    /// Smallest admissible n: integer exponents work from n = 2, real
    /// exponents are kept away from it.
    std::uint64_t min_n() const { return is_integer() ? 2 : 3; }

    /// tau as a ball, given log n.
    RealBall tau_from_log(const RealBall& log_n, Precision prec) const;

    double tau_double(double log_n) const;
};

/// R_s(n) = (e^gamma n log log n - sigma(n)) (log n)^s, certified.
RealBall r_weighted(std::uint64_t n, const Weight& w,
                    Precision prec = kDefaultPrecision);
RealBall r_weighted(const Factorization& f, const Weight& w,
                    Precision prec = kDefaultPrecision);
/// Core evaluation from exact parts (n, sigma(n), a ball for log n).
RealBall r_weighted_parts(const mpz_class& n, const mpz_class& sigma,
                          const RealBall& log_n, const Weight& w,
                          Precision prec);

/// T(n) = (e^gamma log log n - sigma(n)/n) sqrt(log n), certified; n >= 3.
RealBall t_statistic(std::uint64_t n, Precision prec = kDefaultPrecision);
RealBall t_statistic(const Factorization& f, Precision prec = kDefaultPrecision);
RealBall t_statistic_parts(const mpq_class& abundancy, const RealBall& log_n,
                           Precision prec);

/// (c1, c2) = e^gamma (2 sqrt 2 -+ (4 + gamma - log 4 pi)); approx
/// (1.3932, 1.5578).
std::pair<RealBall, RealBall> ramanujan_constants(
    Precision prec = kDefaultPrecision);

struct HaOptions {
    PrecisionLadder ladder{};
    std::uint64_t budget_entries = kDefaultSieveBudget;
    unsigned threads = 0;  // 0 = hardware concurrency
    /// Re-walk every point against the final hull chords (certified at the
    /// margins); costs one extra pass.
    bool dominance_sweep = true;
    /// Relative margin under which hull orientations defer to balls; 1.0
    /// routes every orientation through certified arithmetic.
    double rel_margin = 1e-6;
};

struct HaReport {
    std::uint64_t lo = 0, hi = 0;
    mpq_class s;
    std::vector<std::uint64_t> ha_numbers;
    std::vector<RealBall> r_values;  // R_s at each HA number
    std::vector<RealBall> slopes;    // one per consecutive pair
    std::vector<SignDecision> slope_signs;
    std::ptrdiff_t sign_split = -1;  // first positive slope, -1 when none
    std::vector<StreamingLowerHull::CollinearEvent> collinear;
};

/// HA numbers of R_s over n = lo..hi: streams (n, R_s(n)) through the
/// lower hull (double filter, ball certification at the margins), then
/// certifies slope signs and monotonicity.
HaReport ha_numbers(std::uint64_t lo, std::uint64_t hi, const mpq_class& s,
                    const HaOptions& opts = {});

struct FigureData {
    std::vector<std::pair<std::uint64_t, RealBall>> points;
    HaReport report;
};

/// Every (n, R_s(n)) plus the hull: the Figure 1 dataset.
FigureData figure_data(std::uint64_t lo, std::uint64_t hi, const mpq_class& s,
                       const HaOptions& opts = {});

/// CA numbers <= limit by the envelope route: hull of
/// (log n, log n - log sigma(n)) with all-ball coordinates. On a finite
/// window the hull grows boundary vertices past the last CA number (the
/// window's right edge is below no chord); exactly the vertices entered
/// through a certified negative slope correspond to eps > 0, so those are
/// returned.
std::vector<std::uint64_t> ca_via_envelope(std::uint64_t limit,
                                           const HaOptions& opts = {});

void write_ha_csv(std::ostream& out, const HaReport& rep);
void write_ha_json(std::ostream& out, const HaReport& rep);
void write_figure_csv(std::ostream& out, const FigureData& fig);
void write_figure_chords_csv(std::ostream& out, const FigureData& fig);
void write_figure_json(std::ostream& out, const FigureData& fig);

}  // namespace abundanza
