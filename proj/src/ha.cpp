#include "abundanza/ha.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>

#include <json.hpp>

#include "abundanza/criticals.hpp"
#include "segment_runner.hpp"

namespace abundanza {

namespace {

constexpr double kExpGammaD = 1.7810724179901979852;
constexpr std::uint64_t kHullSegmentLen = 1 << 20;
constexpr std::uint64_t kFigurePointCap = 2'000'000;

RealBall exp_gamma(Precision prec) { return exp(RealBall::euler_gamma(prec)); }

}  // namespace

RealBall Weight::tau_from_log(const RealBall& log_n, Precision prec) const {
    if (sgn(s) == 0) return RealBall::exact_int(1, prec);
    if (is_integer()) {
        if (!s.get_num().fits_slong_p())
            throw DomainError("weight exponent out of range");
        return log_n.pow_int(s.get_num().get_si());
    }
    return pow(log_n, RealBall::exact(s, prec));
}

double Weight::tau_double(double log_n) const {
    if (sgn(s) == 0) return 1.0;
    return std::pow(log_n, s.get_d());
}

RealBall r_weighted_parts(const mpz_class& n, const mpz_class& sigma,
                          const RealBall& log_n, const Weight& w,
                          Precision prec) {
    RealBall lln = log(log_n);
    RealBall deficit = exp_gamma(prec) * RealBall::exact(n, prec) * lln -
                       RealBall::exact(sigma, prec);
    return deficit * w.tau_from_log(log_n, prec);
}

RealBall r_weighted(std::uint64_t n, const Weight& w, Precision prec) {
    if (n < w.min_n())
        throw DomainError("R_s requires n >= " + std::to_string(w.min_n()) +
                          " for this weight");
    mpz_class nz(static_cast<unsigned long>(n));
    mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
    return r_weighted_parts(nz, sig, log(RealBall::exact(nz, prec)), w, prec);
}

RealBall r_weighted(const Factorization& f, const Weight& w, Precision prec) {
    ValueAndLog vl = value_and_log(f, prec);
    if (*vl.value < w.min_n())
        throw DomainError("R_s requires n >= " + std::to_string(w.min_n()) +
                          " for this weight");
    return r_weighted_parts(*vl.value, sigma_of_factorization(f), vl.log, w,
                            prec);
}

RealBall t_statistic_parts(const mpq_class& abundancy, const RealBall& log_n,
                           Precision prec) {
    RealBall lln = log(log_n);
    return (exp_gamma(prec) * lln - RealBall::exact(abundancy, prec)) *
           sqrt(log_n);
}

RealBall t_statistic(std::uint64_t n, Precision prec) {
    if (n < 3) throw DomainError("T(n) requires n >= 3");
    mpq_class ab(mpz_class(static_cast<unsigned long>(sigma_u64(n))),
                 mpz_class(static_cast<unsigned long>(n)));
    ab.canonicalize();
    return t_statistic_parts(
        ab, log(RealBall::exact_uint(n, prec)), prec);
}

RealBall t_statistic(const Factorization& f, Precision prec) {
    ValueAndLog vl = value_and_log(f, prec);
    if (*vl.value < 3) throw DomainError("T(n) requires n >= 3");
    return t_statistic_parts(abundancy(f), vl.log, prec);
}

std::pair<RealBall, RealBall> ramanujan_constants(Precision prec) {
    RealBall g = RealBall::euler_gamma(prec);
    RealBall eg = exp(g);
    RealBall two = RealBall::exact_int(2, prec);
    RealBall two_sqrt2 = two * sqrt(two);
    RealBall log4pi = log(RealBall::exact_int(4, prec) * RealBall::pi(prec));
    RealBall four = RealBall::exact_int(4, prec);
    RealBall c1 = eg * (two_sqrt2 - four - g + log4pi);
    RealBall c2 = eg * (two_sqrt2 + g - log4pi);
    return {c1, c2};
}

namespace {

// Certifier for points (n, R_s(n)); sigma is refactored exactly per call.
StreamCertifier make_r_certifier(const Weight& w) {
    return [w](std::uint64_t n, Precision prec) {
        mpz_class nz(static_cast<unsigned long>(n));
        mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
        RealBall nb = RealBall::exact(nz, prec);
        RealBall ln = log(nb);
        return std::make_pair(nb, r_weighted_parts(nz, sig, ln, w, prec));
    };
}

double r_double(std::uint64_t n, std::uint64_t sigma, const Weight& w) {
    double ln = std::log(static_cast<double>(n));
    double lln = std::log(ln);
    return (kExpGammaD * static_cast<double>(n) * lln -
            static_cast<double>(sigma)) *
           w.tau_double(ln);
}

RealBall vertex_slope(const StreamCertifier& cert, std::uint64_t u,
                      std::uint64_t v, Precision prec) {
    auto [xu, yu] = cert(u, prec);
    auto [xv, yv] = cert(v, prec);
    return (yv - yu) / (xv - xu);
}

// Slope balls between consecutive vertices with certified signs and strict
// monotonicity, escalating along the ladder.
void certify_slopes(const StreamCertifier& cert, const PrecisionLadder& ladder,
                    const std::vector<StreamPoint>& verts,
                    std::vector<RealBall>& slopes,
                    std::vector<SignDecision>& signs) {
    slopes.clear();
    signs.clear();
    for (std::size_t i = 1; i < verts.size(); ++i) {
        RealBall s = vertex_slope(cert, verts[i - 1].id, verts[i].id,
                                  ladder.start);
        for (Precision prec = ladder.start; s.sign() == SignDecision::Ambiguous;
             prec *= 2) {
            if (prec * 2 > ladder.max)
                throw PrecisionError("slope sign ambiguous at max precision");
            s = vertex_slope(cert, verts[i - 1].id, verts[i].id, prec * 2);
        }
        slopes.push_back(s);
        signs.push_back(slopes.back().sign());
    }
    for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
        for (Precision prec = ladder.start;; prec *= 2) {
            SignDecision s = cmp(slopes[i], slopes[i + 1]);
            if (s == SignDecision::Negative) break;
            if (s != SignDecision::Ambiguous)
                throw Error("hull slopes failed to increase");
            if (prec * 2 > ladder.max)
                throw PrecisionError(
                    "slope monotonicity ambiguous at max precision");
            slopes[i] = vertex_slope(cert, verts[i].id, verts[i + 1].id,
                                     prec * 2);
            slopes[i + 1] = vertex_slope(cert, verts[i + 1].id,
                                         verts[i + 2].id, prec * 2);
        }
    }
}

}  // namespace

HaReport ha_numbers(std::uint64_t lo, std::uint64_t hi, const mpq_class& s,
                    const HaOptions& opts) {
    Weight w{s};
    if (lo < 2 || lo >= hi) throw DomainError("ha_numbers requires 2 <= lo < hi");
    if (lo < w.min_n())
        throw DomainError("ha_numbers: lo below the weight's domain floor " +
                          std::to_string(w.min_n()));
    std::uint64_t count = hi - lo + 1;
    if (count > opts.budget_entries)
        throw ResourceError("ha_numbers range exceeds the budget of " +
                            std::to_string(opts.budget_entries) + " entries");

    StreamCertifier cert = make_r_certifier(w);
    OrientationOracle oracle(cert, opts.ladder, opts.rel_margin);

    std::vector<double> ycache(count);
    std::vector<detail::Segment> segs =
        detail::make_segments(lo, hi, kHullSegmentLen);
    std::vector<std::vector<StreamPoint>> seg_hulls(segs.size());
    std::vector<StreamingLowerHull::CollinearEvent> events;
    std::mutex events_mu;

    detail::run_parallel(segs, opts.threads, [&](std::size_t idx,
                                                 detail::Segment seg) {
        std::vector<std::uint64_t> sig;
        sigma_segment(seg.lo, seg.hi, sig);
        StreamingLowerHull hull(oracle);
        for (std::uint64_t n = seg.lo; n <= seg.hi; ++n) {
            double y = r_double(n, sig[n - seg.lo], w);
            ycache[n - lo] = y;
            hull.push(StreamPoint{n, static_cast<double>(n), y});
        }
        seg_hulls[idx] = hull.take_hull();
        if (!hull.collinear_events().empty()) {
            std::lock_guard<std::mutex> lk(events_mu);
            events.insert(events.end(), hull.collinear_events().begin(),
                          hull.collinear_events().end());
        }
    });

    // hull(A u B) = hull(hull(A) u hull(B)): re-hull the chunk hulls in order.
    StreamingLowerHull merged(oracle);
    for (const std::vector<StreamPoint>& part : seg_hulls)
        for (const StreamPoint& p : part) merged.push(p);
    events.insert(events.end(), merged.collinear_events().begin(),
                  merged.collinear_events().end());
    std::vector<StreamPoint> verts = merged.take_hull();

    if (opts.dominance_sweep) {
        detail::run_parallel(segs, opts.threads, [&](std::size_t,
                                                     detail::Segment seg) {
            std::size_t vi = 0;
            while (vi + 2 < verts.size() && verts[vi + 1].id <= seg.lo) ++vi;
            for (std::uint64_t n = seg.lo; n <= seg.hi; ++n) {
                while (vi + 2 < verts.size() && verts[vi + 1].id <= n) ++vi;
                if (n == verts[vi].id || n == verts[vi + 1].id) continue;
                StreamPoint p{n, static_cast<double>(n), ycache[n - lo]};
                SignDecision sd = oracle(verts[vi], verts[vi + 1], p);
                if (sd == SignDecision::Negative)
                    throw Error("dominance sweep found a point below the hull");
                if (sd == SignDecision::Zero) {
                    std::lock_guard<std::mutex> lk(events_mu);
                    events.push_back({n, verts[vi].id, verts[vi + 1].id});
                }
            }
        });
    }

    std::sort(events.begin(), events.end(),
              [](const StreamingLowerHull::CollinearEvent& a,
                 const StreamingLowerHull::CollinearEvent& b) {
                  return a.excluded < b.excluded;
              });

    HaReport rep;
    rep.lo = lo;
    rep.hi = hi;
    rep.s = s;
    for (const StreamPoint& v : verts) rep.ha_numbers.push_back(v.id);
    for (const StreamPoint& v : verts)
        rep.r_values.push_back(cert(v.id, opts.ladder.start).second);
    certify_slopes(cert, opts.ladder, verts, rep.slopes, rep.slope_signs);
    rep.sign_split = -1;
    for (std::size_t i = 0; i < rep.slope_signs.size(); ++i) {
        if (rep.slope_signs[i] == SignDecision::Positive) {
            rep.sign_split = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    rep.collinear = std::move(events);
    return rep;
}

FigureData figure_data(std::uint64_t lo, std::uint64_t hi, const mpq_class& s,
                       const HaOptions& opts) {
    if (hi < lo || hi - lo + 1 > kFigurePointCap)
        throw ResourceError("figure_data materializes certified balls; cap is " +
                            std::to_string(kFigurePointCap) + " points");
    FigureData fig;
    fig.report = ha_numbers(lo, hi, s, opts);
    Weight w{s};
    std::uint64_t count = hi - lo + 1;
    fig.points.resize(count);
    std::vector<detail::Segment> segs =
        detail::make_segments(lo, hi, kHullSegmentLen);
    detail::run_parallel(segs, opts.threads, [&](std::size_t,
                                                 detail::Segment seg) {
        std::vector<std::uint64_t> sig;
        sigma_segment(seg.lo, seg.hi, sig);
        for (std::uint64_t n = seg.lo; n <= seg.hi; ++n) {
            mpz_class nz(static_cast<unsigned long>(n));
            mpz_class sz(static_cast<unsigned long>(sig[n - seg.lo]));
            RealBall ln = log(RealBall::exact(nz, opts.ladder.start));
            fig.points[n - lo] = {
                n, r_weighted_parts(nz, sz, ln, w, opts.ladder.start)};
        }
    });
    return fig;
}

std::vector<std::uint64_t> ca_via_envelope(std::uint64_t limit,
                                           const HaOptions& opts) {
    if (limit < 2) throw DomainError("ca_via_envelope requires limit >= 2");
    if (limit > opts.budget_entries)
        throw ResourceError("ca_via_envelope limit exceeds the budget");

    StreamCertifier cert = [](std::uint64_t n, Precision prec) {
        mpz_class nz(static_cast<unsigned long>(n));
        mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
        RealBall x = log(RealBall::exact(nz, prec));
        RealBall y = x - log(RealBall::exact(sig, prec));
        return std::make_pair(x, y);
    };
    OrientationOracle oracle(cert, opts.ladder, opts.rel_margin);
    StreamingLowerHull hull(oracle);
    for_each_sigma_segment(
        2, limit, kHullSegmentLen,
        [&](std::uint64_t seg_lo, std::span<const std::uint64_t> sig) {
            for (std::size_t i = 0; i < sig.size(); ++i) {
                std::uint64_t n = seg_lo + i;
                double x = std::log(static_cast<double>(n));
                double y = x - std::log(static_cast<double>(sig[i]));
                hull.push(StreamPoint{n, x, y});
            }
        });
    std::vector<StreamPoint> verts = hull.take_hull();

    // Where the window hull coincides with the hull over all of N, the
    // slope into the i-th CA number equals -eps_i exactly; past the last
    // CA number in the window the hull bends toward the boundary and its
    // slopes certifiably leave the critical set. Accept edges while the
    // slope ball and -eps_{j+1} keep overlapping (equal reals always
    // overlap, so no true vertex is dropped); the stream starts at eps_2
    // because the grid starts at n = 2 = n_1.
    EpsilonStream stream(EpsilonStream::Options{opts.ladder, false});
    stream.next();  // eps_1
    std::vector<std::uint64_t> out{verts.front().id};
    for (std::size_t i = 1; i < verts.size(); ++i) {
        CriticalEpsilon eps = stream.next();
        bool matches = true;
        for (Precision prec : {opts.ladder.start, 2 * opts.ladder.start}) {
            RealBall s = vertex_slope(cert, verts[i - 1].id, verts[i].id, prec);
            RealBall target = -critical_epsilon_value(eps.p, eps.k, prec);
            if (!s.overlaps(target)) {
                matches = false;
                break;
            }
        }
        if (!matches) break;
        out.push_back(verts[i].id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

void write_ha_csv(std::ostream& out, const HaReport& rep) {
    out << "index,n,r_s_mid,r_s_rad,slope_mid,slope_rad,slope_sign\n";
    for (std::size_t i = 0; i < rep.ha_numbers.size(); ++i) {
        out << i << ',' << rep.ha_numbers[i] << ','
            << rep.r_values[i].csv_midpoint() << ','
            << rep.r_values[i].csv_radius() << ',';
        if (i == 0) {
            out << ",,\n";
            continue;
        }
        out << rep.slopes[i - 1].csv_midpoint() << ','
            << rep.slopes[i - 1].csv_radius() << ','
            << to_string(rep.slope_signs[i - 1]) << '\n';
    }
}

namespace {

nlohmann::json ball_json(const RealBall& b) {
    return {{"mid", b.csv_midpoint()}, {"rad", b.csv_radius()}};
}

nlohmann::json report_json(const HaReport& rep) {
    nlohmann::json j;
    j["lo"] = std::to_string(rep.lo);
    j["hi"] = std::to_string(rep.hi);
    j["s"] = rep.s.get_str();
    j["ha_numbers"] = nlohmann::json::array();
    for (std::uint64_t n : rep.ha_numbers)
        j["ha_numbers"].push_back(std::to_string(n));
    j["r_values"] = nlohmann::json::array();
    for (const RealBall& b : rep.r_values) j["r_values"].push_back(ball_json(b));
    j["slopes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.slopes.size(); ++i) {
        nlohmann::json sj = ball_json(rep.slopes[i]);
        sj["sign"] = to_string(rep.slope_signs[i]);
        j["slopes"].push_back(sj);
    }
    j["sign_split"] = rep.sign_split;
    j["collinear"] = nlohmann::json::array();
    for (const auto& e : rep.collinear)
        j["collinear"].push_back({{"excluded", std::to_string(e.excluded)},
                                  {"left", std::to_string(e.left)},
                                  {"right", std::to_string(e.right)}});
    return j;
}

}  // namespace

void write_ha_json(std::ostream& out, const HaReport& rep) {
    out << report_json(rep).dump(2) << '\n';
}

void write_figure_csv(std::ostream& out, const FigureData& fig) {
    out << "n,y_midpoint,y_radius,is_vertex\n";
    std::size_t vi = 0;
    for (const auto& [n, y] : fig.points) {
        bool is_vertex = vi < fig.report.ha_numbers.size() &&
                         fig.report.ha_numbers[vi] == n;
        if (is_vertex) ++vi;
        out << n << ',' << y.csv_midpoint() << ',' << y.csv_radius() << ','
            << (is_vertex ? 1 : 0) << '\n';
    }
}

void write_figure_chords_csv(std::ostream& out, const FigureData& fig) {
    out << "x0,y0_mid,x1,y1_mid\n";
    const HaReport& rep = fig.report;
    for (std::size_t i = 1; i < rep.ha_numbers.size(); ++i)
        out << rep.ha_numbers[i - 1] << ','
            << rep.r_values[i - 1].csv_midpoint() << ',' << rep.ha_numbers[i]
            << ',' << rep.r_values[i].csv_midpoint() << '\n';
}

void write_figure_json(std::ostream& out, const FigureData& fig) {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& [n, y] : fig.points)
        j["points"].push_back(
            {{"n", std::to_string(n)}, {"y", ball_json(y)}});
    j["report"] = report_json(fig.report);
    nlohmann::json chords = nlohmann::json::array();
    const HaReport& rep = fig.report;
    for (std::size_t i = 1; i < rep.ha_numbers.size(); ++i)
        chords.push_back({{"x0", std::to_string(rep.ha_numbers[i - 1])},
                          {"y0", ball_json(rep.r_values[i - 1])},
                          {"x1", std::to_string(rep.ha_numbers[i])},
                          {"y1", ball_json(rep.r_values[i])}});
    j["chords"] = std::move(chords);
    out << j.dump(2) << '\n';
}

}  // namespace abundanza
