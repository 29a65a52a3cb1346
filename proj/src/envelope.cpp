#include "abundanza/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace abundanza {

namespace {

bool all_exact(std::span<const EnvelopePoint> pts) {
    return std::all_of(pts.begin(), pts.end(),
                       [](const EnvelopePoint& p) { return p.y.is_exact(); });
}

void validate_grid(std::span<const EnvelopePoint> pts) {
    if (pts.size() < 2)
        throw DomainError("envelope requires at least two points");
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i - 1].x < pts[i].x))
            throw DomainError("envelope x values must strictly increase");
}

// Exact orientation when every ordinate is exact.
SignDecision orient_exact(std::span<const EnvelopePoint> pts, std::size_t i0,
                          std::size_t i1, std::size_t i2) {
    mpq_class cross = (pts[i1].x - pts[i0].x) * (pts[i2].y.to_exact_rational() -
                                                 pts[i0].y.to_exact_rational()) -
                      (pts[i1].y.to_exact_rational() -
                       pts[i0].y.to_exact_rational()) *
                          (pts[i2].x - pts[i0].x);
    int s = sgn(cross);
    if (s > 0) return SignDecision::Positive;
    if (s < 0) return SignDecision::Negative;
    return SignDecision::Zero;
}

RealBall y_at(std::span<const EnvelopePoint> pts, const YRefiner& refine,
              std::size_t i, Precision prec) {
    if (refine && prec > pts[i].y.precision()) return refine(i, prec);
    return pts[i].y;
}

SignDecision orient_balls(std::span<const EnvelopePoint> pts,
                          const YRefiner& refine, Precision prec,
                          std::size_t i0, std::size_t i1, std::size_t i2) {
    RealBall x0 = RealBall::exact(pts[i0].x, prec);
    RealBall x1 = RealBall::exact(pts[i1].x, prec);
    RealBall x2 = RealBall::exact(pts[i2].x, prec);
    RealBall y0 = y_at(pts, refine, i0, prec);
    RealBall y1 = y_at(pts, refine, i1, prec);
    RealBall y2 = y_at(pts, refine, i2, prec);
    RealBall cross = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0);
    return cross.sign();
}

SignDecision orient_certified(std::span<const EnvelopePoint> pts,
                              const YRefiner& refine,
                              const EnvelopeOptions& opts, std::size_t i0,
                              std::size_t i1, std::size_t i2) {
    if (pts[i0].y.is_exact() && pts[i1].y.is_exact() && pts[i2].y.is_exact())
        return orient_exact(pts, i0, i1, i2);
    for (Precision prec = opts.ladder.start;; prec *= 2) {
        SignDecision s = orient_balls(pts, refine, prec, i0, i1, i2);
        if (s != SignDecision::Ambiguous) return s;
        if (!refine || prec * 2 > opts.ladder.max)
            throw PrecisionError("hull orientation ambiguous at max precision");
    }
}

RealBall slope_ball(std::span<const EnvelopePoint> pts, const YRefiner& refine,
                    Precision prec, std::size_t i, std::size_t j) {
    RealBall dy = y_at(pts, refine, j, prec) - y_at(pts, refine, i, prec);
    RealBall dx = RealBall::exact(mpq_class(pts[j].x - pts[i].x), prec);
    return dy / dx;
}

}  // namespace

EnvelopeResult lower_envelope(std::span<const EnvelopePoint> pts,
                              const YRefiner& refine,
                              const EnvelopeOptions& opts) {
    validate_grid(pts);
    EnvelopeResult res;
    std::vector<std::size_t>& stack = res.vertex_indices;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (stack.size() >= 2) {
            std::size_t a = stack[stack.size() - 2];
            std::size_t b = stack[stack.size() - 1];
            SignDecision s = orient_certified(pts, refine, opts, a, b, i);
            if (s == SignDecision::Positive) break;
            if (s == SignDecision::Zero)
                res.tie_flags.push_back(
                    TieFlag{TieKind::CollinearExcluded, b, a, i});
            stack.pop_back();
        }
        stack.push_back(i);
    }

    // Slopes with certified strict monotonicity.
    for (std::size_t v = 1; v < stack.size(); ++v)
        res.slopes.push_back(
            slope_ball(pts, refine, opts.ladder.start, stack[v - 1], stack[v]));
    for (std::size_t v = 1; v + 1 < stack.size(); ++v) {
        for (Precision prec = opts.ladder.start;; prec *= 2) {
            SignDecision s = cmp(res.slopes[v - 1], res.slopes[v]);
            if (s == SignDecision::Negative) break;
            if (s == SignDecision::Positive || s == SignDecision::Zero)
                throw Error("hull slopes failed to increase");
            if (!refine || prec * 2 > opts.ladder.max)
                throw PrecisionError("hull slopes not separable at max precision");
            res.slopes[v - 1] =
                slope_ball(pts, refine, prec * 2, stack[v - 1], stack[v]);
            res.slopes[v] =
                slope_ball(pts, refine, prec * 2, stack[v], stack[v + 1]);
        }
    }
    return res;
}

std::size_t minimizer_for_slope(std::span<const EnvelopePoint> pts,
                                const mpq_class& slope, bool* tie,
                                const EnvelopeOptions& opts) {
    validate_grid(pts);
    if (tie) *tie = false;

    if (all_exact(pts)) {
        mpq_class best = pts[0].y.to_exact_rational() - slope * pts[0].x;
        std::size_t best_i = 0;
        bool tied = false;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            mpq_class g = pts[i].y.to_exact_rational() - slope * pts[i].x;
            if (g < best) {
                best = g;
                best_i = i;
                tied = false;
            } else if (g == best) {
                tied = true;  // keep the smaller index
            }
        }
        if (tie) *tie = tied;
        return best_i;
    }

    return minimizer_for_slope(pts, RealBall::exact(slope, opts.ladder.start),
                               tie, opts);
}

std::size_t minimizer_for_slope(std::span<const EnvelopePoint> pts,
                                const RealBall& slope, bool* tie,
                                const EnvelopeOptions& opts) {
    validate_grid(pts);
    if (tie) *tie = false;
    Precision prec = std::max(opts.ladder.start, slope.precision());
    RealBall best = pts[0].y - slope * RealBall::exact(pts[0].x, prec);
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        RealBall g = pts[i].y - slope * RealBall::exact(pts[i].x, prec);
        SignDecision s = cmp(g, best);
        if (s == SignDecision::Ambiguous)
            throw PrecisionError(
                "minimizer_for_slope: candidates not separable");
        if (s == SignDecision::Negative) {
            best = g;
            best_i = i;
        } else if (s == SignDecision::Zero && tie) {
            *tie = true;
        }
    }
    return best_i;
}

EnvelopeResult envelope_bruteforce(std::span<const EnvelopePoint> pts,
                                   const EnvelopeOptions& opts) {
    validate_grid(pts);
    if (pts.size() > 10'000)
        throw DomainError("envelope_bruteforce is an oracle; keep inputs small");

    std::vector<std::size_t> verts;
    std::vector<TieFlag> ties;

    if (all_exact(pts)) {
        std::vector<mpq_class> xs(pts.size()), ys(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            xs[i] = pts[i].x;
            ys[i] = pts[i].y.to_exact_rational();
        }
        std::vector<mpq_class> slopes;
        slopes.reserve(pts.size() * (pts.size() - 1) / 2);
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                slopes.push_back(mpq_class((ys[j] - ys[i]) / (xs[j] - xs[i])));
        std::sort(slopes.begin(), slopes.end());
        slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());

        std::vector<mpq_class> candidates;
        candidates.push_back(slopes.front() - 1);
        for (std::size_t i = 0; i + 1 < slopes.size(); ++i)
            candidates.push_back((slopes[i] + slopes[i + 1]) / 2);
        candidates.push_back(slopes.back() + 1);

        std::vector<char> in_hull(pts.size(), 0);
        for (const mpq_class& a : candidates) {
            mpq_class best = ys[0] - a * xs[0];
            std::vector<std::size_t> argmin{0};
            for (std::size_t i = 1; i < pts.size(); ++i) {
                mpq_class g = ys[i] - a * xs[i];
                if (g < best) {
                    best = g;
                    argmin.assign(1, i);
                } else if (g == best) {
                    argmin.push_back(i);
                }
            }
            for (std::size_t i : argmin) in_hull[i] = 1;
            if (argmin.size() > 1)
                ties.push_back(TieFlag{TieKind::MinimizerTie, argmin[1],
                                       argmin.front(), argmin.back()});
        }
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (in_hull[i]) verts.push_back(i);
    } else {
        Precision prec = opts.ladder.start;
        std::vector<RealBall> xs, ys;
        xs.reserve(pts.size());
        ys.reserve(pts.size());
        for (const EnvelopePoint& p : pts) {
            xs.push_back(RealBall::exact(p.x, prec));
            ys.push_back(p.y);
        }
        std::vector<RealBall> slopes;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                slopes.push_back((ys[j] - ys[i]) / (xs[j] - xs[i]));
        std::sort(slopes.begin(), slopes.end(),
                  [](const RealBall& a, const RealBall& b) {
                      return a.mid_double() < b.mid_double();
                  });
        RealBall one = RealBall::exact_int(1, prec);
        std::vector<RealBall> candidates;
        candidates.push_back(slopes.front() - one);
        RealBall half = RealBall::exact(mpq_class(1, 2), prec);
        for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
            if (cmp(slopes[i], slopes[i + 1]) != SignDecision::Negative)
                continue;  // equal or inseparable: no interval between them
            candidates.push_back((slopes[i] + slopes[i + 1]) * half);
        }
        candidates.push_back(slopes.back() + one);

        std::vector<char> in_hull(pts.size(), 0);
        for (const RealBall& a : candidates) {
            RealBall best = ys[0] - a * xs[0];
            std::size_t best_i = 0;
            for (std::size_t i = 1; i < pts.size(); ++i) {
                RealBall g = ys[i] - a * xs[i];
                SignDecision s = cmp(g, best);
                if (s == SignDecision::Ambiguous)
                    throw PrecisionError(
                        "envelope_bruteforce: minimizers not separable");
                if (s == SignDecision::Negative) {
                    best = g;
                    best_i = i;
                }
            }
            in_hull[best_i] = 1;
        }
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (in_hull[i]) verts.push_back(i);
    }

    EnvelopeResult res;
    res.vertex_indices = std::move(verts);
    res.tie_flags = std::move(ties);
    for (std::size_t v = 1; v < res.vertex_indices.size(); ++v)
        res.slopes.push_back(slope_ball(pts, {}, opts.ladder.start,
                                        res.vertex_indices[v - 1],
                                        res.vertex_indices[v]));
    return res;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

mpq_class parse_exact(const std::string& s, std::size_t line) {
    try {
        return parse_rational(s);
    } catch (const DomainError& e) {
        throw CsvError(std::string("x field: ") + e.what(), line);
    }
}

double parse_double(const std::string& s, const char* what, std::size_t line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CsvError(std::string("bad ") + what + " field '" + s + "'", line);
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        std::size_t b = field.find_first_not_of(" \t\r");
        std::size_t e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? ""
                                             : field.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

std::vector<EnvelopePoint> parse_points_csv(std::istream& in, Precision prec) {
    std::vector<EnvelopePoint> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f = split_csv_line(line);
        if (lineno == 1 && !f.empty() && f[0] == "x") continue;  // header
        if (f.size() < 2 || f.size() > 3)
            throw CsvError("expected 2 or 3 fields (x, y_midpoint[, y_radius])",
                           lineno);
        EnvelopePoint p;
        p.x = parse_exact(f[0], lineno);
        double mid = parse_double(f[1], "y_midpoint", lineno);
        double rad = f.size() == 3 && !f[2].empty()
                         ? parse_double(f[2], "y_radius", lineno)
                         : 0.0;
        if (rad < 0) throw CsvError("negative y_radius", lineno);
        p.y = RealBall::from_midpoint_radius(mid, rad, prec);
        pts.push_back(std::move(p));
    }
    return pts;
}

void write_points_csv(std::ostream& out, std::span<const EnvelopePoint> pts) {
    out << "x,y_midpoint,y_radius\n";
    for (const EnvelopePoint& p : pts)
        out << p.x.get_str() << ',' << p.y.csv_midpoint() << ','
            << p.y.csv_radius() << '\n';
}

// ---------------------------------------------------------------------------
// Streaming engine
// ---------------------------------------------------------------------------

OrientationOracle::OrientationOracle(StreamCertifier certifier,
                                     PrecisionLadder ladder, double rel_margin)
    : certifier_(std::move(certifier)),
      ladder_(ladder),
      rel_margin_(rel_margin) {}

SignDecision OrientationOracle::operator()(const StreamPoint& a,
                                           const StreamPoint& b,
                                           const StreamPoint& c) const {
    double t1 = (b.x - a.x) * (c.y - a.y);
    double t2 = (b.y - a.y) * (c.x - a.x);
    double cross = t1 - t2;
    double scale = std::fabs(t1) + std::fabs(t2);
    if (std::isfinite(cross) && scale > 0 &&
        std::fabs(cross) > rel_margin_ * scale)
        return cross > 0 ? SignDecision::Positive : SignDecision::Negative;

    if (!certifier_)
        throw PrecisionError("orientation needs certification but no "
                             "certifier was supplied");
    for (Precision prec = ladder_.start;; prec *= 2) {
        auto [xa, ya] = certifier_(a.id, prec);
        auto [xb, yb] = certifier_(b.id, prec);
        auto [xc, yc] = certifier_(c.id, prec);
        RealBall cb = (xb - xa) * (yc - ya) - (yb - ya) * (xc - xa);
        SignDecision s = cb.sign();
        if (s != SignDecision::Ambiguous) return s;
        if (prec * 2 > ladder_.max)
            throw PrecisionError("orientation ambiguous at max precision");
    }
}

StreamingLowerHull::StreamingLowerHull(OrientationOracle oracle)
    : oracle_(std::move(oracle)) {}

void StreamingLowerHull::push(const StreamPoint& p) {
    while (hull_.size() >= 2) {
        const StreamPoint& a = hull_[hull_.size() - 2];
        const StreamPoint& b = hull_[hull_.size() - 1];
        SignDecision s = oracle_(a, b, p);
        if (s == SignDecision::Positive) break;
        if (s == SignDecision::Zero)
            events_.push_back(CollinearEvent{b.id, a.id, p.id});
        hull_.pop_back();
    }
    hull_.push_back(p);
}

}  // namespace abundanza
