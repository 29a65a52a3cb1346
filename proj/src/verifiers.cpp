#include "abundanza/verifiers.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>

#include "segment_runner.hpp"

namespace abundanza {

namespace {

constexpr double kExpGammaD = 1.7810724179901979852;
constexpr std::uint64_t kScanSegmentLen = 1 << 20;
constexpr std::uint64_t kHarmonicExactLimit = 10'000;

RealBall exp_gamma(Precision prec) { return exp(RealBall::euler_gamma(prec)); }

RealBall r0_ball(std::uint64_t n, const mpz_class& sigma, Precision prec) {
    RealBall nb = RealBall::exact_uint(n, prec);
    return exp_gamma(prec) * nb * log(log(nb)) - RealBall::exact(sigma, prec);
}

// Direct ball summation of h_n; O(n), used off the incremental scan path.
RealBall harmonic_direct(std::uint64_t n, Precision prec) {
    RealBall h = RealBall::exact_int(0, prec);
    RealBall one = RealBall::exact_int(1, prec);
    for (std::uint64_t i = 1; i <= n; ++i)
        h += one / RealBall::exact_uint(i, prec);
    return h;
}

RealBall l0_from_h(const RealBall& h, const mpz_class& sigma, Precision prec) {
    return h + exp(h) * log(h) - RealBall::exact(sigma, prec);
}

}  // namespace

RealBall gronwall(std::uint64_t n, Precision prec) {
    if (n < 3) throw DomainError("G(n) requires n >= 3");
    mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
    RealBall nb = RealBall::exact_uint(n, prec);
    return RealBall::exact(sig, prec) / (nb * log(log(nb)));
}

RealBall robin_deficit(std::uint64_t n, Precision prec) {
    if (n < 2) throw DomainError("R_0(n) requires n >= 2");
    mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
    return r0_ball(n, sig, prec);
}

SignDecision robin_lower_bound_check(std::uint64_t n, Precision prec,
                                     Precision max_prec, const mpq_class& c) {
    if (n < 3) throw DomainError("the lower bound requires n >= 3");
    mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
    for (Precision p = prec;; p *= 2) {
        RealBall nb = RealBall::exact_uint(n, p);
        RealBall v = r0_ball(n, sig, p) +
                     RealBall::exact(c, p) * nb / log(log(nb));
        SignDecision s = v.sign();
        if (s != SignDecision::Ambiguous) return s;
        if (p * 2 > max_prec)
            throw PrecisionError("bound (7) sign ambiguous at max precision");
    }
}

mpq_class harmonic_exact(std::uint64_t n) {
    if (n < 1 || n > kHarmonicExactLimit)
        throw DomainError("harmonic_exact serves 1 <= n <= 10^4");
    mpq_class h(0);
    for (std::uint64_t i = 1; i <= n; ++i)
        h += mpq_class(1, static_cast<unsigned long>(i));
    return h;
}

RealBall harmonic(std::uint64_t n, Precision prec) {
    if (n < 1) throw DomainError("h_n requires n >= 1");
    if (n <= kHarmonicExactLimit)
        return RealBall::exact(harmonic_exact(n), prec);
    return harmonic_direct(n, prec);
}

RealBall lagarias_value(std::uint64_t n, Precision prec) {
    if (n < 1) throw DomainError("L_0(n) requires n >= 1");
    mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
    return l0_from_h(harmonic(n, prec), sig, prec);
}

SignDecision lagarias_check(std::uint64_t n, Precision prec,
                            Precision max_prec) {
    if (n < 2) throw DomainError("(L) is stated for n > 1");
    for (Precision p = prec;; p *= 2) {
        SignDecision s = lagarias_value(n, p).sign();
        if (s != SignDecision::Ambiguous) return s;
        if (p * 2 > max_prec)
            throw PrecisionError("L_0 sign ambiguous at max precision");
    }
}

std::pair<SignDecision, SignDecision> lagarias_sandwich(std::uint64_t n,
                                                        Precision prec,
                                                        Precision max_prec) {
    if (n <= 20) throw DomainError("the sandwich (9) is stated for n > 20");
    mpz_class sig(static_cast<unsigned long>(sigma_u64(n)));
    for (Precision p = prec;; p *= 2) {
        RealBall h = harmonic(n, p);
        RealBall l0 = l0_from_h(h, sig, p);
        RealBall r0 = r0_ball(n, sig, p);
        RealBall nb = RealBall::exact_uint(n, p);
        RealBall seven_term =
            RealBall::exact_int(7, p) * nb / log(nb);
        SignDecision left = (l0 - r0 - h).sign();
        SignDecision right = (r0 + seven_term - l0).sign();
        if (left != SignDecision::Ambiguous &&
            right != SignDecision::Ambiguous)
            return {left, right};
        if (p * 2 > max_prec)
            throw PrecisionError("sandwich (9) signs ambiguous at max precision");
    }
}

RealBall lagarias_weighted(std::uint64_t n, const Weight& w, Precision prec) {
    if (n < w.min_n())
        throw DomainError("L_tau requires n >= " + std::to_string(w.min_n()));
    RealBall log_n = log(RealBall::exact_uint(n, prec));
    return lagarias_value(n, prec) * w.tau_from_log(log_n, prec);
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

namespace {

// Streams per-segment violation records in segment order so CSV output and
// the frontier stay gap-free even with parallel workers.
class OrderedEmitter {
public:
    OrderedEmitter(const std::vector<detail::Segment>& segs,
                   const ScanOptions& opts)
        : segs_(segs), opts_(opts), done_(segs.size()) {}

    void complete(std::size_t idx, std::vector<VerificationRecord> recs,
                  std::vector<std::uint64_t> viols) {
        std::lock_guard<std::mutex> lk(mu_);
        done_[idx] = Slot{std::move(recs), std::move(viols)};
        while (next_ < done_.size() && done_[next_].has_value()) {
            Slot& slot = *done_[next_];
            if (opts_.on_record)
                for (const VerificationRecord& r : slot.records)
                    opts_.on_record(r);
            violations.insert(violations.end(), slot.violations.begin(),
                              slot.violations.end());
            last_certified = segs_[next_].hi;
            if (opts_.on_frontier) opts_.on_frontier(last_certified);
            done_[next_].reset();
            ++next_;
        }
    }

    std::vector<std::uint64_t> violations;
    std::uint64_t last_certified = 0;

private:
    struct Slot {
        std::vector<VerificationRecord> records;
        std::vector<std::uint64_t> violations;
    };
    const std::vector<detail::Segment>& segs_;
    const ScanOptions& opts_;
    std::vector<std::optional<Slot>> done_;
    std::size_t next_ = 0;
    std::mutex mu_;
};

VerificationRecord make_record(std::uint64_t n, std::uint64_t sigma,
                               const char* name, SignDecision verdict,
                               Precision prec, bool with_l0 = false,
                               const RealBall* h = nullptr) {
    VerificationRecord rec;
    rec.n = n;
    rec.sigma = mpz_class(static_cast<unsigned long>(sigma));
    rec.r0 = r0_ball(n, rec.sigma, prec);
    RealBall nb = RealBall::exact_uint(n, prec);
    rec.gronwall = RealBall::exact(rec.sigma, prec) / (nb * log(log(nb)));
    if (with_l0 && h != nullptr) rec.l0 = l0_from_h(*h, rec.sigma, prec);
    rec.verdicts.emplace_back(name, verdict);
    return rec;
}

void check_scan_range(std::uint64_t lo, std::uint64_t hi, std::uint64_t min_lo,
                      const ScanOptions& opts) {
    if (lo < min_lo || lo > hi)
        throw DomainError("scan requires " + std::to_string(min_lo) +
                          " <= lo <= hi");
    if (hi > opts.budget_entries)
        throw ResourceError("scan range exceeds the budget of " +
                            std::to_string(opts.budget_entries) + " entries");
}

// Certified violation test for one n given its exact sigma: returns the
// sign of `expr` (violation iff sign <= 0), escalating along the ladder.
template <typename BallExpr>
bool certify_violation(const BallExpr& expr, const PrecisionLadder& ladder,
                       std::uint64_t n) {
    for (Precision p = ladder.start;; p *= 2) {
        SignDecision s = expr(p).sign();
        if (s == SignDecision::Positive) return false;
        if (s == SignDecision::Negative || s == SignDecision::Zero) return true;
        if (p * 2 > ladder.max)
            throw PrecisionError("scan sign ambiguous at max precision, n=" +
                                 std::to_string(n));
    }
}

}  // namespace

ScanResult robin_scan(std::uint64_t lo, std::uint64_t hi,
                      const ScanOptions& opts) {
    check_scan_range(lo, hi, 3, opts);
    std::vector<detail::Segment> segs =
        detail::make_segments(lo, hi, kScanSegmentLen);
    OrderedEmitter emit(segs, opts);

    detail::run_parallel(segs, opts.threads, [&](std::size_t idx,
                                                 detail::Segment seg) {
        std::vector<std::uint64_t> sig;
        sigma_segment(seg.lo, seg.hi, sig);
        std::vector<VerificationRecord> recs;
        std::vector<std::uint64_t> viols;
        for (std::uint64_t n = seg.lo; n <= seg.hi; ++n) {
            std::uint64_t sn = sig[n - seg.lo];
            double lln = std::log(std::log(static_cast<double>(n)));
            double lhs = kExpGammaD * static_cast<double>(n) * lln;
            double v = lhs - static_cast<double>(sn);
            double scale = std::fabs(lhs) + static_cast<double>(sn);
            bool violation;
            if (std::isfinite(v) && std::fabs(v) > opts.rel_margin * scale) {
                violation = v < 0;
            } else {
                mpz_class sz(static_cast<unsigned long>(sn));
                violation = certify_violation(
                    [&](Precision p) { return r0_ball(n, sz, p); },
                    opts.ladder, n);
            }
            if (violation) {
                viols.push_back(n);
                recs.push_back(make_record(n, sn, "robin",
                                           SignDecision::Negative,
                                           opts.ladder.start));
            }
        }
        emit.complete(idx, std::move(recs), std::move(viols));
    });

    return {std::move(emit.violations), emit.last_certified};
}

ScanResult robin_lower_scan(std::uint64_t lo, std::uint64_t hi,
                            const ScanOptions& opts) {
    check_scan_range(lo, hi, 3, opts);
    const mpq_class& c = kRobinLowerConstant;
    const double cd = c.get_d();
    std::vector<detail::Segment> segs =
        detail::make_segments(lo, hi, kScanSegmentLen);
    OrderedEmitter emit(segs, opts);

    detail::run_parallel(segs, opts.threads, [&](std::size_t idx,
                                                 detail::Segment seg) {
        std::vector<std::uint64_t> sig;
        sigma_segment(seg.lo, seg.hi, sig);
        std::vector<VerificationRecord> recs;
        std::vector<std::uint64_t> viols;
        for (std::uint64_t n = seg.lo; n <= seg.hi; ++n) {
            std::uint64_t sn = sig[n - seg.lo];
            double lln = std::log(std::log(static_cast<double>(n)));
            double r0d = kExpGammaD * static_cast<double>(n) * lln -
                         static_cast<double>(sn);
            double bound = cd * static_cast<double>(n) / lln;
            double v = r0d + bound;
            double scale = std::fabs(r0d) + std::fabs(bound);
            bool violation;
            if (std::isfinite(v) && std::fabs(v) > opts.rel_margin * scale) {
                violation = v < 0;
            } else {
                mpz_class sz(static_cast<unsigned long>(sn));
                violation = certify_violation(
                    [&](Precision p) {
                        RealBall nb = RealBall::exact_uint(n, p);
                        return r0_ball(n, sz, p) +
                               RealBall::exact(c, p) * nb / log(log(nb));
                    },
                    opts.ladder, n);
            }
            if (violation) {
                viols.push_back(n);
                recs.push_back(make_record(n, sn, "robin_lower",
                                           SignDecision::Negative,
                                           opts.ladder.start));
            }
        }
        emit.complete(idx, std::move(recs), std::move(viols));
    });

    return {std::move(emit.violations), emit.last_certified};
}

namespace {

// Sequential harmonic-carrying scan driver shared by (L) and the sandwich:
// fn(n, sigma, h_double, h_ball) -> violated?
ScanResult harmonic_scan(
    std::uint64_t lo, std::uint64_t hi, std::uint64_t min_lo,
    const ScanOptions& opts,
    const std::function<bool(std::uint64_t, std::uint64_t, double,
                             const RealBall&,
                             std::vector<VerificationRecord>&)>& fn) {
    check_scan_range(lo, hi, min_lo, opts);
    Precision hp = opts.ladder.start;
    RealBall h = RealBall::exact_int(0, hp);
    RealBall one = RealBall::exact_int(1, hp);
    double hd = 0;
    for (std::uint64_t i = 1; i < lo; ++i) {
        h += one / RealBall::exact_uint(i, hp);
        hd += 1.0 / static_cast<double>(i);
    }

    ScanResult res;
    for_each_sigma_segment(
        lo, hi, kScanSegmentLen,
        [&](std::uint64_t seg_lo, std::span<const std::uint64_t> sig) {
            std::vector<VerificationRecord> recs;
            for (std::size_t i = 0; i < sig.size(); ++i) {
                std::uint64_t n = seg_lo + i;
                h += one / RealBall::exact_uint(n, hp);
                hd += 1.0 / static_cast<double>(n);
                if (fn(n, sig[i], hd, h, recs)) res.violations.push_back(n);
            }
            if (opts.on_record)
                for (const VerificationRecord& r : recs) opts.on_record(r);
            res.last_certified = seg_lo + sig.size() - 1;
            if (opts.on_frontier) opts.on_frontier(res.last_certified);
        });
    return res;
}

}  // namespace

ScanResult lagarias_scan(std::uint64_t lo, std::uint64_t hi,
                         const ScanOptions& opts) {
    return harmonic_scan(
        lo, hi, 2, opts,
        [&](std::uint64_t n, std::uint64_t sn, double hd, const RealBall& h,
            std::vector<VerificationRecord>& recs) {
            double ehd = std::exp(hd);
            double v = hd + ehd * std::log(hd) - static_cast<double>(sn);
            double scale =
                hd + std::fabs(ehd * std::log(hd)) + static_cast<double>(sn);
            bool violation;
            if (std::isfinite(v) && std::fabs(v) > opts.rel_margin * scale) {
                violation = v < 0;
            } else {
                mpz_class sz(static_cast<unsigned long>(sn));
                // The running ball is already certified; escalation
                // recomputes h from scratch at the higher precision.
                violation = certify_violation(
                    [&](Precision p) {
                        RealBall hp2 = p == opts.ladder.start
                                           ? h
                                           : harmonic_direct(n, p);
                        return l0_from_h(hp2, sz, p);
                    },
                    opts.ladder, n);
            }
            if (violation)
                recs.push_back(make_record(n, sn, "lagarias",
                                           SignDecision::Negative,
                                           opts.ladder.start, true, &h));
            return violation;
        });
}

ScanResult sandwich_scan(std::uint64_t lo, std::uint64_t hi,
                         const ScanOptions& opts) {
    return harmonic_scan(
        lo, hi, 21, opts,
        [&](std::uint64_t n, std::uint64_t sn, double hd, const RealBall& h,
            std::vector<VerificationRecord>& recs) {
            double nd = static_cast<double>(n);
            double ln = std::log(nd);
            double lln = std::log(ln);
            double ehlh = std::exp(hd) * std::log(hd);
            double r0d = kExpGammaD * nd * lln - static_cast<double>(sn);
            double l0d = hd + ehlh - static_cast<double>(sn);
            double left = l0d - r0d - hd;
            double right = r0d + 7.0 * nd / ln - l0d;
            double scale_l = std::fabs(ehlh) + kExpGammaD * nd * lln;
            double scale_r = scale_l + 7.0 * nd / ln + hd;
            bool bad_left, bad_right;
            mpz_class sz(static_cast<unsigned long>(sn));
            auto left_expr = [&](Precision p) {
                RealBall hp2 =
                    p == opts.ladder.start ? h : harmonic_direct(n, p);
                return l0_from_h(hp2, sz, p) - r0_ball(n, sz, p) - hp2;
            };
            auto right_expr = [&](Precision p) {
                RealBall hp2 =
                    p == opts.ladder.start ? h : harmonic_direct(n, p);
                RealBall nb = RealBall::exact_uint(n, p);
                return r0_ball(n, sz, p) +
                       RealBall::exact_int(7, p) * nb / log(nb) -
                       l0_from_h(hp2, sz, p);
            };
            if (std::isfinite(left) && std::fabs(left) > opts.rel_margin * scale_l)
                bad_left = left < 0;
            else
                bad_left = certify_violation(left_expr, opts.ladder, n);
            if (std::isfinite(right) && std::fabs(right) > opts.rel_margin * scale_r)
                bad_right = right < 0;
            else
                bad_right = certify_violation(right_expr, opts.ladder, n);
            if (bad_left || bad_right) {
                VerificationRecord rec =
                    make_record(n, sn, "sandwich_left",
                                bad_left ? SignDecision::Negative
                                         : SignDecision::Positive,
                                opts.ladder.start, true, &h);
                rec.verdicts.emplace_back("sandwich_right",
                                          bad_right ? SignDecision::Negative
                                                    : SignDecision::Positive);
                recs.push_back(std::move(rec));
            }
            return bad_left || bad_right;
        });
}

// ---------------------------------------------------------------------------
// Records and the frontier file
// ---------------------------------------------------------------------------

void write_record_csv_header(std::ostream& out) {
    out << "n,sigma,r0_mid,r0_rad,g_mid,g_rad,l0_mid,l0_rad,verdicts\n";
}

void write_record_csv(std::ostream& out, const VerificationRecord& rec) {
    out << rec.n << ',' << rec.sigma.get_str() << ','
        << rec.r0.csv_midpoint() << ',' << rec.r0.csv_radius() << ','
        << rec.gronwall.csv_midpoint() << ',' << rec.gronwall.csv_radius()
        << ',';
    if (rec.l0)
        out << rec.l0->csv_midpoint() << ',' << rec.l0->csv_radius();
    else
        out << ',';
    out << ',';
    for (std::size_t i = 0; i < rec.verdicts.size(); ++i) {
        if (i != 0) out << ';';
        out << rec.verdicts[i].first << '=' << to_string(rec.verdicts[i].second);
    }
    out << '\n';
}

std::optional<std::uint64_t> read_frontier(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    const std::string key = "last_certified=";
    if (line.rfind(key, 0) != 0) return std::nullopt;
    try {
        return std::stoull(line.substr(key.size()));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_frontier(const std::string& path, std::uint64_t last_certified) {
    std::ofstream out(path, std::ios::trunc);
    out << "last_certified=" << last_certified << '\n';
}

}  // namespace abundanza
