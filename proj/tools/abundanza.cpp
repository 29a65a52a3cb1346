// Command-line surface: CA/SA enumeration, HA computation over weighted
// Robin deficits, generic envelopes, and inequality verification scans.
//
// Exit codes: 0 success or expected results, 1 unexpected certified
// violation, 2 input error (including a detected epsilon tie without
// --allow-ties), 3 precision exhaustion, 4 resource budget.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "abundanza/criticals.hpp"
#include "abundanza/envelope.hpp"
#include "abundanza/errors.hpp"
#include "abundanza/ha.hpp"
#include "abundanza/verifiers.hpp"

namespace {

using namespace abundanza;

struct RunConfig {
    long precision = kDefaultPrecision;
    long max_precision = kMaxPrecision;
    std::uint64_t sieve_budget = kDefaultSieveBudget;
    unsigned threads = 0;
    std::string output;
    std::string format = "csv";

    PrecisionLadder ladder() const {
        return PrecisionLadder{precision, max_precision};
    }
    HaOptions ha_options() const {
        return HaOptions{ladder(), sieve_budget, threads, true};
    }
};

// Output stream that is either a file or stdout.
class OutStream {
public:
    explicit OutStream(const std::string& path, bool append = false) {
        if (!path.empty()) {
            file_.open(path, append ? std::ios::app : std::ios::trunc);
            if (!file_) throw DomainError("cannot open output file " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::string ball_field(const RealBall& b) { return b.csv_midpoint(); }

nlohmann::json factorization_json(const Factorization& f) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PrimePower& pp : f.factors())
        arr.push_back({pp.prime.get_str(), pp.exponent});
    return arr;
}

int cmd_ca_list(const RunConfig& cfg, std::size_t count, bool allow_ties,
                bool diagnostics) {
    CaEnumerator::Options opts{cfg.ladder(), allow_ties};
    std::vector<CaRecord> recs = ca_enumerate(count, opts);
    std::vector<CaDiagnostic> diag;
    if (diagnostics) diag = ca_diagnostics(recs);

    OutStream out(cfg.output);
    if (cfg.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const CaRecord& r = recs[i];
            nlohmann::json j;
            j["i"] = r.index;
            j["n"] = r.value.get_str();
            j["factorization"] = factorization_json(r.n);
            j["eps_hi"] = {{"p", r.eps_hi.p},
                           {"k", r.eps_hi.k},
                           {"mid", r.eps_hi.value.csv_midpoint()}};
            j["eps_lo"] = {{"p", r.eps_lo.p},
                           {"k", r.eps_lo.k},
                           {"mid", r.eps_lo.value.csv_midpoint()}};
            j["quotient"] = factorization_json(r.quotient);
            j["tie"] = r.tie;
            if (r.value >= 3) {
                mpq_class ab(r.sigma, r.value);
                ab.canonicalize();
                j["t"] = ball_field(
                    t_statistic_parts(ab, r.log_n, cfg.ladder().start));
            }
            if (diagnostics && i >= 1) {
                j["log_ratio"] = ball_field(diag[i - 1].log_ratio);
                j["largest_prime"] = diag[i - 1].largest_prime.get_str();
            }
            arr.push_back(std::move(j));
        }
        out.get() << arr.dump(2) << '\n';
        return 0;
    }

    out.get() << "i,n,factorization,eps_hi,eps_hi_mid,eps_lo,eps_lo_mid,"
                 "quotient,tie,t_mid";
    if (diagnostics) out.get() << ",log_ratio_mid,largest_prime";
    out.get() << '\n';
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const CaRecord& r = recs[i];
        out.get() << r.index << ',' << r.value.get_str() << ",\""
                  << r.n.to_string() << "\",F(" << r.eps_hi.p << " "
                  << r.eps_hi.k << ")," << r.eps_hi.value.csv_midpoint()
                  << ",F(" << r.eps_lo.p << " " << r.eps_lo.k << "),"
                  << r.eps_lo.value.csv_midpoint() << ",\""
                  << r.quotient.to_string() << "\"," << (r.tie ? 1 : 0) << ',';
        if (r.value >= 3) {
            mpq_class ab(r.sigma, r.value);
            ab.canonicalize();
            out.get() << ball_field(
                t_statistic_parts(ab, r.log_n, cfg.ladder().start));
        }
        if (diagnostics) {
            out.get() << ',';
            if (i >= 1)
                out.get() << ball_field(diag[i - 1].log_ratio) << ','
                          << diag[i - 1].largest_prime.get_str();
            else
                out.get() << ',';
        }
        out.get() << '\n';
    }
    return 0;
}

int cmd_ha_compute(const RunConfig& cfg, std::uint64_t lo, std::uint64_t hi,
                   const std::string& s_str, bool figure) {
    mpq_class s = parse_rational(s_str);
    HaOptions opts = cfg.ha_options();
    if (!figure) {
        HaReport rep = ha_numbers(lo, hi, s, opts);
        OutStream out(cfg.output);
        if (cfg.format == "json")
            write_ha_json(out.get(), rep);
        else
            write_ha_csv(out.get(), rep);
        return 0;
    }
    FigureData fig = figure_data(lo, hi, s, opts);
    if (cfg.format == "json") {
        OutStream out(cfg.output);
        write_figure_json(out.get(), fig);
        return 0;
    }
    if (cfg.output.empty()) {
        write_ha_csv(std::cout, fig.report);
        std::cout << '\n';
        write_figure_csv(std::cout, fig);
        std::cout << '\n';
        write_figure_chords_csv(std::cout, fig);
    } else {
        OutStream rep_out(cfg.output);
        write_ha_csv(rep_out.get(), fig.report);
        OutStream pts_out(cfg.output + ".points.csv");
        write_figure_csv(pts_out.get(), fig);
        OutStream chords_out(cfg.output + ".chords.csv");
        write_figure_chords_csv(chords_out.get(), fig);
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& kind, std::uint64_t lo,
               std::uint64_t hi) {
    ScanOptions opts;
    opts.ladder = cfg.ladder();
    opts.budget_entries = cfg.sieve_budget;
    opts.threads = cfg.threads;

    std::string frontier_path;
    std::uint64_t effective_lo = lo;
    bool append = false;
    if (!cfg.output.empty()) {
        frontier_path = cfg.output + ".frontier";
        if (std::optional<std::uint64_t> f = read_frontier(frontier_path)) {
            if (*f >= lo) {
                effective_lo = *f + 1;
                append = true;
                std::cerr << "resuming after certified frontier " << *f << '\n';
            }
        }
    }
    if (effective_lo > hi) {
        std::cerr << "range already certified\n";
        return 0;
    }

    auto out = std::make_unique<OutStream>(cfg.output, append);
    if (!append) write_record_csv_header(out->get());
    opts.on_record = [&](const VerificationRecord& rec) {
        write_record_csv(out->get(), rec);
    };
    if (!frontier_path.empty())
        opts.on_frontier = [&](std::uint64_t n) {
            write_frontier(frontier_path, n);
        };

    ScanResult res;
    bool unexpected = false;
    if (kind == "robin") {
        res = robin_scan(effective_lo, hi, opts);
        for (std::uint64_t v : res.violations)
            if (v > 5040) unexpected = true;
    } else if (kind == "robin-lower") {
        res = robin_lower_scan(effective_lo, hi, opts);
        unexpected = !res.violations.empty();
    } else if (kind == "lagarias") {
        res = lagarias_scan(effective_lo, hi, opts);
        unexpected = !res.violations.empty();
    } else if (kind == "sandwich") {
        res = sandwich_scan(effective_lo, hi, opts);
        unexpected = !res.violations.empty();
    } else {
        throw DomainError("unknown verify kind " + kind);
    }

    std::cerr << kind << ": certified [" << effective_lo << ", "
              << res.last_certified << "], " << res.violations.size()
              << " violation(s)\n";
    return unexpected ? 1 : 0;
}

int cmd_sa_list(const RunConfig& cfg, std::uint64_t limit) {
    std::vector<std::uint64_t> sa = sa_enumerate(limit, cfg.sieve_budget);
    OutStream out(cfg.output);
    if (cfg.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (std::uint64_t n : sa) arr.push_back(std::to_string(n));
        out.get() << arr.dump(2) << '\n';
        return 0;
    }
    out.get() << "index,n\n";
    for (std::size_t i = 0; i < sa.size(); ++i)
        out.get() << i + 1 << ',' << sa[i] << '\n';
    return 0;
}

int cmd_envelope(const RunConfig& cfg, const std::string& input) {
    std::ifstream in(input);
    if (!in) throw DomainError("cannot open input file " + input);
    std::vector<EnvelopePoint> pts = parse_points_csv(in, cfg.ladder().start);
    EnvelopeOptions opts{cfg.ladder()};
    EnvelopeResult res = lower_envelope(pts, {}, opts);

    OutStream out(cfg.output);
    if (cfg.format == "json") {
        nlohmann::json j;
        j["vertices"] = nlohmann::json::array();
        for (std::size_t v : res.vertex_indices)
            j["vertices"].push_back({{"index", v},
                                     {"x", pts[v].x.get_str()},
                                     {"y_mid", pts[v].y.csv_midpoint()},
                                     {"y_rad", pts[v].y.csv_radius()}});
        j["slopes"] = nlohmann::json::array();
        for (const RealBall& s : res.slopes)
            j["slopes"].push_back(
                {{"mid", s.csv_midpoint()}, {"rad", s.csv_radius()}});
        j["collinear_excluded"] = nlohmann::json::array();
        for (const TieFlag& t : res.tie_flags)
            j["collinear_excluded"].push_back(t.point_index);
        out.get() << j.dump(2) << '\n';
        return 0;
    }
    out.get() << "vertex,point_index,x,y_mid,y_rad,slope_mid,slope_rad\n";
    for (std::size_t v = 0; v < res.vertex_indices.size(); ++v) {
        std::size_t i = res.vertex_indices[v];
        out.get() << v << ',' << i << ',' << pts[i].x.get_str() << ','
                  << pts[i].y.csv_midpoint() << ',' << pts[i].y.csv_radius()
                  << ',';
        if (v > 0)
            out.get() << res.slopes[v - 1].csv_midpoint() << ','
                      << res.slopes[v - 1].csv_radius();
        else
            out.get() << ',';
        out.get() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"abundanza: colossally abundant numbers, convex envelopes "
                 "of Robin deficits, and certified inequality scans"};
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--precision", cfg.precision, "working precision in bits");
    app.add_option("--max-precision", cfg.max_precision,
                   "retry-ladder ceiling in bits");
    app.add_option("--sieve-budget", cfg.sieve_budget,
                   "dense-table budget in entries (~8 bytes each)");
    app.add_option("--threads", cfg.threads, "scan worker threads (0 = auto)");
    app.add_option("--output", cfg.output, "output file (default stdout)");
    app.add_option("--format", cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // ca list
    CLI::App* ca = app.add_subcommand("ca", "colossally abundant numbers");
    CLI::App* ca_list = ca->add_subcommand("list", "first N CA numbers");
    std::size_t ca_count = 14;
    bool allow_ties = false, ca_diag = false;
    ca_list->add_option("--count", ca_count, "how many")->required();
    ca_list->add_flag("--allow-ties", allow_ties,
                      "apply both primes at an epsilon tie instead of failing");
    ca_list->add_flag("--diagnostics", ca_diag,
                      "append log-ratio and largest-prime columns");

    // ha compute
    CLI::App* ha = app.add_subcommand("ha", "highest abundant numbers");
    CLI::App* ha_compute = ha->add_subcommand("compute", "HA report over a range");
    std::uint64_t ha_lo = 2, ha_hi = 120;
    std::string ha_s = "1";
    bool ha_figure = false;
    ha_compute->add_option("--lo", ha_lo, "range start")->required();
    ha_compute->add_option("--hi", ha_hi, "range end")->required();
    ha_compute->add_option("--s", ha_s, "weight exponent (rational)")->required();
    ha_compute->add_flag("--figure", ha_figure, "emit the full point dataset");

    // verify
    CLI::App* verify = app.add_subcommand("verify", "inequality scans");
    std::uint64_t v_lo = 0, v_hi = 0;
    std::string v_kind;
    verify->add_option("kind", v_kind, "robin|lagarias|sandwich|robin-lower")
        ->required()
        ->check(CLI::IsMember({"robin", "lagarias", "sandwich", "robin-lower"}));
    verify->add_option("--lo", v_lo, "range start")->required();
    verify->add_option("--hi", v_hi, "range end")->required();

    // sa list
    CLI::App* sa = app.add_subcommand("sa", "superabundant numbers");
    CLI::App* sa_list = sa->add_subcommand("list", "all SA numbers <= limit");
    std::uint64_t sa_limit = 60;
    sa_list->add_option("--limit", sa_limit, "upper bound")->required();

    // envelope
    CLI::App* env = app.add_subcommand("envelope", "lower envelope of a CSV");
    std::string env_input;
    env->add_option("--input", env_input, "points CSV (x,y_midpoint,y_radius)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (const char* env_max = std::getenv("ABUNDANZA_MAX_PRECISION")) {
        try {
            cfg.max_precision = std::stol(env_max);
        } catch (const std::exception&) {
            std::cerr << "bad ABUNDANZA_MAX_PRECISION value\n";
            return 2;
        }
    }

    try {
        if (cfg.precision < 53 || cfg.precision > cfg.max_precision)
            throw DomainError("need 53 <= precision <= max-precision");
        if (ca_list->parsed())
            return cmd_ca_list(cfg, ca_count, allow_ties, ca_diag);
        if (ha_compute->parsed())
            return cmd_ha_compute(cfg, ha_lo, ha_hi, ha_s, ha_figure);
        if (verify->parsed()) return cmd_verify(cfg, v_kind, v_lo, v_hi);
        if (sa_list->parsed()) return cmd_sa_list(cfg, sa_limit);
        if (env->parsed()) return cmd_envelope(cfg, env_input);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const CsvError& e) {
        std::cerr << "input error at line " << e.line() << ": " << e.what()
                  << '\n';
        return 2;
    } catch (const TieDetected& e) {
        std::cerr << "tie detected: " << e.what() << " (rerun with --allow-ties)\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const PrecisionError& e) {
        std::cerr << "precision exhausted: " << e.what() << '\n';
        return 3;
    } catch (const ResourceError& e) {
        std::cerr << "resource budget: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
