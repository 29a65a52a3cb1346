#include <doctest.h>

#include <cstdio>
#include <random>
#include <sstream>

#include "abundanza/verifiers.hpp"
#include "oracles.hpp"

using namespace abundanza;

namespace {

bool close_to(const RealBall& b, const char* decimal, const char* tol) {
    mpq_class q = b.mid_rational() - mpq_class(mpf_class(decimal, 512));
    if (sgn(q) < 0) q = -q;
    return q <= mpq_class(mpf_class(tol, 512));
}

// Robin violations in [3, 5040], frozen from a trial-division oracle run.
const std::vector<std::uint64_t> kRobinViolations = {
    3,  4,  5,  6,  8,   9,   10,  12,  16,  18,  20,  24,  30,
    36, 48, 60, 72, 84,  120, 180, 240, 360, 720, 840, 2520, 5040};

}  // namespace

TEST_CASE("gronwall statistic") {
    RealBall g5040 = gronwall(5040, 128);
    RealBall eg = exp(RealBall::euler_gamma(128));
    CHECK(cmp(g5040, eg) == SignDecision::Positive);
    CHECK_THROWS_AS(gronwall(2, 128), DomainError);

    // G(n) (n log log n) recovers sigma(n) exactly, n = 360
    RealBall nb = RealBall::exact_int(360, 128);
    RealBall recovered = gronwall(360, 128) * (nb * log(log(nb)));
    CHECK(recovered.contains(mpz_class(oracle::divisor_sum(360))));

    // G(n) < e^gamma on a random sample above 5040
    std::mt19937 rng(99);
    std::uniform_int_distribution<std::uint64_t> dist(5041, 1'000'000);
    for (int i = 0; i < 100; ++i)
        CHECK(cmp(gronwall(dist(rng), 128), eg) == SignDecision::Negative);
}

TEST_CASE("robin_scan reproduces the oracle-frozen violation set") {
    ScanResult res = robin_scan(3, 5040);
    CHECK(res.violations == kRobinViolations);
    CHECK(res.violations.back() == 5040);
    CHECK(res.last_certified == 5040);

    // independent recomputation: trial-division sigma + certified ball sign
    std::vector<std::uint64_t> recomputed;
    RealBall eg = exp(RealBall::euler_gamma(192));
    for (std::uint64_t n = 3; n <= 5040; ++n) {
        RealBall nb = RealBall::exact_uint(n, 192);
        RealBall r0 = eg * nb * log(log(nb)) -
                      RealBall::exact_uint(oracle::divisor_sum(n), 192);
        REQUIRE(r0.sign() != SignDecision::Ambiguous);
        if (r0.sign() == SignDecision::Negative) recomputed.push_back(n);
    }
    CHECK(recomputed == kRobinViolations);
}

TEST_CASE("robin_scan finds nothing above 5040 at desk scale") {
    ScanResult res = robin_scan(5041, 200'000);
    CHECK(res.violations.empty());
    CHECK(res.last_certified == 200'000);
}

TEST_CASE("robin scan record and frontier streaming") {
    std::vector<std::uint64_t> record_ns;
    std::vector<std::uint64_t> frontiers;
    ScanOptions opts;
    opts.on_record = [&](const VerificationRecord& rec) {
        record_ns.push_back(rec.n);
        CHECK(rec.sigma == oracle::divisor_sum(rec.n));
        CHECK(rec.r0.sign() == SignDecision::Negative);
        REQUIRE(rec.verdicts.size() == 1);
        CHECK(rec.verdicts[0].first == "robin");
    };
    opts.on_frontier = [&](std::uint64_t n) { frontiers.push_back(n); };
    ScanResult res = robin_scan(3, 5040, opts);
    CHECK(record_ns == kRobinViolations);
    REQUIRE_FALSE(frontiers.empty());
    CHECK(frontiers.back() == 5040);
    CHECK(std::is_sorted(frontiers.begin(), frontiers.end()));
    CHECK(res.violations.size() == 26);
}

TEST_CASE("robin lower bound") {
    CHECK(robin_lower_bound_check(3) == SignDecision::Positive);
    CHECK(robin_lower_bound_check(4) == SignDecision::Positive);
    CHECK(robin_lower_bound_check(12) == SignDecision::Positive);
    CHECK(robin_lower_bound_check(5040) == SignDecision::Positive);
    CHECK_THROWS_AS(robin_lower_bound_check(2), DomainError);
    ScanResult res = robin_lower_scan(3, 20'000);
    CHECK(res.violations.empty());
}

TEST_CASE("the constant 0.6482 fails at exactly n = 12") {
    // sup over n >= 3 of (sigma(n)/n - e^gamma log log n) log log n is
    // 0.64821364..., attained at n = 12, so a constant rounded down to
    // 0.6482 cannot clear it. Certified both ways.
    mpq_class printed(6482, 10000);
    CHECK(robin_lower_bound_check(12, 128, 4096, printed) ==
          SignDecision::Negative);
    for (std::uint64_t n = 3; n <= 200; ++n)
        if (n != 12)
            CHECK(robin_lower_bound_check(n, 128, 4096, printed) ==
                  SignDecision::Positive);
}

TEST_CASE("harmonic numbers") {
    CHECK(harmonic_exact(1) == 1);
    CHECK(harmonic_exact(2) == mpq_class(3, 2));
    CHECK(harmonic_exact(4) == mpq_class(25, 12));
    CHECK_THROWS_AS(harmonic_exact(10'001), DomainError);
    CHECK(harmonic(1, 128).contains(mpq_class(1)));
    CHECK(harmonic(4, 128).contains(mpq_class(25, 12)));

    // two routes across the exact threshold: exact head + ball tail equals
    // the direct ball summation
    std::uint64_t n = 12'000;
    RealBall direct = harmonic(n, 128);
    RealBall head = RealBall::exact(harmonic_exact(10'000), 128);
    RealBall tail = RealBall::exact_int(0, 128);
    for (std::uint64_t i = 10'001; i <= n; ++i)
        tail += RealBall::exact_int(1, 128) / RealBall::exact_uint(i, 128);
    CHECK(direct.overlaps(head + tail));
    CHECK((head + tail).contains(harmonic(n, 256).mid_rational()));
}

TEST_CASE("lagarias criterion values and checks") {
    CHECK(close_to(lagarias_value(2, 128), "0.317168543411802", "1e-10"));
    CHECK(close_to(lagarias_value(5040, 128), "492.318731089448", "1e-8"));
    CHECK(lagarias_check(2) == SignDecision::Positive);
    CHECK(lagarias_check(5040) == SignDecision::Positive);
    CHECK_THROWS_AS(lagarias_check(1), DomainError);

    ScanResult res = lagarias_scan(2, 20'000);
    CHECK(res.violations.empty());
    CHECK(res.last_certified == 20'000);
}

TEST_CASE("lagarias identity: two routes for L0 - R0") {
    std::mt19937 rng(31337);
    std::uniform_int_distribution<std::uint64_t> dist(21, 10'000);
    RealBall eg = exp(RealBall::euler_gamma(128));
    for (int i = 0; i < 25; ++i) {
        std::uint64_t n = dist(rng);
        RealBall lhs = lagarias_value(n, 128) - robin_deficit(n, 128);
        RealBall h = harmonic(n, 128);
        RealBall nb = RealBall::exact_uint(n, 128);
        RealBall rhs = h + exp(h) * log(h) - eg * nb * log(log(nb));
        CHECK(lhs.overlaps(rhs));
    }
}

TEST_CASE("lagarias sandwich (9)") {
    auto [l21, r21] = lagarias_sandwich(21);
    CHECK(l21 == SignDecision::Positive);
    CHECK(r21 == SignDecision::Positive);
    auto [l5040, r5040] = lagarias_sandwich(5040);
    CHECK(l5040 == SignDecision::Positive);
    CHECK(r5040 == SignDecision::Positive);
    CHECK_THROWS_AS(lagarias_sandwich(20), DomainError);

    ScanResult res = sandwich_scan(21, 20'000);
    CHECK(res.violations.empty());
    CHECK_THROWS_AS(sandwich_scan(5, 100), DomainError);
}

TEST_CASE("weighted lagarias value") {
    Weight w1{mpq_class(1)};
    RealBall lhs = lagarias_weighted(100, w1, 128);
    RealBall rhs =
        lagarias_value(100, 128) * log(RealBall::exact_int(100, 128));
    CHECK(lhs.overlaps(rhs));
    CHECK(lhs.contains(rhs.mid_rational()));
}

TEST_CASE("record CSV and frontier file") {
    VerificationRecord rec;
    rec.n = 5040;
    rec.sigma = 19344;
    rec.r0 = robin_deficit(5040, 128);
    rec.gronwall = gronwall(5040, 128);
    rec.l0 = lagarias_value(5040, 128);
    rec.verdicts.emplace_back("robin", SignDecision::Negative);
    rec.verdicts.emplace_back("lagarias", SignDecision::Positive);

    std::ostringstream out;
    write_record_csv_header(out);
    write_record_csv(out, rec);
    std::string text = out.str();
    CHECK(text.find("n,sigma,r0_mid") == 0);
    CHECK(text.find("5040,19344,") != std::string::npos);
    CHECK(text.find("robin=negative;lagarias=positive") != std::string::npos);

    std::string path = "/tmp/abundanza_frontier_test.txt";
    write_frontier(path, 123456);
    std::optional<std::uint64_t> f = read_frontier(path);
    REQUIRE(f.has_value());
    CHECK(*f == 123456);
    std::remove(path.c_str());
    CHECK_FALSE(read_frontier(path).has_value());
}

TEST_CASE("all-ball scans agree with the filtered scans") {
    // rel_margin = 1 routes every decision through certified arithmetic
    ScanOptions all_ball;
    all_ball.rel_margin = 1.0;
    CHECK(robin_scan(3, 5040, all_ball).violations == kRobinViolations);
    CHECK(robin_lower_scan(3, 2000, all_ball).violations.empty());
    CHECK(lagarias_scan(2, 2000, all_ball).violations.empty());
    CHECK(sandwich_scan(21, 2000, all_ball).violations.empty());
}

TEST_CASE("scan input validation") {
    CHECK_THROWS_AS(robin_scan(2, 100), DomainError);
    CHECK_THROWS_AS(robin_scan(50, 10), DomainError);
    ScanOptions tight;
    tight.budget_entries = 100;
    CHECK_THROWS_AS(robin_scan(3, 5040, tight), ResourceError);
}
