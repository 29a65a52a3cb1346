#include <doctest.h>

#include <random>

#include "abundanza/arithmetic.hpp"
#include "oracles.hpp"

using namespace abundanza;

namespace {

Factorization fac(std::initializer_list<std::pair<long, unsigned>> pps) {
    std::vector<PrimePower> v;
    for (const auto& [p, e] : pps) v.push_back({mpz_class(p), e});
    return Factorization(std::move(v));
}

}  // namespace

TEST_CASE("primes_up_to") {
    CHECK(primes_up_to(2) == std::vector<std::uint64_t>{2});
    CHECK(primes_up_to(10) == std::vector<std::uint64_t>{2, 3, 5, 7});
    std::vector<std::uint64_t> p30 = primes_up_to(30);
    CHECK(p30.size() == 10);
    CHECK(p30.back() == 29);
    CHECK(p30 == oracle::primes(30));
    CHECK(primes_up_to(10'000) == oracle::primes(10'000));
    CHECK_THROWS_AS(primes_up_to(1), DomainError);
    CHECK_THROWS_AS(primes_up_to(1'000'000, 1000), ResourceError);
}

TEST_CASE("deterministic primality") {
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(3));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64(561));   // Carmichael
    CHECK_FALSE(is_prime_u64(6601));  // Carmichael
    CHECK(is_prime_u64((1ULL << 61) - 1));
    CHECK_FALSE(is_prime_u64((1ULL << 61) - 3));
    for (std::uint64_t n = 1; n <= 2000; ++n)
        CHECK(is_prime_u64(n) == oracle::is_prime(n));
    CHECK(is_prime(mpz_class("2305843009213693951")));
    CHECK_THROWS_AS(is_prime(mpz_class("3317044064679887385961982")),
                    DomainError);
}

TEST_CASE("factorization type invariants") {
    CHECK_THROWS_AS(fac({{4, 1}}), DomainError);          // not prime
    CHECK_THROWS_AS(fac({{3, 1}, {2, 1}}), DomainError);  // order
    CHECK_THROWS_AS(fac({{2, 0}}), DomainError);          // exponent
    Factorization one;
    CHECK(one.is_one());
    CHECK(one.value() == 1);
    CHECK(sigma_of_factorization(one) == 1);
    CHECK(one.to_string() == "1");
    Factorization f = fac({{2, 4}, {3, 2}, {5, 1}, {7, 1}});
    CHECK(f.value() == 5040);
    CHECK(f.to_string() == "2^4 * 3^2 * 5 * 7");
    CHECK(Factorization::of_u64(5040).value() == 5040);
    CHECK(Factorization::of_u64(1).is_one());
    CHECK(f.largest_prime() == 7);
    f.bump(11);
    CHECK(f.value() == 55440);
    f.bump(2);
    CHECK(f.exponent_of(2) == 5);
}

TEST_CASE("sigma by formula vs trial-division oracle") {
    CHECK(sigma_of_factorization(fac({{2, 1}})) == 3);
    CHECK(sigma_of_factorization(fac({{2, 2}, {3, 1}})) == 28);
    mpz_class s5040 = sigma_of_factorization(fac({{2, 4}, {3, 2}, {5, 1}, {7, 1}}));
    CHECK(s5040 == oracle::divisor_sum(5040));
    CHECK(s5040 == 19344);
    CHECK(sigma_u64(5040) == 19344);
    CHECK(sigma_u64(1) == 1);
}

TEST_CASE("sigma sieve") {
    SigmaTable t = sigma_sieve(10);
    CHECK(t.sigma == std::vector<std::uint64_t>{0, 1, 3, 4, 7, 6, 12, 8, 15,
                                                13, 18});
    CHECK(t[1] == 1);
    CHECK_THROWS_AS(sigma_sieve(2'000'000, 1000), ResourceError);
    CHECK_THROWS_AS(sigma_sieve(std::uint64_t(2'000'000'000),
                                std::uint64_t(3'000'000'000)),
                    DomainError);

    // full sweep against the oracle
    SigmaTable big = sigma_sieve(100'000);
    for (std::uint64_t n = 1; n <= 100'000; ++n)
        REQUIRE(big[n] == oracle::divisor_sum(n));
    // sigma[p] = p + 1
    for (std::uint64_t p : primes_up_to(100'000)) REQUIRE(big[p] == p + 1);

    // segments agree with the dense table
    for_each_sigma_segment(
        70'000, 90'000, 4096,
        [&](std::uint64_t lo, std::span<const std::uint64_t> vals) {
            for (std::size_t i = 0; i < vals.size(); ++i)
                REQUIRE(vals[i] == big[lo + i]);
        });
}

TEST_CASE("sieve agrees with the factorization formula on random n") {
    std::mt19937 rng(42);
    SigmaTable t = sigma_sieve(200'000);
    std::uniform_int_distribution<std::uint64_t> dist(2, 200'000);
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t n = dist(rng);
        Factorization f = Factorization::of_u64(n);
        CHECK(sigma_of_factorization(f) == t[n]);
    }
}

TEST_CASE("sigma is multiplicative on coprime parts") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::uint64_t> dist(2, 30'000);
    for (int i = 0; i < 200; ++i) {
        std::uint64_t a = dist(rng), b = dist(rng);
        mpz_class g;
        mpz_class az(static_cast<unsigned long>(a)),
            bz(static_cast<unsigned long>(b));
        mpz_gcd(g.get_mpz_t(), az.get_mpz_t(), bz.get_mpz_t());
        if (g != 1) continue;
        CHECK(sigma_of_factorization(Factorization::of_u64(a * b)) ==
              sigma_of_factorization(Factorization::of_u64(a)) *
                  sigma_of_factorization(Factorization::of_u64(b)));
    }
}

TEST_CASE("abundancy") {
    CHECK(abundancy(Factorization::of_u64(6)) == mpq_class(2));
    CHECK(abundancy(Factorization::of_u64(2)) == mpq_class(3, 2));
    CHECK(abundancy(Factorization::of_u64(12)) == mpq_class(7, 3));
    // > 1 for n >= 2; = 2 exactly at the perfect numbers below 10^4
    std::vector<std::uint64_t> perfect;
    for (std::uint64_t n = 2; n < 10'000; ++n) {
        mpq_class ab = abundancy(Factorization::of_u64(n));
        CHECK(ab > 1);
        if (ab == 2) perfect.push_back(n);
    }
    CHECK(perfect == std::vector<std::uint64_t>{6, 28, 496, 8128});
}

TEST_CASE("value_and_log") {
    ValueAndLog a = value_and_log(fac({{2, 1}}), 128);
    CHECK(*a.value == 2);
    // log 2 = 0.69314718055994530941...
    mpq_class l2(mpf_class("0.6931471805599453094172321214581765680755", 512));
    mpq_class d = a.log.mid_rational() - l2;
    if (sgn(d) < 0) d = -d;
    CHECK(d < mpq_class(mpf_class("1e-30", 512)));

    ValueAndLog e = value_and_log(Factorization(), 128);
    CHECK(*e.value == 1);
    CHECK(e.log.contains(mpq_class(0)));

    // two-route agreement at doubled precision: the sharp ball's midpoint
    // lies in the coarse ball, for log 5040 computed from the factors
    Factorization f5040 = fac({{2, 4}, {3, 2}, {5, 1}, {7, 1}});
    ValueAndLog c = value_and_log(f5040, 128);
    RealBall direct = log(RealBall::exact(mpz_class(5040), 256));
    CHECK(c.log.contains(direct.mid_rational()));
    CHECK(c.log.overlaps(direct));
    CHECK(value_and_log(f5040, 128, false).value.has_value() == false);
}

TEST_CASE("parse_rational") {
    CHECK(parse_rational("3/4") == mpq_class(3, 4));
    CHECK(parse_rational("-7") == mpq_class(-7));
    CHECK(parse_rational("0.5") == mpq_class(1, 2));
    CHECK(parse_rational("-1.25") == mpq_class(-5, 4));
    CHECK_THROWS_AS(parse_rational("abc"), DomainError);
    CHECK_THROWS_AS(parse_rational(""), DomainError);
}
