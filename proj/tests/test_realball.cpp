#include <doctest.h>

#include <random>
#include <vector>

#include "abundanza/realball.hpp"

using namespace abundanza;

namespace {

// |mid - q| <= tol, for expected values known only to finitely many digits.
bool close_to(const RealBall& b, const char* decimal, const char* tol) {
    mpq_class q = b.mid_rational() - mpq_class(mpf_class(decimal, 512));
    if (sgn(q) < 0) q = -q;
    return q <= mpq_class(mpf_class(tol, 512));
}

}  // namespace

TEST_CASE("euler gamma matches published digits and tightens with precision") {
    // gamma = 0.57721566490153286060651209008240243104215933593992...
    RealBall g53 = RealBall::euler_gamma(53);
    RealBall g256 = RealBall::euler_gamma(256);
    CHECK(close_to(g53, "0.5772156649015328606065120900824024310421",
                   "1e-12"));
    CHECK(close_to(g256, "0.5772156649015328606065120900824024310421",
                   "1e-40"));
    // the sharper ball sits inside the coarser one
    CHECK(g53.contains(g256.mid_rational()));
    // radius contract: doubling precision at least halves the radius
    CHECK(RealBall::euler_gamma(106).rad_rational() <=
          g53.rad_rational() / 2);
    // exp(gamma) = 1.78107241799019798523650410310717954916964521430343...
    RealBall eg = exp(RealBall::euler_gamma(128));
    CHECK(close_to(eg, "1.7810724179901979852365041031071795491696",
                   "1e-30"));
}

TEST_CASE("ball arithmetic basics") {
    RealBall one = RealBall::exact_int(1, 128);
    CHECK(log(one).contains(mpq_class(0)));
    RealBall seven = RealBall::exact_int(7, 128);
    CHECK(exp(log(seven)).contains(mpq_class(7)));

    RealBall n5040 = RealBall::exact_int(5040, 128);
    RealBall l = pow(log(n5040), one);
    CHECK(close_to(l, "8.5251613610654143002", "1e-15"));

    RealBall q = RealBall::exact(mpq_class(1, 3), 128);
    CHECK(q.contains(mpq_class(1, 3)));
    CHECK((q + q + q).contains(mpq_class(1)));

    RealBall s = sqrt(RealBall::exact_int(2, 128));
    CHECK((s * s).contains(mpq_class(2)));
    CHECK(RealBall::exact_int(3, 128).pow_int(4).contains(mpz_class(81)));
    CHECK(RealBall::exact_int(2, 128).pow_int(-1).contains(mpq_class(1, 2)));
}

TEST_CASE("sign decisions") {
    CHECK(RealBall::from_midpoint_radius(1.0, 0.1).sign() ==
          SignDecision::Positive);
    CHECK(RealBall::from_midpoint_radius(0.0, 0.1).sign() ==
          SignDecision::Ambiguous);
    CHECK(RealBall::from_midpoint_radius(-1e-9, 1e-12).sign() ==
          SignDecision::Negative);
    CHECK(RealBall::exact_int(0, 64).sign() == SignDecision::Zero);
    CHECK(RealBall::exact_int(-3, 64).sign() == SignDecision::Negative);
}

TEST_CASE("certified floor") {
    CHECK(certified_floor(RealBall::from_midpoint_radius(3.7, 0.1)) == 3);
    CHECK_THROWS_AS(certified_floor(RealBall::from_midpoint_radius(4.0, 0.01)),
                    PrecisionError);
    CHECK(certified_floor(RealBall::from_midpoint_radius(2.9999, 1e-8)) == 2);
    CHECK(certified_floor(RealBall::exact_int(5, 64)) == 5);
    CHECK(certified_floor(RealBall::from_midpoint_radius(-0.5, 0.1)) == -1);
}

TEST_CASE("domain handling for log, sqrt, div") {
    CHECK_THROWS_AS(log(RealBall::exact_int(-1, 64)), DomainError);
    CHECK_THROWS_AS(log(RealBall::exact_int(0, 64)), DomainError);
    CHECK_THROWS_AS(log(RealBall::from_midpoint_radius(0.0, 0.1)),
                    PrecisionError);
    CHECK_THROWS_AS(sqrt(RealBall::exact_int(-2, 64)), DomainError);
    CHECK_THROWS_AS(sqrt(RealBall::from_midpoint_radius(0.0, 0.5)),
                    PrecisionError);
    RealBall one = RealBall::exact_int(1, 64);
    CHECK_THROWS_AS(one / RealBall::exact_int(0, 64), DomainError);
    CHECK_THROWS_AS(one / RealBall::from_midpoint_radius(0.0, 0.5),
                    PrecisionError);
    CHECK((sqrt(RealBall::exact_int(0, 64))).sign() == SignDecision::Zero);
}

namespace {

// Random positive-leaning expression evaluated from scratch at any
// precision; the generator replays the same ops for every precision.
struct ExprGen {
    std::vector<int> ops;
    std::vector<long> leaves;

    static ExprGen random(std::mt19937& rng, int depth) {
        ExprGen g;
        std::uniform_int_distribution<int> op(0, 6);
        std::uniform_int_distribution<long> leaf(1, 1000);
        for (int i = 0; i < depth; ++i) {
            g.ops.push_back(op(rng));
            g.leaves.push_back(leaf(rng));
        }
        return g;
    }

    RealBall eval(Precision prec) const {
        RealBall acc = RealBall::exact_int(leaves[0], prec);
        for (std::size_t i = 1; i < ops.size(); ++i) {
            RealBall leaf = RealBall::exact_int(leaves[i], prec);
            switch (ops[i]) {
                case 0: acc = acc + leaf; break;
                case 1: acc = acc - leaf; break;
                case 2: acc = acc * leaf; break;
                case 3: acc = acc / leaf; break;
                case 4: acc = log(abs(acc) + RealBall::exact_int(1, prec)); break;
                case 5: acc = sqrt(abs(acc)); break;
                default:
                    // exp with a bounded argument: |acc|/(|acc| + 1000) < 1
                    acc = exp(acc / (abs(acc) + RealBall::exact_int(1000, prec)));
                    break;
            }
        }
        return acc;
    }
};

}  // namespace

TEST_CASE("containment is monotone under composition") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 200; ++trial) {
        ExprGen g = ExprGen::random(rng, 8);
        RealBall a = g.eval(64);
        RealBall b = g.eval(128);
        RealBall c = g.eval(256);
        mpq_class ref = c.mid_rational();
        CHECK(a.contains(ref));
        CHECK(b.contains(ref));
        CHECK(a.overlaps(b));
    }
}

TEST_CASE("strict signs never flip at higher precision") {
    std::mt19937 rng(987654321);
    for (int trial = 0; trial < 200; ++trial) {
        ExprGen g = ExprGen::random(rng, 8);
        RealBall shifted =
            g.eval(64) - RealBall::exact(mpq_class(1234567, 891), 64);
        SignDecision s64 = shifted.sign();
        if (s64 == SignDecision::Ambiguous) continue;
        RealBall sharp =
            g.eval(256) - RealBall::exact(mpq_class(1234567, 891), 256);
        SignDecision s256 = sharp.sign();
        if (s256 != SignDecision::Ambiguous) CHECK(s64 == s256);
    }
}

TEST_CASE("cmp and to_string") {
    RealBall a = RealBall::from_midpoint_radius(1.0, 0.01);
    RealBall b = RealBall::from_midpoint_radius(2.0, 0.01);
    CHECK(cmp(a, b) == SignDecision::Negative);
    CHECK(cmp(b, a) == SignDecision::Positive);
    CHECK(cmp(a, a) == SignDecision::Ambiguous);  // overlapping, inexact
    RealBall e = RealBall::exact_int(4, 64);
    CHECK(cmp(e, RealBall::exact_int(4, 128)) == SignDecision::Zero);
    CHECK(RealBall::exact_int(42, 64).to_string() == "42");
    CHECK(e.rounded_to(32).contains(mpq_class(4)));
}
