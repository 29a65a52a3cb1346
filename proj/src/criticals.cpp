#include "abundanza/criticals.hpp"

#include <algorithm>
#include <cassert>

namespace abundanza {

RealBall critical_epsilon_value(std::uint64_t p, unsigned k, Precision prec) {
    if (!is_prime_u64(p)) throw DomainError("F(p, k) requires prime p");
    if (k < 1) throw DomainError("F(p, k) requires k >= 1");
    // S = p + p^2 + ... + p^k, exactly
    mpz_class pz(static_cast<unsigned long>(p));
    mpz_class s = 0, pw = 1;
    for (unsigned i = 0; i < k; ++i) {
        pw *= pz;
        s += pw;
    }
    RealBall sb = RealBall::exact(s, prec);
    RealBall s1b = RealBall::exact(mpz_class(s + 1), prec);
    return (log(s1b) - log(sb)) / log(RealBall::exact(pz, prec));
}

CriticalEpsilon critical_epsilon(std::uint64_t p, unsigned k, Precision prec) {
    return CriticalEpsilon{p, k, critical_epsilon_value(p, k, prec)};
}

EpsilonStream::EpsilonStream(Options opts) : opts_(opts) {
    prime_pool_ = primes_up_to(1 << 10);
}

void EpsilonStream::ensure_seeded() {
    // Seed primes until the next unseeded one is certified below the front.
    // F(p, 1) is strictly decreasing in p, so nothing past that prime can
    // outrank the front either; pops only lower the front, hence the
    // re-check before every pop.
    for (;;) {
        if (next_prime_idx_ >= prime_pool_.size()) {
            std::uint64_t new_limit = prime_pool_.back() * 4;
            prime_pool_ = primes_up_to(new_limit);
        }
        std::uint64_t p = prime_pool_[next_prime_idx_];
        RealBall v = critical_epsilon_value(p, 1, opts_.ladder.start);
        if (!heap_.empty() &&
            cmp(v, heap_.top().value) == SignDecision::Negative) {
            break;
        }
        heap_.push(Entry{v.mid_double(), p, 1, v});
        ++next_prime_idx_;
    }
}

EpsilonStream::Entry EpsilonStream::pop_entry() {
    Entry e = heap_.top();
    heap_.pop();
    return e;
}

std::vector<CriticalEpsilon> EpsilonStream::next_group() {
    ensure_seeded();
    Entry e = pop_entry();
    ensure_seeded();
    Entry front = heap_.top();

    // Certify strict separation from the new front, sharpening both
    // candidates along the ladder.
    RealBall ev = e.value;
    RealBall tv = front.value;
    bool separated = false;
    for (Precision prec = opts_.ladder.start;; prec *= 2) {
        SignDecision s = cmp(ev, tv);
        if (s == SignDecision::Positive) {
            separated = true;
            break;
        }
        if (s == SignDecision::Negative || s == SignDecision::Zero)
            throw Error("epsilon stream ordering violated");
        if (prec * 2 > opts_.ladder.max) break;
        ev = critical_epsilon_value(e.p, e.k, prec * 2);
        tv = critical_epsilon_value(front.p, front.k, prec * 2);
    }

    std::vector<CriticalEpsilon> group;
    group.push_back(CriticalEpsilon{e.p, e.k, ev});
    if (!separated) {
        if (e.p == front.p)
            throw PrecisionError(
                "could not separate two epsilons of the same prime");
        if (!opts_.allow_ties)
            throw TieDetected("critical epsilons inseparable at max precision",
                              {e.p, e.k}, {front.p, front.k});
        pop_entry();
        group.push_back(CriticalEpsilon{front.p, front.k, tv});
    }
    for (const CriticalEpsilon& g : group) {
        RealBall succ = critical_epsilon_value(g.p, g.k + 1, opts_.ladder.start);
        heap_.push(Entry{succ.mid_double(), g.p, g.k + 1, std::move(succ)});
    }
    return group;
}

CriticalEpsilon EpsilonStream::next() {
    std::vector<CriticalEpsilon> g = next_group();
    if (g.size() != 1)
        throw TieDetected("tie group in single-epsilon stream",
                          {g[0].p, g[0].k}, {g[1].p, g[1].k});
    return g[0];
}

std::vector<CriticalEpsilon> epsilon_stream(std::size_t count,
                                            PrecisionLadder ladder) {
    if (count < 1) throw DomainError("epsilon_stream requires count >= 1");
    EpsilonStream stream(EpsilonStream::Options{ladder, false});
    std::vector<CriticalEpsilon> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(stream.next());
    return out;
}

namespace {

// a_eps(p) via the closed form; PrecisionError propagates to the ladder.
long exponent_for(std::uint64_t p, const RealBall& eps, Precision prec) {
    RealBall pb = RealBall::exact_uint(p, prec);
    RealBall lp = log(pb);
    RealBall pe = exp(eps * lp);
    RealBall one = RealBall::exact_int(1, prec);
    RealBall num = log(pb * pe - one) - log(pe - one);
    mpz_class fl = certified_floor(num / lp);
    return mpz_get_si(fl.get_mpz_t()) - 1;
}

}  // namespace

Factorization n_for_epsilon(const std::function<RealBall(Precision)>& eps_at,
                            PrecisionLadder ladder) {
    return with_precision_ladder(ladder, [&](Precision prec) {
        RealBall eps = eps_at(prec);
        SignDecision pos = eps.sign();
        SignDecision below_one =
            (RealBall::exact_int(1, prec) - eps).sign();
        if (pos == SignDecision::Negative || pos == SignDecision::Zero ||
            below_one == SignDecision::Negative ||
            below_one == SignDecision::Zero)
            throw DomainError("n_for_epsilon requires eps in (0, 1)");
        if (pos == SignDecision::Ambiguous ||
            below_one == SignDecision::Ambiguous)
            throw PrecisionError("eps not certified inside (0, 1)");

        std::vector<PrimePower> factors;
        std::vector<std::uint64_t> pool = primes_up_to(1 << 10);
        for (std::size_t i = 0;; ++i) {
            if (i >= pool.size()) pool = primes_up_to(pool.back() * 4);
            std::uint64_t p = pool[i];
            long a = exponent_for(p, eps, prec);
            if (a < 0) throw Error("negative closed-form exponent");
            // F(p, 1) strictly decreases in p, so the first prime with
            // a_eps(p) = 0 ends the product.
            if (a == 0) break;
            factors.push_back({mpz_class(static_cast<unsigned long>(p)),
                               static_cast<unsigned>(a)});
        }
        return Factorization(std::move(factors));
    });
}

Factorization n_for_epsilon(const mpq_class& eps, PrecisionLadder ladder) {
    if (eps <= 0 || eps >= 1)
        throw DomainError("n_for_epsilon requires eps in (0, 1)");
    return n_for_epsilon(
        [&eps](Precision prec) { return RealBall::exact(eps, prec); }, ladder);
}

CaEnumerator::CaEnumerator(Options opts)
    : opts_(opts),
      stream_(EpsilonStream::Options{opts.ladder, opts.allow_ties}),
      log_n_(opts.ladder.start) {}

std::vector<CriticalEpsilon> CaEnumerator::take_group() {
    if (have_pending_) {
        have_pending_ = false;
        return std::move(pending_);
    }
    return stream_.next_group();
}

void CaEnumerator::apply(const CriticalEpsilon& eps) {
    mpz_class p(static_cast<unsigned long>(eps.p));
    if (current_.exponent_of(p) + 1 != eps.k)
        throw Error("epsilon crossing out of order for p=" +
                    std::to_string(eps.p));
    current_.bump(p);
    value_ *= p;

    auto it = std::find_if(sigma_parts_.begin(), sigma_parts_.end(),
                           [&](const auto& e) { return e.first == eps.p; });
    mpz_class pk;
    mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), eps.k);
    if (it == sigma_parts_.end()) {
        sigma_parts_.emplace_back(eps.p, mpz_class(1 + pk));
        sigma_ *= sigma_parts_.back().second;
    } else {
        mpz_divexact(sigma_.get_mpz_t(), sigma_.get_mpz_t(),
                     it->second.get_mpz_t());
        it->second += pk;
        sigma_ *= it->second;
    }
    log_n_ += log(RealBall::exact(p, opts_.ladder.start));
}

CaRecord CaEnumerator::step_with_group(std::vector<CriticalEpsilon> group,
                                       std::vector<CriticalEpsilon> lookahead) {
    if (group.empty()) throw Error("empty crossing group");
    for (const CriticalEpsilon& e : group) apply(e);
    ++index_;

    CaRecord rec;
    rec.index = index_;
    rec.n = current_;
    rec.value = value_;
    rec.sigma = sigma_;
    rec.log_n = log_n_;
    rec.eps_hi = group.front();
    rec.eps_lo = lookahead.front();
    std::vector<PrimePower> q;
    for (const CriticalEpsilon& e : group)
        q.push_back({mpz_class(static_cast<unsigned long>(e.p)), 1});
    std::sort(q.begin(), q.end(),
              [](const PrimePower& a, const PrimePower& b) {
                  return a.prime < b.prime;
              });
    rec.quotient = Factorization(std::move(q));
    rec.tie = group.size() > 1;
    return rec;
}

CaRecord CaEnumerator::next() {
    std::vector<CriticalEpsilon> group = take_group();
    pending_ = stream_.next_group();
    have_pending_ = true;
    return step_with_group(std::move(group), pending_);
}

std::vector<CaRecord> ca_enumerate(std::size_t count,
                                   CaEnumerator::Options opts) {
    if (count < 1) throw DomainError("ca_enumerate requires count >= 1");
    CaEnumerator en(opts);
    std::vector<CaRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(en.next());
    return out;
}

std::vector<std::uint64_t> sa_enumerate(std::uint64_t limit,
                                        std::uint64_t budget_entries) {
    if (limit < 1) throw DomainError("sa_enumerate requires limit >= 1");
    if (limit > kSigmaLimitCap)
        throw DomainError("sa_enumerate limit above the 10^9 cap");
    if (limit + 1 > budget_entries)
        throw ResourceError("sa_enumerate limit exceeds the sieve budget");
    std::vector<std::uint64_t> out;
    std::uint64_t best_sigma = 0, best_n = 1;
    for_each_sigma_segment(
        1, limit, 1 << 20,
        [&](std::uint64_t seg_lo, std::span<const std::uint64_t> vals) {
            for (std::size_t i = 0; i < vals.size(); ++i) {
                std::uint64_t n = seg_lo + i;
                // sigma(n)/n > best  <=>  sigma(n) * best_n > best_sigma * n
                unsigned __int128 lhs =
                    static_cast<unsigned __int128>(vals[i]) * best_n;
                unsigned __int128 rhs =
                    static_cast<unsigned __int128>(best_sigma) * n;
                if (lhs > rhs) {
                    out.push_back(n);
                    best_sigma = vals[i];
                    best_n = n;
                }
            }
        });
    return out;
}

std::vector<CaDiagnostic> ca_diagnostics(std::span<const CaRecord> records) {
    std::vector<CaDiagnostic> out;
    for (std::size_t i = 1; i < records.size(); ++i) {
        CaDiagnostic d;
        d.index = records[i].index;
        d.log_ratio = records[i - 1].log_n / records[i].log_n;
        d.largest_prime = records[i].n.largest_prime();
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace abundanza
