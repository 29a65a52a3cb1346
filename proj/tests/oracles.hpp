// Test-only oracles, kept independent of the library's computation paths:
// plain trial division, long-double brute force, exact rational scans.
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline std::uint64_t divisor_sum(std::uint64_t n) {
    std::uint64_t s = 0;
    for (std::uint64_t d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        s += d;
        if (d != n / d) s += n / d;
    }
    return s;
}

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<std::uint64_t> primes(std::uint64_t limit) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t n = 2; n <= limit; ++n)
        if (is_prime(n)) out.push_back(n);
    return out;
}

// Superabundant numbers <= limit via exact rational record scan.
inline std::vector<std::uint64_t> superabundant(std::uint64_t limit) {
    std::vector<std::uint64_t> out;
    mpq_class best(0);
    for (std::uint64_t n = 1; n <= limit; ++n) {
        mpq_class r(static_cast<unsigned long>(divisor_sum(n)),
                    static_cast<unsigned long>(n));
        r.canonicalize();
        if (r > best) {
            best = r;
            out.push_back(n);
        }
    }
    return out;
}

// argmax of sigma(k)/k^(1+eps) over k <= limit; margins at the tested eps
// are far beyond long-double noise.
inline std::uint64_t argmax_sigma_power(double eps, std::uint64_t limit) {
    std::uint64_t best_k = 1;
    long double best = -1e30L;
    for (std::uint64_t k = 1; k <= limit; ++k) {
        long double v = std::log(static_cast<long double>(divisor_sum(k))) -
                        (1.0L + static_cast<long double>(eps)) *
                            std::log(static_cast<long double>(k));
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace oracle
