#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cfspec/errors.hpp"

namespace cfspec {

inline mpz_class isqrt(const mpz_class& n) {
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline bool is_perfect_square(const mpz_class& n) {
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline bool is_probable_prime(const mpz_class& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 32) != 0;
}

namespace detail {

// Pollard rho (Brent variant).  Returns a nontrivial factor of composite n,
// or 0 if the iteration budget ran out.
inline mpz_class pollard_rho(const mpz_class& n, unsigned long seed, unsigned long max_iters) {
    mpz_class x = 2 + seed, y = x, c = 1 + seed, d = 1;
    unsigned long iters = 0;
    while (d == 1) {
        if (++iters > max_iters) return 0;
        x = (x * x + c) % n;
        y = (y * y + c) % n;
        y = (y * y + c) % n;
        mpz_class diff = x - y;
        if (diff < 0) diff = -diff;
        if (diff == 0) return 0;  // cycle without factor; caller reseeds
        mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
    }
    return d == n ? mpz_class(0) : d;
}

inline void factor_into(const mpz_class& n, std::vector<mpz_class>& primes, unsigned long budget) {
    if (n == 1) return;
    if (is_probable_prime(n)) {
        primes.push_back(n);
        return;
    }
    if (is_perfect_square(n)) {
        mpz_class r = isqrt(n);
        factor_into(r, primes, budget);
        // each prime of r appears twice in n
        auto sz = primes.size();
        factor_into(r, primes, budget);
        (void)sz;
        return;
    }
    for (unsigned long seed = 0; seed < 24; ++seed) {
        mpz_class d = pollard_rho(n, seed, budget);
        if (d != 0) {
            factor_into(d, primes, budget);
            factor_into(mpz_class(n / d), primes, budget);
            return;
        }
    }
    throw budget_error("factorization budget exhausted for " + n.get_str());
}

}  // namespace detail

// Splits n >= 1 as s^2 * m with m squarefree; returns (m, s).
// Trial division for small primes, Pollard rho beyond, with an iteration
// budget.  Results are memoized: spectrum computations hit the same
// discriminants over and over.
inline std::pair<mpz_class, mpz_class> squarefree_split_uncached(
    const mpz_class& n, unsigned long rho_budget = 4'000'000) {
    if (n < 1) throw domain_error("squarefree_split requires n >= 1");
    mpz_class m = 1, s = 1, rest = n;
    for (unsigned long p = 2; p <= 20'000 && rest > 1; p += (p == 2 ? 1 : 2)) {
        if (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
                rest /= p;
                ++e;
            }
            for (unsigned i = 0; i + 1 < e; i += 2) s *= p;
            if (e % 2) m *= p;
        }
        if (p > 2 && mpz_class(p) * p > rest) break;
    }
    if (rest > 1) {
        if (is_probable_prime(rest)) {
            m *= rest;
        } else {
            std::vector<mpz_class> primes;
            detail::factor_into(rest, primes, rho_budget);
            std::sort(primes.begin(), primes.end());
            for (size_t i = 0; i < primes.size();) {
                size_t j = i;
                while (j < primes.size() && primes[j] == primes[i]) ++j;
                size_t e = j - i;
                for (size_t k = 0; k + 1 < e; k += 2) s *= primes[i];
                if (e % 2) m *= primes[i];
                i = j;
            }
        }
    }
    return {m, s};
}

inline std::pair<mpz_class, mpz_class> squarefree_split(const mpz_class& n,
                                                        unsigned long rho_budget = 4'000'000) {
    thread_local std::map<mpz_class, std::pair<mpz_class, mpz_class>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto res = squarefree_split_uncached(n, rho_budget);
    if (cache.size() < 200'000) cache.emplace(n, res);
    return res;
}

}  // namespace cfspec
