#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cfspec/cf.hpp"
#include "cfspec/errors.hpp"

namespace cfspec {

// A Gauss-Cantor set: digit sequences formed by concatenating blocks from a
// finite alphabet, optionally restricted by an allowed-successor relation.
// An empty transition matrix means every succession is allowed.
struct CantorSpec {
    std::vector<std::vector<mpz_class>> blocks;
    std::vector<std::vector<bool>> transition;  // transition[i][j]: block j may follow block i
    std::string description;

    bool complete() const { return transition.empty(); }
    bool allowed(std::size_t i, std::size_t j) const {
        return complete() || transition[i][j];
    }
};

enum class Side { lower, upper };

struct DimensionEstimate {
    double gamma = 0.0;
    int level = 1;
    Side side = Side::lower;
    double residual = 0.0;
    bool certified = false;  // directed-rounding check passed for this side
};

// Alphabet {(1), ..., (k)}: digits bounded by k, complete transitions.
inline CantorSpec make_spec_ck(int k) {
    if (k < 1) throw domain_error("ck spec needs k >= 1");
    CantorSpec s;
    for (int d = 1; d <= k; ++d) s.blocks.push_back({mpz_class(d)});
    s.description = "ck(" + std::to_string(k) + ")";
    return s;
}

// Alphabet {(1,1,j) : k^2 <= j <= k^3}, complete transitions.
inline CantorSpec make_spec_xk(int k) {
    if (k < 2) throw domain_error("xk spec needs k >= 2");
    CantorSpec s;
    for (long j = static_cast<long>(k) * k; j <= static_cast<long>(k) * k * k; ++j)
        s.blocks.push_back({mpz_class(1), mpz_class(1), mpz_class(j)});
    s.description = "xk(" + std::to_string(k) + ")";
    return s;
}

inline CantorSpec make_spec_custom(std::vector<std::vector<mpz_class>> blocks,
                                   std::vector<std::vector<bool>> transition = {}) {
    if (blocks.empty()) throw domain_error("custom spec needs a nonempty alphabet");
    for (const auto& b : blocks) {
        if (b.empty()) throw domain_error("custom spec blocks must be nonempty words");
        for (const auto& d : b)
            if (d < 1) throw domain_error("custom spec digits must be positive");
    }
    if (!transition.empty() && transition.size() != blocks.size())
        throw domain_error("transition matrix size must match the alphabet");
    CantorSpec s;
    s.blocks = std::move(blocks);
    s.transition = std::move(transition);
    s.description = "custom";
    return s;
}

// Continuant (convergent denominator) of a digit word.
inline mpz_class word_continuant(const std::vector<mpz_class>& word) {
    // q_n of [0; w_1..w_n] by the continuant recurrence
    mpz_class q = 1, qm1 = 1, qm2 = 0;
    for (const auto& a : word) {
        q = a * qm1 + qm2;
        qm2 = qm1;
        qm1 = q;
    }
    return q;
}

// Expansion-factor bounds for the inverse branch of the word's cylinder:
// q_n^2 <= |Psi'| <= 4 q_n^2.
inline std::pair<mpz_class, mpz_class> branch_bounds(const std::vector<mpz_class>& word) {
    if (word.empty()) throw domain_error("branch_bounds needs a nonempty word");
    mpz_class q = word_continuant(word);
    return {q * q, 4 * q * q};
}

namespace detail {

// Per-cylinder expansion constants Lambda for all level-n block paths.
// exact_words recomputes the continuant of each concatenated word (tighter);
// otherwise per-block bounds are multiplied (cheaper, looser).
inline std::vector<mpz_class> cylinder_lambdas(const CantorSpec& spec, int level, Side side,
                                               bool exact_words, std::size_t budget) {
    std::size_t B = spec.blocks.size();
    double est = std::pow(static_cast<double>(B), level);
    if (est > static_cast<double>(budget))
        throw budget_error("cylinder enumeration budget exceeded at this level");

    std::vector<mpz_class> block_factor(B);
    if (!exact_words) {
        for (std::size_t i = 0; i < B; ++i) {
            auto [lo, hi] = branch_bounds(spec.blocks[i]);
            block_factor[i] = side == Side::lower ? hi : lo;
        }
    }

    std::vector<mpz_class> lambdas;
    std::vector<std::size_t> path(level);
    std::vector<mpz_class> partial(level + 1);
    partial[0] = 1;
    // iterative DFS over allowed paths
    int depth = 0;
    path[0] = 0;
    while (depth >= 0) {
        std::size_t b = path[depth];
        if (b >= B) {
            --depth;
            if (depth >= 0) ++path[depth];
            continue;
        }
        if (depth > 0 && !spec.allowed(path[depth - 1], b)) {
            ++path[depth];
            continue;
        }
        if (!exact_words) partial[depth + 1] = partial[depth] * block_factor[b];
        if (depth + 1 == level) {
            if (exact_words) {
                std::vector<mpz_class> word;
                for (int d = 0; d <= depth; ++d)
                    word.insert(word.end(), spec.blocks[path[d]].begin(),
                                spec.blocks[path[d]].end());
                auto [lo, hi] = branch_bounds(word);
                lambdas.push_back(side == Side::lower ? hi : lo);
            } else {
                lambdas.push_back(partial[depth + 1]);
            }
            ++path[depth];
        } else {
            ++depth;
            path[depth] = 0;
        }
    }
    return lambdas;
}

inline double sum_pow(const std::vector<double>& logs, double gamma) {
    double s = 0.0, c = 0.0;  // Kahan
    for (double lg : logs) {
        double term = std::exp(-gamma * lg);
        double y = term - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

// Directed-rounding evaluation of sum Lambda^{-gamma}; rnd applies to the
// final value (conservative in that direction for every step).
inline double sum_pow_mpfr(const std::vector<mpz_class>& lambdas, double gamma, mpfr_rnd_t rnd) {
    mpfr_rnd_t inv = rnd == MPFR_RNDD ? MPFR_RNDU : MPFR_RNDD;
    mpfr_t lg, term, acc, g;
    mpfr_inits2(128, lg, term, acc, g, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_d(g, gamma, MPFR_RNDN);
    mpfr_set_zero(acc, 1);
    for (const auto& L : lambdas) {
        // Lambda^{-gamma} = exp(-gamma * log Lambda); to round the term toward
        // `rnd`, the exponent -gamma*log(L) must be rounded the same way,
        // hence log(L) the opposite way (gamma >= 0, L >= 1)
        mpfr_set_z(lg, L.get_mpz_t(), inv);
        mpfr_log(lg, lg, inv);
        mpfr_mul(term, g, lg, inv);
        mpfr_neg(term, term, rnd);
        mpfr_exp(term, term, rnd);
        mpfr_add(acc, acc, term, rnd);
    }
    double out = mpfr_get_d(acc, rnd);
    mpfr_clears(lg, term, acc, g, static_cast<mpfr_ptr>(nullptr));
    return out;
}

}  // namespace detail

// Solves sum_R Lambda_R^{-gamma} = 1 over the level-n cylinders by bisection
// on [0, 1]; the sum is strictly decreasing in gamma, so the root is unique.
// side=lower composes sup-derivative bounds (a certified dimension lower
// bound); side=upper uses inf bounds and is heuristic.
inline DimensionEstimate palis_takens_gamma(const CantorSpec& spec, int level, Side side,
                                            bool exact_words = false,
                                            std::size_t budget = 4'000'000) {
    if (level < 1) throw domain_error("palis_takens_gamma needs level >= 1");
    auto lambdas = detail::cylinder_lambdas(spec, level, side, exact_words, budget);
    if (lambdas.empty()) throw domain_error("no admissible cylinders at this level");
    bool any_expanding = false;
    for (const auto& L : lambdas)
        if (L > 1) any_expanding = true;
    if (!any_expanding) throw domain_error("degenerate spec: no expansion in any cylinder");

    std::vector<double> logs;
    logs.reserve(lambdas.size());
    for (const auto& L : lambdas) {
        // exact conversion is fine: Lambda values here are far below 2^1024
        logs.push_back(std::log(mpz_get_d(L.get_mpz_t())));
    }

    DimensionEstimate est;
    est.level = level;
    est.side = side;
    if (lambdas.size() == 1) {
        est.gamma = 0.0;
        est.residual = 0.0;
        est.certified = true;
        return est;
    }
    double lo = 0.0, hi = 1.0;
    if (detail::sum_pow(logs, 1.0) >= 1.0) {
        // the level resolves to dimension >= 1; report the cap
        est.gamma = 1.0;
        est.residual = detail::sum_pow(logs, 1.0) - 1.0;
        est.certified = side == Side::lower &&
                        detail::sum_pow_mpfr(lambdas, 1.0, MPFR_RNDD) >= 1.0;
        return est;
    }
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (detail::sum_pow(logs, mid) >= 1.0 ? lo : hi) = mid;
    }
    double gamma = 0.5 * (lo + hi);
    est.residual = std::abs(detail::sum_pow(logs, gamma) - 1.0);
    // certify against directed rounding; nudge conservatively if roundoff
    // put us a hair past the root
    if (side == Side::lower) {
        for (int tries = 0; tries < 8; ++tries) {
            if (detail::sum_pow_mpfr(lambdas, gamma, MPFR_RNDD) >= 1.0) {
                est.certified = true;
                break;
            }
            gamma -= 4e-13;
        }
    } else {
        for (int tries = 0; tries < 8; ++tries) {
            if (detail::sum_pow_mpfr(lambdas, gamma, MPFR_RNDU) <= 1.0) {
                est.certified = true;
                break;
            }
            gamma += 4e-13;
        }
    }
    est.gamma = gamma;
    return est;
}

struct ThresholdReport {
    int k_star = 0;
    DimensionEstimate at_k;       // certified gamma_1(xk(k*)) > 1/2
    DimensionEstimate at_k_prev;  // gamma_1(xk(k*-1)) <= 1/2
    bool prev_below_half = false;
    double digit_sum = 0.0;   // sum (2j+1)^{-2 gamma_1} at k*
    double digit_bound = 0.0;  // 16^{gamma_1}
    bool inequality_ok = false;
};

// Smallest k with certified lower-side gamma_1(xk(k)) > 1/2, found by
// incremental search.
inline ThresholdReport dim_threshold_half(int k_max = 200) {
    ThresholdReport rep;
    for (int k = 2; k <= k_max; ++k) {
        // quick reject: at gamma = 1/2 the sum is sum 1/(2 q_3) in closed
        // form; the root exceeds 1/2 only once that passes 1
        double quick = 0.0;
        for (long j = static_cast<long>(k) * k; j <= static_cast<long>(k) * k * k; ++j)
            quick += 0.5 / (2.0 * j + 1.0);
        if (quick < 0.999) continue;
        auto spec = make_spec_xk(k);
        auto est = palis_takens_gamma(spec, 1, Side::lower);
        if (est.gamma > 0.5 && est.certified) {
            // certify strictly: the sum at 1/2 must exceed 1 even rounded down
            auto lambdas = detail::cylinder_lambdas(spec, 1, Side::lower, false, 4'000'000);
            if (detail::sum_pow_mpfr(lambdas, 0.5, MPFR_RNDD) > 1.0) {
                rep.k_star = k;
                rep.at_k = est;
                rep.at_k_prev = palis_takens_gamma(make_spec_xk(k - 1), 1, Side::lower);
                auto prev_lam = detail::cylinder_lambdas(make_spec_xk(k - 1), 1, Side::lower,
                                                         false, 4'000'000);
                rep.prev_below_half = detail::sum_pow_mpfr(prev_lam, 0.5, MPFR_RNDU) <= 1.0;
                double g = est.gamma;
                double s = 0.0;
                for (long j = static_cast<long>(k) * k; j <= static_cast<long>(k) * k * k; ++j)
                    s += std::pow(2.0 * j + 1.0, -2.0 * g);
                rep.digit_sum = s;
                rep.digit_bound = std::pow(16.0, g);
                rep.inequality_ok = s <= rep.digit_bound;
                return rep;
            }
        }
    }
    throw budget_error("dimension threshold search exhausted its k budget");
}

}  // namespace cfspec
