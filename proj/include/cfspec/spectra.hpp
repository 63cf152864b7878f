#pragma once

#include <string>
#include <vector>

#include "cfspec/cf.hpp"
#include "cfspec/errors.hpp"
#include "cfspec/quad_surd.hpp"

namespace cfspec {

// One digit position of a two-sided expansion: tail value alpha = alpha_{k+1},
// reversed limit beta = beta_{k+1}, digit a = a_{k+1} = floor(alpha).
struct LocalData {
    QuadSurd alpha;
    QuadSurd beta;
    mpz_class a;

    LocalData(QuadSurd alpha_, QuadSurd beta_, mpz_class a_)
        : alpha(std::move(alpha_)), beta(std::move(beta_)), a(std::move(a_)) {
        if (alpha.compare(mpq_class(1)) <= 0) throw domain_error("LocalData: alpha must be > 1");
        if (beta.compare(mpq_class(0)) <= 0 || beta.compare(mpq_class(1)) >= 0)
            throw domain_error("LocalData: beta must lie in (0,1)");
        if (a != alpha.floor()) throw domain_error("LocalData: a must equal floor(alpha)");
    }
};

enum class Branch { quarter, kappa1, kappa2, kappa3, mosh_a1, sum };

inline std::string branch_name(Branch b) {
    switch (b) {
        case Branch::quarter: return "quarter";
        case Branch::kappa1: return "kappa1";
        case Branch::kappa2: return "kappa2";
        case Branch::kappa3: return "kappa3";
        case Branch::mosh_a1: return "mosh-a1";
        case Branch::sum: return "sum";
    }
    return "?";
}

struct SpectrumValue {
    QuadSurd exact;
    Branch branch = Branch::quarter;
    std::size_t position = 0;  // residue index within the period, 0-based
};

// The four functionals of the second-spectrum formulas, all with numerator
// alpha + beta:
//   kappa1 = (a+b) / ((a-1)(1+b))
//   kappa2 = (a+b) / ((a-d+1)(d-1+b))      with d the digit
//   kappa3 = (a+b) / ((2-b)(a+2))
//   kappa4 = (a+b) / 4
// kappa1/kappa2 degenerate when the digit is 1, so they apply only for a >= 2.
inline QuadSurd kappa1(const LocalData& ld) {
    if (ld.a < 2) throw domain_error("kappa1: branch not applicable for digit 1");
    QuadSurd one = QuadSurd::from_int(1);
    return (ld.alpha + ld.beta) / ((ld.alpha - one) * (one + ld.beta));
}

inline QuadSurd kappa2(const LocalData& ld) {
    if (ld.a < 2) throw domain_error("kappa2: branch not applicable for digit 1");
    QuadSurd a = QuadSurd::from_int(ld.a), one = QuadSurd::from_int(1);
    return (ld.alpha + ld.beta) / ((ld.alpha - a + one) * (a - one + ld.beta));
}

inline QuadSurd kappa3(const LocalData& ld) {
    QuadSurd two = QuadSurd::from_int(2);
    return (ld.alpha + ld.beta) / ((two - ld.beta) * (ld.alpha + two));
}

inline QuadSurd kappa4(const LocalData& ld) {
    return (ld.alpha + ld.beta) * mpq_class(1, 4);
}

// a = 1 branch of Moshchevitin's kappa: (a+b) / ((2a-1)(2b+1)).
inline QuadSurd kappa_mosh1(const LocalData& ld) {
    QuadSurd one = QuadSurd::from_int(1), two = QuadSurd::from_int(2);
    return (ld.alpha + ld.beta) / ((two * ld.alpha - one) * (two * ld.beta + one));
}

inline std::vector<std::pair<Branch, QuadSurd>> kappa_branches(const LocalData& ld) {
    std::vector<std::pair<Branch, QuadSurd>> out;
    out.emplace_back(Branch::quarter, kappa4(ld));
    out.emplace_back(Branch::kappa3, kappa3(ld));
    if (ld.a >= 2) {
        out.emplace_back(Branch::kappa1, kappa1(ld));
        out.emplace_back(Branch::kappa2, kappa2(ld));
    }
    return out;
}

namespace detail {

// Max over candidate branches evaluated in order; ties keep the earliest,
// which fixes the tie-break order of the recorded branch.
inline SpectrumValue max_branches(const std::vector<std::pair<Branch, QuadSurd>>& cands) {
    SpectrumValue best{cands.front().second, cands.front().first, 0};
    for (std::size_t i = 1; i < cands.size(); ++i)
        if (cands[i].second.compare(best.exact) > 0) {
            best.exact = cands[i].second;
            best.branch = cands[i].first;
        }
    return best;
}

}  // namespace detail

// delta(k) of the k2 formula: max{kappa4, kappa1, kappa2} for digit >= 2,
// kappa4 alone for digit 1.  Ties resolve quarter < kappa1 < kappa2.
inline SpectrumValue delta_at(const LocalData& ld) {
    std::vector<std::pair<Branch, QuadSurd>> cands{{Branch::quarter, kappa4(ld)}};
    if (ld.a >= 2) {
        cands.emplace_back(Branch::kappa1, kappa1(ld));
        cands.emplace_back(Branch::kappa2, kappa2(ld));
    }
    return detail::max_branches(cands);
}

// gamma(k) of the k2star formula: kappa3 replaces kappa4.
inline SpectrumValue gamma_at(const LocalData& ld) {
    std::vector<std::pair<Branch, QuadSurd>> cands{{Branch::kappa3, kappa3(ld)}};
    if (ld.a >= 2) {
        cands.emplace_back(Branch::kappa1, kappa1(ld));
        cands.emplace_back(Branch::kappa2, kappa2(ld));
    }
    return detail::max_branches(cands);
}

// Moshchevitin's kappa: a dedicated branch for digit 1, max{kappa1, kappa2}
// otherwise.  Its limsup agrees with gamma's limsup.
inline SpectrumValue kappa_moshchevitin_at(const LocalData& ld) {
    if (ld.a == 1) return {kappa_mosh1(ld), Branch::mosh_a1, 0};
    std::vector<std::pair<Branch, QuadSurd>> cands{{Branch::kappa1, kappa1(ld)},
                                                   {Branch::kappa2, kappa2(ld)}};
    return detail::max_branches(cands);
}

namespace detail {

inline LocalData local_at(const CFExpansion& cf, std::size_t n) {
    return LocalData(tail_alpha(cf, n), limit_beta(cf, n), cf.digit(n));
}

template <typename F>
SpectrumValue periodic_max(const CFExpansion& cf, F&& at) {
    if (cf.is_rational())
        throw domain_error("spectrum of a rational number is undefined (no infinite tail)");
    std::size_t ps = cf.period_start();
    SpectrumValue best;
    bool first = true;
    for (std::size_t i = 0; i < cf.period_length(); ++i) {
        SpectrumValue v = at(local_at(cf, ps + i));
        v.position = i;
        if (first || v.exact.compare(best.exact) > 0) {
            best = v;
            first = false;
        }
    }
    return best;
}

}  // namespace detail

// limsup of delta over the digit positions; for an eventually periodic
// expansion this is the exact max over residue classes of the period, using
// the limiting beta of each class.
inline SpectrumValue k2_periodic(const CFExpansion& cf) {
    return detail::periodic_max(cf, [](const LocalData& ld) { return delta_at(ld); });
}

inline SpectrumValue k2star_periodic(const CFExpansion& cf) {
    return detail::periodic_max(cf, [](const LocalData& ld) { return gamma_at(ld); });
}

// Classical Lagrange constant limsup(alpha_n + beta_n).
inline SpectrumValue k_classical_periodic(const CFExpansion& cf) {
    return detail::periodic_max(cf, [](const LocalData& ld) {
        return SpectrumValue{ld.alpha + ld.beta, Branch::sum, 0};
    });
}

// -- discrete part ----------------------------------------------------------

struct DiscretePartEntry {
    int n = 0;
    CFExpansion xi;
    QuadSurd lambda;
};

// First accumulation point of the second Lagrange spectrum: (3 sqrt 17 + 21)/32.
inline QuadSurd lambda_infinity() { return QuadSurd(21, 3, 32, 17); }

namespace detail {

inline void append_word(std::vector<mpz_class>& dst, std::initializer_list<int> w, int reps = 1) {
    for (int r = 0; r < reps; ++r)
        for (int x : w) dst.emplace_back(x);
}

}  // namespace detail

// Entries n = 3..n_max of the discrete part:
//   xi_n     = [0; (1,1,1,1,3,(1,1,3)^{2n-5})]
//   lambda_n = ([3; ((1,1,3)^{2n-5},1,1,1,1,3)] + [0; (1,1,1,1,(3,1,1)^{2n-5})]) / 4
inline std::vector<DiscretePartEntry> discrete_part(int n_max) {
    std::vector<DiscretePartEntry> out;
    for (int n = 3; n <= n_max; ++n) {
        int reps = 2 * n - 5;
        std::vector<mpz_class> xi_per, a_per, b_per;
        detail::append_word(xi_per, {1, 1, 1, 1, 3});
        detail::append_word(xi_per, {1, 1, 3}, reps);
        detail::append_word(a_per, {1, 1, 3}, reps);
        detail::append_word(a_per, {1, 1, 1, 1, 3});
        detail::append_word(b_per, {1, 1, 1, 1});
        detail::append_word(b_per, {3, 1, 1}, reps);
        detail::append_word(b_per, {3});
        QuadSurd a = cf_value(CFExpansion(3, {}, a_per));
        QuadSurd b = cf_value(CFExpansion(0, {}, b_per));
        QuadSurd lambda = (a + b) * mpq_class(1, 4);
        out.push_back({n, CFExpansion(0, {}, xi_per), lambda});
    }
    return out;
}

// -- structure near 2/3 -----------------------------------------------------

struct StructureReport {
    bool applicable = false;   // value in [2/3, sqrt(493)/33)
    bool block_structure = false;
    std::vector<mpz_class> xs;  // third digit of each (1,1,x) block, in order
    QuadSurd value;
};

// For values in [2/3, sqrt(493)/33), the period must decompose (up to
// rotation) into blocks (1,1,x) with every x >= 145.
inline StructureReport structure_check_near_two_thirds(const CFExpansion& cf) {
    StructureReport rep;
    rep.value = k2star_periodic(cf).exact;
    QuadSurd hi(0, 1, 33, 493);
    if (rep.value.compare(mpq_class(2, 3)) < 0 || rep.value.compare(hi) >= 0) return rep;
    rep.applicable = true;
    const auto& per = cf.period();
    std::size_t L = per.size();
    if (L % 3 != 0) return rep;
    for (std::size_t r = 0; r < 3; ++r) {
        bool ok = true;
        std::vector<mpz_class> xs;
        for (std::size_t i = 0; i < L; i += 3) {
            if (per[(r + i) % L] != 1 || per[(r + i + 1) % L] != 1 ||
                per[(r + i + 2) % L] < 145) {
                ok = false;
                break;
            }
            xs.push_back(per[(r + i + 2) % L]);
        }
        if (ok) {
            rep.block_structure = true;
            rep.xs = std::move(xs);
            return rep;
        }
    }
    return rep;
}

}  // namespace cfspec
