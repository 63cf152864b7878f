#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "cfspec/cf.hpp"
#include "cfspec/errors.hpp"
#include "cfspec/quad_surd.hpp"

namespace cfspec {

enum class Exclusion { pairs, fractions };

enum class CaseLabel {
    double_convergent,  // (2 p_k, 2 q_k)
    double_previous,    // (2 p_{k-1}, 2 q_{k-1})
    mediant,            // (p_k + p_{k-1}, q_k + q_{k-1})
    two_minus_one,      // (2 p_k - p_{k-1}, 2 q_k - q_{k-1})
    a_minus_one,        // ((a_{k+1}-1) p_k + p_{k-1}, ...)
    convergent,         // the pair itself (only under fraction exclusion bookkeeping)
    other
};

inline std::string case_label_name(CaseLabel c) {
    switch (c) {
        case CaseLabel::double_convergent: return "double-convergent";
        case CaseLabel::double_previous: return "double-previous";
        case CaseLabel::mediant: return "mediant";
        case CaseLabel::two_minus_one: return "two-minus-one";
        case CaseLabel::a_minus_one: return "a-minus-one";
        case CaseLabel::convergent: return "convergent";
        case CaseLabel::other: return "other";
    }
    return "?";
}

// One candidate approximation (p, q) with an enclosure of its quality
// |q (q alpha - p)|^{-1}.
struct ApproxRecord {
    mpz_class p;
    mpz_class q;
    mpq_class quality_lo;
    mpq_class quality_hi;
    std::size_t k_index = 0;  // q_k <= q < q_{k+1}
    CaseLabel label = CaseLabel::other;
};

struct WindowRecord {
    mpz_class q_lo;
    mpz_class q_hi;
    std::optional<ApproxRecord> best;
};

struct OracleEstimate {
    CFExpansion target;
    mpz_class q_max;
    Exclusion exclusion = Exclusion::pairs;
    mpz_class window_base = 2;
    mpq_class estimate_lo;  // enclosure of the final-window max quality
    mpq_class estimate_hi;
    std::vector<WindowRecord> windows;
};

namespace detail {

// Brute-force search state for one exact quadratic target: a fixed-point
// enclosure alpha in [A, A+1] / 2^s plus the convergent table, shared by all
// window scans.
class ApproxSearcher {
public:
    ApproxSearcher(const QuadSurd& alpha, const mpz_class& q_max) : alpha_(alpha) {
        if (alpha.is_rational())
            throw domain_error("oracle: rational targets have no approximation constant");
        cf_ = cf_expand(alpha);
        // enough precision that |q alpha - p| (>= const/q) dwarfs the
        // enclosure width q / 2^s
        s_ = 2 * static_cast<long>(mpz_sizeinbase(q_max.get_mpz_t(), 2)) + 48;
        BigFloat lo(static_cast<mpfr_prec_t>(s_ + 64));
        alpha_.eval(lo.get(), MPFR_RNDD);
        mpfr_mul_2si(lo.get(), lo.get(), s_, MPFR_RNDD);
        mpfr_get_z(A_.get_mpz_t(), lo.get(), MPFR_RNDD);
        // convergents with q up to beyond q_max (two extra for classification)
        mpz_class pm1 = 1, qm1 = 0, pm2 = 0, qm2 = 1;
        int extra = 0;
        for (std::size_t i = 0; extra < 3; ++i) {
            const mpz_class& a = cf_.digit(i);
            mpz_class p = a * pm1 + pm2;
            mpz_class q = a * qm1 + qm2;
            convs_.push_back({p, q, i});
            if (q > q_max) ++extra;
            pm2 = pm1;
            qm2 = qm1;
            pm1 = p;
            qm1 = q;
        }
    }

    const std::vector<Convergent>& convergents() const { return convs_; }
    const CFExpansion& expansion() const { return cf_; }

    std::size_t k_index(const mpz_class& q) const {
        // largest k with q_k <= q (k >= 1 so that q_k is increasing)
        std::size_t lo = 0, hi = convs_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (convs_[mid].q <= q)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    bool is_convergent_pair(const mpz_class& p, const mpz_class& q) const {
        std::size_t k = k_index(q);
        for (std::size_t i = k; i < convs_.size() && convs_[i].q == q; --i) {
            if (convs_[i].p == p) return true;
            if (i == 0) break;
        }
        return false;
    }

    bool excluded(const mpz_class& p, const mpz_class& q, Exclusion mode) const {
        if (mode == Exclusion::pairs) return is_convergent_pair(p, q);
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
        return is_convergent_pair(mpz_class(p / g), mpz_class(q / g));
    }

    // |q (q alpha - p)| exactly, for tie resolution
    QuadSurd exact_abs(const mpz_class& p, const mpz_class& q) const {
        QuadSurd v = (alpha_ * QuadSurd::from_int(q) - QuadSurd::from_int(p)) *
                     QuadSurd::from_int(q);
        return v.sign() < 0 ? -v : v;
    }

    // Best record over q in [q_lo, q_hi]; nullopt when every candidate is
    // excluded (tiny ranges under fraction exclusion).
    std::optional<ApproxRecord> best_in_range(const mpz_class& q_lo, const mpz_class& q_hi,
                                              Exclusion mode) const {
        if (q_lo < 1 || q_lo > q_hi) throw domain_error("oracle: need 1 <= q_lo <= q_hi");
        std::optional<ApproxRecord> best;
        mpz_class best_q, best_lo, best_hi;  // |q(q alpha - p)| * 2^s enclosure of best
        mpz_class num = A_ * q_lo;           // q * A, incremented by A per step
        mpz_class pow_s = mpz_class(1) << static_cast<unsigned>(s_);
        for (mpz_class q = q_lo; q <= q_hi; ++q, num += A_) {
            // q*alpha lies in [num, num + q] / 2^s
            mpz_class pf = num >> static_cast<unsigned>(s_);
            mpz_class pf2 = (num + q) >> static_cast<unsigned>(s_);
            if (pf != pf2) {
                // enclosure straddles an integer; settle the floor exactly
                pf = (alpha_ * QuadSurd::from_int(q)).floor();
            }
            for (int which = 0; which < 2; ++which) {
                mpz_class p = pf + which;
                // e * 2^s enclosure for e = |q alpha - p|
                mpz_class e_lo;
                if (which == 0)
                    e_lo = num - p * pow_s;
                else
                    e_lo = p * pow_s - (num + q);
                mpz_class e_hi = e_lo + q;
                if (e_lo <= 0) {
                    // p == floor can sit exactly on the value only for
                    // rational targets; recompute exactly to stay safe
                    QuadSurd ex = exact_abs(p, q);
                    if (ex.is_zero()) continue;
                    e_lo = 1;  // conservative; exact path below decides ties
                }
                // scaled |q(q alpha - p)|: multiply by q
                mpz_class f_lo = e_lo * q, f_hi = e_hi * q;
                if (best && f_lo > best_hi) continue;  // strictly worse
                if (excluded(p, q, mode)) continue;
                if (!best || f_hi < best_lo) {
                    best = ApproxRecord{p, q, {}, {}, k_index(q), CaseLabel::other};
                    best_q = q;
                    best_lo = f_lo;
                    best_hi = f_hi;
                } else {
                    // overlap: compare exactly, keep the strictly smaller
                    // |q(q alpha - p)|; ties keep the earlier record
                    QuadSurd cand = exact_abs(p, q);
                    QuadSurd cur = exact_abs(best->p, best->q);
                    if (cand.compare(cur) < 0) {
                        best = ApproxRecord{p, q, {}, {}, k_index(q), CaseLabel::other};
                        best_q = q;
                        best_lo = f_lo;
                        best_hi = f_hi;
                    }
                }
            }
        }
        if (best) {
            best->quality_lo = mpq_class(pow_s, best_hi);
            best->quality_hi = mpq_class(pow_s, best_lo);
            best->quality_lo.canonicalize();
            best->quality_hi.canonicalize();
        }
        return best;
    }

private:
    QuadSurd alpha_;
    CFExpansion cf_;
    std::vector<Convergent> convs_;
    mpz_class A_;
    long s_ = 0;
};

}  // namespace detail

inline ApproxRecord best_in_range(const QuadSurd& alpha, const mpz_class& q_lo,
                                  const mpz_class& q_hi, Exclusion mode) {
    detail::ApproxSearcher s(alpha, q_hi);
    auto rec = s.best_in_range(q_lo, q_hi, mode);
    if (!rec) throw domain_error("oracle: every candidate in the range is excluded");
    return *rec;
}

// Matches the record against the five candidate shapes of the window lemma.
// The doubled-pair cases 1 and 2 are pair identities; cases 3 to 5 identify
// the fraction p/q only, and the witnessing index ("there is a k") need not be
// the record's own window index.  a_{k+1} is recovered from the convergent
// recurrence.
inline CaseLabel classify_record(const ApproxRecord& rec, const std::vector<Convergent>& convs) {
    auto at = [&](std::size_t k) -> CaseLabel {
        const mpz_class &pk = convs[k].p, &qk = convs[k].q;
        const mpz_class &pk1 = convs[k - 1].p, &qk1 = convs[k - 1].q;
        if (rec.p == 2 * pk && rec.q == 2 * qk) return CaseLabel::double_convergent;
        if (rec.p == 2 * pk1 && rec.q == 2 * qk1) return CaseLabel::double_previous;
        auto frac_eq = [&](const mpz_class& ps, const mpz_class& qs) {
            return rec.p * qs == rec.q * ps;
        };
        if (frac_eq(pk + pk1, qk + qk1)) return CaseLabel::mediant;
        if (frac_eq(2 * pk - pk1, 2 * qk - qk1)) return CaseLabel::two_minus_one;
        if (k + 1 < convs.size()) {
            mpz_class a_next = (convs[k + 1].q - qk1) / qk;
            if (frac_eq((a_next - 1) * pk + pk1, (a_next - 1) * qk + qk1))
                return CaseLabel::a_minus_one;
        }
        if (frac_eq(pk, qk)) return CaseLabel::convergent;
        return CaseLabel::other;
    };
    if (convs.size() < 2) return CaseLabel::other;
    std::size_t own = std::min(std::max<std::size_t>(rec.k_index, 1), convs.size() - 1);
    CaseLabel c = at(own);
    if (c != CaseLabel::other && c != CaseLabel::convergent) return c;
    for (std::size_t k = 1; k + 1 < convs.size() && convs[k].q <= rec.q; ++k) {
        if (k == own) continue;
        CaseLabel ck = at(k);
        if (ck != CaseLabel::other && ck != CaseLabel::convergent) return ck;
    }
    return c;
}

// Growth factor of the convergent denominators over one period (the trace of
// the period matrix, up to +-1): window base for which every window is
// guaranteed to contain a full period of q-positions.
inline mpz_class auto_window_base(const CFExpansion& cf) {
    if (cf.is_rational()) throw domain_error("oracle: rational targets unsupported");
    detail::Moebius m;
    for (const auto& c : cf.period()) m.push_digit(c);
    return m.a + m.d + 2;
}

// Finite-range limsup proxy: scan windows [B^i, B^{i+1}) up to q_max and take
// the max quality over the final window.  base = 0 selects the automatic
// per-target base; the classical dyadic choice is base = 2.
inline OracleEstimate estimate_k2(const QuadSurd& alpha, const mpz_class& q_max, Exclusion mode,
                                  const mpz_class& base_in = 2) {
    if (q_max < 1000) throw domain_error("oracle: q_max must be at least 10^3");
    detail::ApproxSearcher s(alpha, q_max);
    mpz_class base = base_in;
    if (base == 0) base = auto_window_base(s.expansion());
    if (base < 2) throw domain_error("oracle: window base must be >= 2");
    OracleEstimate est;
    est.target = s.expansion();
    est.q_max = q_max;
    est.exclusion = mode;
    est.window_base = base;
    // windows anchored at q_max: (q_max/B^{i+1}, q_max/B^i], so the final
    // window always spans a full factor of B
    std::vector<std::pair<mpz_class, mpz_class>> bounds;
    for (mpz_class hi = q_max; hi >= 1; hi /= base) {
        mpz_class lo = hi / base + 1;
        if (lo < 1) lo = 1;
        bounds.emplace_back(lo, hi);
        if (lo == 1) break;
    }
    for (auto it = bounds.rbegin(); it != bounds.rend(); ++it) {
        WindowRecord w{it->first, it->second, s.best_in_range(it->first, it->second, mode)};
        if (w.best) {
            w.best->label = classify_record(*w.best, s.convergents());
        }
        est.windows.push_back(std::move(w));
    }
    const auto& last = est.windows.back();
    if (!last.best) throw domain_error("oracle: final window has no admissible candidate");
    est.estimate_lo = last.best->quality_lo;
    est.estimate_hi = last.best->quality_hi;
    return est;
}

inline OracleEstimate estimate_k2(const CFExpansion& cf, const mpz_class& q_max, Exclusion mode,
                                  const mpz_class& base = 2) {
    return estimate_k2(cf_value(cf), q_max, mode, base);
}

}  // namespace cfspec
