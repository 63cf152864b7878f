#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfspec/cantor.hpp"
#include "cfspec/cf.hpp"
#include "cfspec/errors.hpp"
#include "cfspec/intmath.hpp"
#include "cfspec/quad_surd.hpp"
#include "cfspec/spectra.hpp"

namespace cfspec {

// Piecewise heights on two-sided digit sequences, each a max of Moebius
// branches in the forward tail alpha and the backward tail beta:
//   classical  alpha + beta                       (Lagrange/Markov height)
//   l2         quarter; kappa1, kappa2 for digit >= 2
//   l2star     mosh for digit 1; max{kappa1, kappa2} otherwise
//   fhat       max of the l2star value over the shifts 0, 1, 2 of a
//              (x,1,1)-block sequence read at the x digit
//   ftilde     the same branches as fhat, read on the accelerated
//              (third-iterate) coordinates; values coincide with fhat
enum class HeightKind { classical, l2, l2star, fhat, ftilde };

inline std::string height_kind_name(HeightKind k) {
    switch (k) {
        case HeightKind::classical: return "classical";
        case HeightKind::l2: return "l2";
        case HeightKind::l2star: return "l2star";
        case HeightKind::fhat: return "fhat";
        case HeightKind::ftilde: return "ftilde";
    }
    return "?";
}

inline HeightKind height_kind_by_name(const std::string& s) {
    if (s == "classical") return HeightKind::classical;
    if (s == "l2") return HeightKind::l2;
    if (s == "l2star") return HeightKind::l2star;
    if (s == "fhat") return HeightKind::fhat;
    if (s == "ftilde") return HeightKind::ftilde;
    throw domain_error("unknown height: " + s);
}

// A two-sided digit sequence with a marked origin.  Either fully periodic
// (digits = one period, marker = offset of position 0 within it) or a finite
// explicit window extended on both sides by periodic filler words.  The left
// filler is read rightward: the sequence left of the window is
// ... F F F | window, so digit -1 of an all-filler left side is the last
// letter of F.
struct MarkedSequence {
    std::vector<mpz_class> digits;
    std::size_t marker = 0;
    bool is_periodic = true;
    std::vector<mpz_class> left_filler, right_filler;

    static MarkedSequence periodic(std::vector<mpz_class> word, std::size_t marker) {
        if (word.empty()) throw domain_error("MarkedSequence: empty period");
        if (marker >= word.size()) throw domain_error("MarkedSequence: marker out of range");
        for (const auto& d : word)
            if (d < 1) throw domain_error("MarkedSequence: digits must be positive");
        MarkedSequence s;
        s.digits = std::move(word);
        s.marker = marker;
        s.is_periodic = true;
        return s;
    }

    static MarkedSequence window(std::vector<mpz_class> digits, std::size_t marker,
                                 std::vector<mpz_class> left_filler,
                                 std::vector<mpz_class> right_filler) {
        if (digits.empty() || left_filler.empty() || right_filler.empty())
            throw domain_error("MarkedSequence: window and fillers must be nonempty");
        if (marker >= digits.size()) throw domain_error("MarkedSequence: marker out of range");
        for (const auto* v : {&digits, &left_filler, &right_filler})
            for (const auto& d : *v)
                if (d < 1) throw domain_error("MarkedSequence: digits must be positive");
        MarkedSequence s;
        s.digits = std::move(digits);
        s.marker = marker;
        s.is_periodic = false;
        s.left_filler = std::move(left_filler);
        s.right_filler = std::move(right_filler);
        return s;
    }

    const mpz_class& digit_at(long n) const {
        long i = static_cast<long>(marker) + n;
        long size = static_cast<long>(digits.size());
        if (is_periodic) {
            long r = i % size;
            if (r < 0) r += size;
            return digits[static_cast<std::size_t>(r)];
        }
        if (i >= 0 && i < size) return digits[static_cast<std::size_t>(i)];
        if (i < 0) {
            long L = static_cast<long>(left_filler.size());
            long r = i % L;
            if (r < 0) r += L;
            return left_filler[static_cast<std::size_t>(r)];
        }
        long L = static_cast<long>(right_filler.size());
        return right_filler[static_cast<std::size_t>((i - size) % L)];
    }
};

// One evaluated branch (or the branch max): a rational enclosure, the branch
// label, the shift j it was read at (nonzero only for fhat/ftilde), and the
// exact surd when the sequence is periodic.
struct HeightValue {
    mpq_class lo, hi;
    Branch branch = Branch::sum;
    int shift = 0;
    std::optional<QuadSurd> exact;

    double mid() const { return 0.5 * (lo.get_d() + hi.get_d()); }
};

namespace detail {

struct Interval {
    mpq_class lo, hi;
};

// Convergents of a continued fraction fed digit by digit.  After at least two
// digits, every infinite continuation of the pushed prefix lies strictly
// between the last two convergents, which gives certified enclosures.
struct ConvergentStream {
    mpz_class pm1 = 1, pm2 = 0, qm1 = 0, qm2 = 1;
    std::size_t count = 0;

    void push(const mpz_class& a) {
        mpz_class p = a * pm1 + pm2, q = a * qm1 + qm2;
        pm2 = pm1;
        qm2 = qm1;
        pm1 = p;
        qm1 = q;
        ++count;
    }

    // gap |p/q - p'/q'| = 1/(q q') <= 1/qq
    bool tight(const mpz_class& qq) const { return count >= 2 && qm1 * qm2 >= qq; }

    Interval enclosure() const {
        if (count < 2) throw domain_error("ConvergentStream: need two convergents");
        mpq_class x(pm1, qm1), y(pm2, qm2);
        x.canonicalize();
        y.canonicalize();
        return x < y ? Interval{x, y} : Interval{y, x};
    }
};

inline mpq_class branch_value_q(Branch b, const mpq_class& al, const mpq_class& be,
                                const mpz_class& d) {
    mpq_class s = al + be;
    switch (b) {
        case Branch::sum: return s;
        case Branch::quarter: return s / 4;
        case Branch::kappa1: return s / ((al - 1) * (1 + be));
        case Branch::kappa2: {
            mpq_class dd(d);
            return s / ((al - dd + 1) * (dd - 1 + be));
        }
        case Branch::kappa3: return s / ((2 - be) * (al + 2));
        case Branch::mosh_a1: return s / ((2 * al - 1) * (2 * be + 1));
    }
    throw domain_error("branch_value_q: unknown branch");
}

// Every branch is Moebius and monotone in alpha and in beta separately on its
// applicability region, so the extreme values over a box sit at corners.
inline Interval branch_interval(Branch b, const Interval& A, const Interval& B,
                                const mpz_class& d) {
    mpq_class vs[4] = {branch_value_q(b, A.lo, B.lo, d), branch_value_q(b, A.lo, B.hi, d),
                       branch_value_q(b, A.hi, B.lo, d), branch_value_q(b, A.hi, B.hi, d)};
    Interval out{vs[0], vs[0]};
    for (int i = 1; i < 4; ++i) {
        if (vs[i] < out.lo) out.lo = vs[i];
        if (vs[i] > out.hi) out.hi = vs[i];
    }
    return out;
}

inline QuadSurd branch_value_exact(Branch b, const QuadSurd& A, const QuadSurd& B,
                                   const mpz_class& d) {
    if (b == Branch::sum) return A + B;
    LocalData ld(A, B, d);
    switch (b) {
        case Branch::quarter: return kappa4(ld);
        case Branch::kappa1: return kappa1(ld);
        case Branch::kappa2: return kappa2(ld);
        case Branch::kappa3: return kappa3(ld);
        case Branch::mosh_a1: return kappa_mosh1(ld);
        default: break;
    }
    throw domain_error("branch_value_exact: unknown branch");
}

inline Interval surd_interval(const QuadSurd& v, int precision) {
    mpfr_t lo, hi;
    mpfr_init2(lo, precision + 32);
    mpfr_init2(hi, precision + 32);
    v.eval(lo, MPFR_RNDD);
    v.eval(hi, MPFR_RNDU);
    Interval out;
    mpfr_get_q(out.lo.get_mpq_t(), lo);
    mpfr_get_q(out.hi.get_mpq_t(), hi);
    mpfr_clear(lo);
    mpfr_clear(hi);
    return out;
}

inline mpz_class gap_denominator(int precision) {
    mpz_class qq = 1;
    mpz_mul_2exp(qq.get_mpz_t(), qq.get_mpz_t(), static_cast<mp_bitcnt_t>(precision) + 8);
    return qq;
}

// Enclosure of the tail starting at position j (alpha, rightward) or the
// reversed tail [0; a_{j-1}, a_{j-2}, ...] (beta, leftward).
inline Interval sequence_tail(const MarkedSequence& s, long j, bool rightward, int precision) {
    mpz_class qq = gap_denominator(precision);
    ConvergentStream cs;
    if (!rightward) cs.push(0);
    for (long i = 0; i < 200000; ++i) {
        cs.push(rightward ? s.digit_at(j + i) : s.digit_at(j - 1 - i));
        if (cs.tight(qq)) return cs.enclosure();
    }
    throw budget_error("tail enclosure did not converge within the digit budget");
}

// Exact tails of a periodic marked sequence: the forward tail at shift j is
// the purely periodic expansion of the rotated word; the backward tail is
// [0; (reversed rotation)].
inline QuadSurd periodic_alpha(const MarkedSequence& s, long j) {
    std::size_t L = s.digits.size();
    std::vector<mpz_class> per;
    per.reserve(L);
    for (std::size_t i = 1; i <= L; ++i) per.push_back(s.digit_at(j + static_cast<long>(i)));
    return cf_value(CFExpansion(s.digit_at(j), {}, std::move(per)));
}

inline QuadSurd periodic_beta(const MarkedSequence& s, long j) {
    std::size_t L = s.digits.size();
    std::vector<mpz_class> per;
    per.reserve(L);
    for (std::size_t i = 1; i <= L; ++i) per.push_back(s.digit_at(j - static_cast<long>(i)));
    return cf_value(CFExpansion(0, {}, std::move(per)));
}

// fhat/ftilde admissibility: the sequence must consist of (x,1,1) blocks with
// the marker on an x digit, i.e. every position != 0 mod 3 carries digit 1.
inline bool fhat_structured(const MarkedSequence& s) {
    long span;
    if (s.is_periodic) {
        span = 3 * static_cast<long>(s.digits.size());
    } else {
        span = static_cast<long>(s.digits.size()) +
               3 * static_cast<long>(std::max(s.left_filler.size(), s.right_filler.size())) + 3;
    }
    for (long n = -span; n <= span; ++n) {
        long r = ((n % 3) + 3) % 3;
        if (r != 0 && s.digit_at(n) != 1) return false;
    }
    return true;
}

}  // namespace detail

// All applicable branch values of a height at the marker of a sequence.
// Periodic sequences evaluate exactly; windows evaluate to certified rational
// enclosures of width at most 2^{-precision}.
inline std::vector<HeightValue> height_branch_values(HeightKind kind, const MarkedSequence& s,
                                                     int precision = 96) {
    bool star3 = kind == HeightKind::fhat || kind == HeightKind::ftilde;
    if (star3 && !detail::fhat_structured(s))
        throw domain_error("fhat needs a (x,1,1)-block sequence marked on an x digit");

    std::vector<std::pair<Branch, int>> refs;
    auto add_star = [&](int j) {
        if (s.digit_at(j) == 1) {
            refs.emplace_back(Branch::mosh_a1, j);
        } else {
            refs.emplace_back(Branch::kappa1, j);
            refs.emplace_back(Branch::kappa2, j);
        }
    };
    switch (kind) {
        case HeightKind::classical:
            refs.emplace_back(Branch::sum, 0);
            break;
        case HeightKind::l2:
            refs.emplace_back(Branch::quarter, 0);
            if (s.digit_at(0) >= 2) {
                refs.emplace_back(Branch::kappa1, 0);
                refs.emplace_back(Branch::kappa2, 0);
            }
            break;
        case HeightKind::l2star:
            add_star(0);
            break;
        case HeightKind::fhat:
        case HeightKind::ftilde:
            add_star(0);
            add_star(1);
            add_star(2);
            break;
    }

    std::map<int, std::pair<QuadSurd, QuadSurd>> exact_tails;
    std::map<int, std::pair<detail::Interval, detail::Interval>> box_tails;
    std::vector<HeightValue> out;
    for (const auto& [b, j] : refs) {
        const mpz_class& d = s.digit_at(j);
        HeightValue hv;
        hv.branch = b;
        hv.shift = j;
        if (s.is_periodic) {
            auto it = exact_tails.find(j);
            if (it == exact_tails.end())
                it = exact_tails
                         .emplace(j, std::make_pair(detail::periodic_alpha(s, j),
                                                    detail::periodic_beta(s, j)))
                         .first;
            QuadSurd v = detail::branch_value_exact(b, it->second.first, it->second.second, d);
            auto iv = detail::surd_interval(v, precision);
            hv.lo = std::move(iv.lo);
            hv.hi = std::move(iv.hi);
            hv.exact = std::move(v);
        } else {
            auto it = box_tails.find(j);
            if (it == box_tails.end())
                it = box_tails
                         .emplace(j, std::make_pair(detail::sequence_tail(s, j, true, precision),
                                                    detail::sequence_tail(s, j, false, precision)))
                         .first;
            auto iv = detail::branch_interval(b, it->second.first, it->second.second, d);
            hv.lo = std::move(iv.lo);
            hv.hi = std::move(iv.hi);
        }
        out.push_back(std::move(hv));
    }
    return out;
}

// Height value at the marker: the max over applicable branches.  Exact for
// periodic sequences (ties keep the earliest branch in the listed order), a
// certified enclosure for windows.
inline HeightValue eval_height(HeightKind kind, const MarkedSequence& s, int precision = 96) {
    auto vals = height_branch_values(kind, s, precision);
    if (s.is_periodic) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < vals.size(); ++i)
            if (vals[i].exact->compare(*vals[best].exact) > 0) best = i;
        return vals[best];
    }
    std::size_t best = 0;
    mpq_class lo = vals[0].lo, hi = vals[0].hi;
    for (std::size_t i = 1; i < vals.size(); ++i) {
        if (vals[i].lo > lo) {
            lo = vals[i].lo;
            best = i;
        }
        if (vals[i].hi > hi) hi = vals[i].hi;
    }
    HeightValue out = vals[best];
    out.lo = std::move(lo);
    out.hi = std::move(hi);
    return out;
}

// -- periodic-orbit spectrum sampling ---------------------------------------

// For every cyclic block word of length <= max_period over the spec (up to
// rotation), the sup of the height over the orbit; returns the sorted,
// deduplicated values with their attaining branch.
inline std::vector<HeightValue> periodic_spectrum_sample(const CantorSpec& spec, HeightKind kind,
                                                         int max_period,
                                                         std::size_t budget = 200000) {
    if (max_period < 1) throw domain_error("periodic_spectrum_sample needs max_period >= 1");
    bool star3 = kind == HeightKind::fhat || kind == HeightKind::ftilde;
    if (star3)
        for (const auto& b : spec.blocks)
            if (b.size() != 3 || b[0] != 1 || b[1] != 1)
                throw domain_error("fhat sampling requires (1,1,x) blocks");

    std::vector<HeightValue> values;
    std::size_t work = 0;
    std::vector<std::size_t> word;

    auto emit = [&](const std::vector<std::size_t>& w) {
        if (!spec.allowed(w.back(), w.front())) return;
        // keep only the lexicographically least rotation of each cyclic word
        for (std::size_t r = 1; r < w.size(); ++r) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                std::size_t a = w[i], b = w[(r + i) % w.size()];
                if (b < a) return;
                if (b > a) break;
            }
        }
        std::vector<mpz_class> ds;
        for (std::size_t b : w)
            ds.insert(ds.end(), spec.blocks[b].begin(), spec.blocks[b].end());
        std::optional<HeightValue> best;
        for (std::size_t pos = 0; pos < ds.size(); ++pos) {
            if (star3 && pos % 3 != 2) continue;
            if (++work > budget) throw budget_error("periodic sampling budget exceeded");
            HeightValue v = eval_height(kind, MarkedSequence::periodic(ds, pos));
            if (!best || v.exact->compare(*best->exact) > 0) best = std::move(v);
        }
        if (best) values.push_back(std::move(*best));
    };

    auto rec = [&](auto&& self, int remaining) -> void {
        if (!word.empty()) emit(word);
        if (remaining == 0) return;
        for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
            if (!word.empty() && !spec.allowed(word.back(), b)) continue;
            word.push_back(b);
            self(self, remaining - 1);
            word.pop_back();
        }
    };
    rec(rec, max_period);

    std::sort(values.begin(), values.end(), [](const HeightValue& a, const HeightValue& b) {
        return a.exact->compare(*b.exact) < 0;
    });
    values.erase(std::unique(values.begin(), values.end(),
                             [](const HeightValue& a, const HeightValue& b) {
                                 return a.exact->compare(*b.exact) == 0;
                             }),
                 values.end());
    return values;
}

// -- threshold pruning ------------------------------------------------------

namespace detail {

enum class BlockShape { single, triple, generic };

inline BlockShape spec_shape(const CantorSpec& spec) {
    bool single = true, triple = true;
    for (const auto& b : spec.blocks) {
        if (b.size() != 1) single = false;
        if (b.size() != 3 || b[0] != 1 || b[1] != 1) triple = false;
    }
    if (single) return BlockShape::single;
    if (triple) return BlockShape::triple;
    return BlockShape::generic;
}

// Depth-cylinder graph: nodes are transition-consistent paths of `depth`
// blocks, edges follow the one-block shift (suffix/prefix overlap).  Certified
// height bounds over a cylinder use extremal tail completions that walk this
// graph: continued-fraction values order alternating-lexicographically in the
// digits, so the admissible sup/inf tails are reached by greedily taking the
// extreme available digit at each position (max at even positions of the tail,
// min at odd ones, or vice versa).  Restricting the walk to currently alive
// cylinders lets repeated passes tighten the bounds to a fixpoint.
struct PruneGraph {
    const CantorSpec* spec = nullptr;
    BlockShape shape;
    int depth = 1;
    std::vector<std::vector<std::size_t>> words;
    std::vector<std::vector<mpz_class>> digits;
    std::vector<char> alive;
    // prefix_buckets[i]: words sharing one (depth-1)-block prefix, sorted by
    // the free digit of the last block; succ_of[w] indexes the bucket whose
    // prefix equals w's suffix.  suffix_buckets/pred_of mirror this for
    // predecessors, sorted by the free digit of the first block.
    std::vector<std::vector<std::size_t>> prefix_buckets, suffix_buckets;
    std::vector<long> succ_of, pred_of;
    bool structured = true;  // greedy completions valid (distinct free digits)
    mpz_class dmin, dmax;    // digit range, for the unstructured fallback

    PruneGraph(const CantorSpec& s, int d, std::size_t budget) : spec(&s), depth(d) {
        shape = spec_shape(s);
        enumerate(budget);
        index();
    }

    const mpz_class& free_digit(std::size_t block) const {
        return shape == BlockShape::triple ? spec->blocks[block][2] : spec->blocks[block].back();
    }

    void enumerate(std::size_t budget) {
        std::vector<std::size_t> path;
        auto rec = [&](auto&& self) -> void {
            if (path.size() == static_cast<std::size_t>(depth)) {
                if (words.size() >= budget) throw budget_error("cylinder budget exceeded");
                words.push_back(path);
                return;
            }
            for (std::size_t b = 0; b < spec->blocks.size(); ++b) {
                if (!path.empty() && !spec->allowed(path.back(), b)) continue;
                path.push_back(b);
                self(self);
                path.pop_back();
            }
        };
        rec(rec);
        digits.resize(words.size());
        for (std::size_t w = 0; w < words.size(); ++w)
            for (std::size_t b : words[w])
                digits[w].insert(digits[w].end(), spec->blocks[b].begin(),
                                 spec->blocks[b].end());
        alive.assign(words.size(), 1);
        bool first = true;
        for (const auto& b : spec->blocks)
            for (const auto& d : b) {
                if (first || d < dmin) dmin = d;
                if (first || d > dmax) dmax = d;
                first = false;
            }
    }

    void index() {
        std::map<std::vector<std::size_t>, long> pid, sid;
        succ_of.assign(words.size(), -1);
        pred_of.assign(words.size(), -1);
        std::vector<std::vector<std::size_t>> prefs(words.size()), sufs(words.size());
        for (std::size_t w = 0; w < words.size(); ++w) {
            prefs[w].assign(words[w].begin(), words[w].end() - 1);
            sufs[w].assign(words[w].begin() + 1, words[w].end());
            auto [itp, np] = pid.emplace(prefs[w], static_cast<long>(prefix_buckets.size()));
            if (np) prefix_buckets.emplace_back();
            prefix_buckets[itp->second].push_back(w);
            auto [its, ns] = sid.emplace(sufs[w], static_cast<long>(suffix_buckets.size()));
            if (ns) suffix_buckets.emplace_back();
            suffix_buckets[its->second].push_back(w);
        }
        for (std::size_t w = 0; w < words.size(); ++w) {
            auto it = pid.find(sufs[w]);
            succ_of[w] = it == pid.end() ? -1 : it->second;
            auto jt = sid.find(prefs[w]);
            pred_of[w] = jt == sid.end() ? -1 : jt->second;
        }
        auto by_last = [&](std::size_t a, std::size_t b) {
            return free_digit(words[a].back()) < free_digit(words[b].back());
        };
        auto by_first = [&](std::size_t a, std::size_t b) {
            return free_digit(words[a].front()) < free_digit(words[b].front());
        };
        for (auto& v : prefix_buckets) {
            std::sort(v.begin(), v.end(), by_last);
            for (std::size_t i = 1; i < v.size(); ++i)
                if (free_digit(words[v[i - 1]].back()) == free_digit(words[v[i]].back()))
                    structured = false;
        }
        for (auto& v : suffix_buckets) {
            std::sort(v.begin(), v.end(), by_first);
            for (std::size_t i = 1; i < v.size(); ++i)
                if (free_digit(words[v[i - 1]].front()) == free_digit(words[v[i]].front()))
                    structured = false;
        }
        if (shape == BlockShape::generic) structured = false;
    }

    bool edge(std::size_t a, std::size_t b) const {
        // overlap is implied by the buckets; paths of length >= 2 carry their
        // own internal transition checks, only depth 1 needs the base relation
        return depth > 1 || spec->allowed(words[a].back(), words[b].back());
    }

    long next_state(std::size_t w, bool want_max) const {
        if (succ_of[w] < 0) return -1;
        const auto& v = prefix_buckets[static_cast<std::size_t>(succ_of[w])];
        if (want_max) {
            for (auto it = v.rbegin(); it != v.rend(); ++it)
                if (alive[*it] && edge(w, *it)) return static_cast<long>(*it);
        } else {
            for (std::size_t c : v)
                if (alive[c] && edge(w, c)) return static_cast<long>(c);
        }
        return -1;
    }

    long prev_state(std::size_t w, bool want_max) const {
        if (pred_of[w] < 0) return -1;
        const auto& v = suffix_buckets[static_cast<std::size_t>(pred_of[w])];
        if (want_max) {
            for (auto it = v.rbegin(); it != v.rend(); ++it)
                if (alive[*it] && edge(*it, w)) return static_cast<long>(*it);
        } else {
            for (std::size_t c : v)
                if (alive[c] && edge(c, w)) return static_cast<long>(c);
        }
        return -1;
    }

    // Append the extremal admissible continuation right of word w; skip drops
    // that many leading digits of the first appended block (used when a shifted
    // marker starts inside the block after the word).
    void complete_right(std::size_t w, std::size_t skip, bool maximize, ConvergentStream& cs,
                        const mpz_class& qq) const {
        std::size_t cur = w;
        for (int guard = 0; guard < 100000; ++guard) {
            if (cs.tight(qq)) return;
            if (!structured) {
                bool up = (cs.count % 2 == 0) == maximize;
                cs.push(up ? dmax : dmin);
                continue;
            }
            std::size_t blen = spec->blocks[words[cur].back()].size();
            std::size_t free_off = blen - 1;  // single: 0; triple: 2
            bool up = ((cs.count + free_off - skip) % 2 == 0) == maximize;
            long nxt = next_state(cur, up);
            if (nxt < 0) return;
            const auto& blk = spec->blocks[words[static_cast<std::size_t>(nxt)].back()];
            for (std::size_t i = skip; i < blk.size(); ++i) cs.push(blk[i]);
            cur = static_cast<std::size_t>(nxt);
            skip = 0;
        }
        throw budget_error("completion budget exceeded");
    }

    // Append the extremal admissible continuation left of word w (digits are
    // consumed leftward: the reversed first block of each predecessor).
    void complete_left(std::size_t w, bool maximize, ConvergentStream& cs,
                       const mpz_class& qq) const {
        std::size_t cur = w;
        for (int guard = 0; guard < 100000; ++guard) {
            if (cs.tight(qq)) return;
            if (!structured) {
                bool up = (cs.count % 2 == 0) == maximize;
                cs.push(up ? dmax : dmin);
                continue;
            }
            // reversed block puts the free digit first, at index cs.count
            bool up = (cs.count % 2 == 0) == maximize;
            long prv = prev_state(cur, up);
            if (prv < 0) return;
            const auto& blk = spec->blocks[words[static_cast<std::size_t>(prv)].front()];
            for (auto it = blk.rbegin(); it != blk.rend(); ++it) cs.push(*it);
            cur = static_cast<std::size_t>(prv);
        }
        throw budget_error("completion budget exceeded");
    }

    Interval stream_result(const ConvergentStream& cs_min, const ConvergentStream& cs_max,
                           const mpz_class& first) const {
        // with fewer than two convergents fall back to the digit bracket
        Interval out;
        if (cs_min.count >= 2) {
            out.lo = cs_min.enclosure().lo;
        } else {
            out.lo = mpq_class(first);
        }
        if (cs_max.count >= 2) {
            out.hi = cs_max.enclosure().hi;
        } else {
            out.hi = mpq_class(first + 1);
        }
        return out;
    }

    // Certified alpha range at digit position pos of word w over all alive
    // extensions.
    Interval alpha_interval(std::size_t w, std::size_t pos, const mpz_class& qq) const {
        const auto& ds = digits[w];
        ConvergentStream lo_cs, hi_cs;
        mpz_class first = pos < ds.size() ? ds[pos] : mpz_class(1);
        for (bool maximize : {false, true}) {
            ConvergentStream& cs = maximize ? hi_cs : lo_cs;
            std::size_t skip = 0;
            if (pos < ds.size()) {
                for (std::size_t i = pos; i < ds.size(); ++i) cs.push(ds[i]);
            } else {
                skip = pos - ds.size();
            }
            complete_right(w, skip, maximize, cs, qq);
        }
        return stream_result(lo_cs, hi_cs, first);
    }

    // Certified beta range [0; a_{pos-1}, a_{pos-2}, ...] at position pos.
    Interval beta_interval(std::size_t w, std::size_t pos, const mpz_class& qq) const {
        const auto& ds = digits[w];
        ConvergentStream lo_cs, hi_cs;
        for (bool maximize : {false, true}) {
            ConvergentStream& cs = maximize ? hi_cs : lo_cs;
            cs.push(0);
            for (std::size_t i = pos; i-- > 0;) {
                // positions past the word end (shifted fhat markers) are the
                // structural ones of the next (1,1,x) block
                cs.push(i < ds.size() ? ds[i] : mpz_class(1));
            }
            complete_left(w, maximize, cs, qq);
        }
        Interval out = stream_result(lo_cs, hi_cs, 0);
        if (out.lo < 0) out.lo = 0;
        if (out.hi > 1) out.hi = 1;
        return out;
    }

    const mpz_class& digit_at(std::size_t w, std::size_t pos) const {
        static const mpz_class one = 1;
        return pos < digits[w].size() ? digits[w][pos] : one;  // structural 1 past the end
    }

    std::vector<std::size_t> markers(std::size_t w, HeightKind kind) const {
        std::vector<std::size_t> out;
        if (kind == HeightKind::fhat || kind == HeightKind::ftilde) {
            for (std::size_t p = 2; p < digits[w].size(); p += 3) out.push_back(p);
        } else {
            for (std::size_t p = 0; p < digits[w].size(); ++p) out.push_back(p);
        }
        return out;
    }

    // Certified [lower, upper] bound of sup over in-word markers of the height
    // over all alive extensions of cylinder w.
    Interval word_bound(std::size_t w, HeightKind kind, const mpz_class& qq) const {
        std::optional<mpq_class> lo, hi;
        auto consider = [&](Branch b, std::size_t pos) {
            Interval A = alpha_interval(w, pos, qq);
            Interval B = beta_interval(w, pos, qq);
            Interval v = branch_interval(b, A, B, digit_at(w, pos));
            if (!lo || v.lo > *lo) lo = v.lo;
            if (!hi || v.hi > *hi) hi = v.hi;
        };
        auto star = [&](std::size_t pos) {
            if (digit_at(w, pos) == 1) {
                consider(Branch::mosh_a1, pos);
            } else {
                consider(Branch::kappa1, pos);
                consider(Branch::kappa2, pos);
            }
        };
        for (std::size_t pos : markers(w, kind)) {
            switch (kind) {
                case HeightKind::classical:
                    consider(Branch::sum, pos);
                    break;
                case HeightKind::l2:
                    consider(Branch::quarter, pos);
                    if (digit_at(w, pos) >= 2) {
                        consider(Branch::kappa1, pos);
                        consider(Branch::kappa2, pos);
                    }
                    break;
                case HeightKind::l2star:
                    star(pos);
                    break;
                case HeightKind::fhat:
                case HeightKind::ftilde:
                    star(pos);
                    star(pos + 1);
                    star(pos + 2);
                    break;
            }
        }
        return {*lo, *hi};
    }

    bool has_successor(std::size_t w) const { return next_state(w, true) >= 0; }
    bool has_predecessor(std::size_t w) const { return prev_state(w, true) >= 0; }

    // remove cylinders that no longer sit on a bi-infinite alive path
    void trim() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t w = 0; w < words.size(); ++w) {
                if (!alive[w]) continue;
                if (!has_successor(w) || !has_predecessor(w)) {
                    alive[w] = 0;
                    changed = true;
                }
            }
        }
    }
};

}  // namespace detail

// Finite-depth realization of a threshold-pruned set: the base spec, the
// surviving depth-cylinders (block-index paths and their digit words), and the
// shift relation among them.
struct PrunedSpec {
    CantorSpec base;
    HeightKind height = HeightKind::classical;
    mpq_class threshold;
    int depth = 1;
    std::vector<std::vector<std::size_t>> surviving;
    std::vector<std::vector<mpz_class>> surviving_digits;
    std::vector<std::vector<std::size_t>> successors;  // indices into surviving
    std::size_t candidate_count = 0;
    bool pruned = true;             // false: the global bound made pruning a no-op
    bool deterministic_core = false;  // every recurrent class is a single cycle

    bool empty() const { return pruned && surviving.empty(); }

    // One-sided projection for the dimension solver.  Each surviving cylinder
    // becomes one level-1 branch whose expansion constant is taken from its
    // full digit word, so level 1 here matches level `depth` of the base.
    CantorSpec induced() const {
        if (!pruned) return base;
        if (surviving.empty())
            throw domain_error("empty pruned spec has no induced subshift");
        std::vector<std::vector<bool>> tr(surviving.size(),
                                          std::vector<bool>(surviving.size(), false));
        for (std::size_t i = 0; i < successors.size(); ++i)
            for (std::size_t j : successors[i]) tr[i][j] = true;
        CantorSpec s = make_spec_custom(surviving_digits, std::move(tr));
        s.description = "pruned(" + base.description + ")";
        return s;
    }
};

namespace detail {

// true when every strongly connected component of the surviving graph is a
// single cycle (each member has exactly one in-component successor), so the
// realized set is a finite union of periodic orbits and has dimension zero
inline bool cycles_only(const std::vector<std::vector<std::size_t>>& succ) {
    std::size_t n = succ.size();
    std::vector<int> comp(n, -1), low(n), num(n, -1), stk;
    std::vector<char> onstk(n, 0);
    int counter = 0, ncomp = 0;
    // iterative Tarjan
    for (std::size_t root = 0; root < n; ++root) {
        if (num[root] >= 0) continue;
        std::vector<std::pair<std::size_t, std::size_t>> frame{{root, 0}};
        num[root] = low[root] = counter++;
        stk.push_back(static_cast<int>(root));
        onstk[root] = 1;
        while (!frame.empty()) {
            auto& [v, ei] = frame.back();
            if (ei < succ[v].size()) {
                std::size_t u = succ[v][ei++];
                if (num[u] < 0) {
                    num[u] = low[u] = counter++;
                    stk.push_back(static_cast<int>(u));
                    onstk[u] = 1;
                    frame.emplace_back(u, 0);
                } else if (onstk[u]) {
                    low[v] = std::min(low[v], num[u]);
                }
            } else {
                std::size_t v0 = v;
                frame.pop_back();
                if (!frame.empty())
                    low[frame.back().first] = std::min(low[frame.back().first], low[v0]);
                if (low[v0] == num[v0]) {
                    while (true) {
                        std::size_t u = static_cast<std::size_t>(stk.back());
                        stk.pop_back();
                        onstk[u] = 0;
                        comp[u] = ncomp;
                        if (u == v0) break;
                    }
                    ++ncomp;
                }
            }
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t inside = 0;
        for (std::size_t u : succ[v])
            if (comp[u] == comp[v]) ++inside;
        if (inside > 1) return false;
    }
    return true;
}

}  // namespace detail

// Threshold pruning: discard every depth-cylinder whose certified lower height
// bound (over all extensions that stay inside the surviving graph) exceeds t,
// iterating with trimming until a fixpoint.  When the certified global upper
// bound already sits at or below t, pruning is a no-op and the base spec is
// reported unchanged.
inline PrunedSpec prune(const CantorSpec& spec, HeightKind kind, const mpq_class& t, int depth,
                        std::size_t budget = 4'000'000) {
    if (depth < 1) throw domain_error("prune needs depth >= 1");
    detail::BlockShape shape = detail::spec_shape(spec);
    if ((kind == HeightKind::fhat || kind == HeightKind::ftilde) &&
        shape != detail::BlockShape::triple)
        throw domain_error("fhat pruning requires (1,1,x) blocks");

    PrunedSpec out;
    out.base = spec;
    out.height = kind;
    out.threshold = t;
    out.depth = depth;
    mpz_class qq = detail::gap_denominator(96);

    {
        // global upper bound from the depth-1 graph
        detail::PruneGraph g1(spec, 1, budget);
        std::optional<mpq_class> global_hi;
        for (std::size_t w = 0; w < g1.words.size(); ++w) {
            mpq_class hi = g1.word_bound(w, kind, qq).hi;
            if (!global_hi || hi > *global_hi) global_hi = hi;
        }
        if (*global_hi <= t) {
            // pruning is a no-op; report the base spec as-is without
            // materializing the (possibly huge) cylinder graph
            out.pruned = false;
            out.candidate_count = spec.blocks.size();
            if (spec.complete()) {
                out.deterministic_core = spec.blocks.size() == 1;
            } else {
                std::vector<std::vector<std::size_t>> succ(spec.blocks.size());
                for (std::size_t i = 0; i < spec.blocks.size(); ++i)
                    for (std::size_t j = 0; j < spec.blocks.size(); ++j)
                        if (spec.allowed(i, j)) succ[i].push_back(j);
                out.deterministic_core = detail::cycles_only(succ);
            }
            return out;
        }
    }

    detail::PruneGraph g(spec, depth, budget);
    out.candidate_count = g.words.size();
    bool changed = true;
    while (changed) {
        g.trim();
        changed = false;
        std::vector<std::size_t> kill;
        for (std::size_t w = 0; w < g.words.size(); ++w) {
            if (!g.alive[w]) continue;
            if (g.word_bound(w, kind, qq).lo > t) kill.push_back(w);
        }
        for (std::size_t w : kill) {
            g.alive[w] = 0;
            changed = true;
        }
    }

    std::vector<long> newid(g.words.size(), -1);
    for (std::size_t w = 0; w < g.words.size(); ++w) {
        if (!g.alive[w]) continue;
        newid[w] = static_cast<long>(out.surviving.size());
        out.surviving.push_back(g.words[w]);
        out.surviving_digits.push_back(g.digits[w]);
    }
    out.successors.resize(out.surviving.size());
    for (std::size_t w = 0; w < g.words.size(); ++w) {
        if (!g.alive[w] || g.succ_of[w] < 0) continue;
        for (std::size_t c : g.prefix_buckets[static_cast<std::size_t>(g.succ_of[w])])
            if (g.alive[c] && g.edge(w, c))
                out.successors[static_cast<std::size_t>(newid[w])].push_back(
                    static_cast<std::size_t>(newid[c]));
    }
    out.deterministic_core = detail::cycles_only(out.successors);
    return out;
}

// -- dimension-function sampling --------------------------------------------

struct DimensionSample {
    mpq_class t;
    double gamma = 0.0;
    double dhat = 0.0;
    std::size_t surviving = 0;
    bool pruned = true;
    bool deterministic_core = false;
    bool certified = false;
    // 2*gamma presumes the product symmetry of the unpruned horseshoe; once
    // pruning bites, the surviving set need not be a product and the doubling
    // is heuristic
    bool heuristic = false;
};

inline DimensionSample dimension_function_sample(const CantorSpec& spec, HeightKind kind,
                                                 const mpq_class& t, int depth,
                                                 std::size_t budget = 4'000'000) {
    PrunedSpec p = prune(spec, kind, t, depth, budget);
    DimensionSample out;
    out.t = t;
    out.surviving = p.pruned ? p.surviving.size() : p.candidate_count;
    out.pruned = p.pruned;
    out.deterministic_core = p.deterministic_core;
    if (p.empty() || p.deterministic_core) {
        out.gamma = 0.0;
        out.dhat = 0.0;
        out.certified = true;
        return out;
    }
    DimensionEstimate est = palis_takens_gamma(p.induced(), 1, Side::lower, false, budget);
    out.gamma = est.gamma;
    out.dhat = std::min(1.0, 2.0 * est.gamma);
    out.certified = est.certified;
    out.heuristic = p.pruned;
    return out;
}

// -- discontinuity witness --------------------------------------------------

// Which neighbor of the central block carries the doubled digit 2*k1: the one
// three positions left of the marker, or three positions right.  The
// construction is symmetric under reversal; the attaining branch is kappa1 in
// the first case and kappa2 in the second.
enum class WitnessOrientation { double_left, double_right };

struct WitnessShiftValue {
    long block_shift = 0;  // in units of three digits
    HeightValue value;
};

struct WitnessReport {
    long k0 = 0, k1 = 0;
    WitnessOrientation orientation = WitnessOrientation::double_left;
    MarkedSequence seq = MarkedSequence::periodic({mpz_class(1)}, 0);
    std::vector<WitnessShiftValue> shifts;
    HeightValue central;
    mpq_class bracket_lo, bracket_hi;  // 2/3 + 1/k0 - 1/(18 k1) +- remainder
    bool central_attains = false;
    bool in_bracket = false;
    bool branch_ok = false;
    bool ok = false;
};

// Marked block sequence with x_{-3} = 2 k1, x_0 = k0, x_3 = k1 (or mirrored),
// k1 = floor(k0^{3/2}), every other x = k0^2.  Verifies that fhat attains its
// sup at the central marker, on the expected branch, inside the predicted
// bracket; any failed check raises construction_error.
inline WitnessReport discontinuity_witness(long k0,
                                           WitnessOrientation o = WitnessOrientation::double_left,
                                           long k0_floor = 1000) {
    if (k0 < k0_floor) throw domain_error("discontinuity witness needs k0 >= its floor");
    WitnessReport rep;
    rep.k0 = k0;
    rep.orientation = o;
    mpz_class k0z(k0), k1z = isqrt(k0z * k0z * k0z);
    rep.k1 = static_cast<long>(k1z.get_si());
    mpz_class filler_x = k0z * k0z;
    mpz_class xm3 = o == WitnessOrientation::double_left ? 2 * k1z : k1z;
    mpz_class xp3 = o == WitnessOrientation::double_left ? k1z : 2 * k1z;

    const long W = 4;  // explicit blocks n = -W..W around the center
    std::vector<mpz_class> ds;
    for (long n = -W; n <= W; ++n) {
        mpz_class x = filler_x;
        if (n == -1) x = xm3;
        if (n == 0) x = k0z;
        if (n == 1) x = xp3;
        ds.push_back(x);
        ds.emplace_back(1);
        ds.emplace_back(1);
    }
    std::vector<mpz_class> filler{filler_x, mpz_class(1), mpz_class(1)};
    rep.seq = MarkedSequence::window(ds, static_cast<std::size_t>(3 * W), filler, filler);

    const int precision = 192;
    for (long m = -(W - 1); m <= W - 1; ++m) {
        MarkedSequence s = rep.seq;
        s.marker = static_cast<std::size_t>(3 * (W + m));
        WitnessShiftValue sv;
        sv.block_shift = m;
        sv.value = eval_height(HeightKind::fhat, s, precision);
        if (m == 0) rep.central = sv.value;
        rep.shifts.push_back(std::move(sv));
    }

    rep.central_attains = true;
    for (const auto& sv : rep.shifts)
        if (sv.block_shift != 0 && sv.value.hi >= rep.central.lo) rep.central_attains = false;

    Branch expect = o == WitnessOrientation::double_left ? Branch::kappa1 : Branch::kappa2;
    rep.branch_ok = rep.central.branch == expect && rep.central.shift == 0;

    mpq_class center = mpq_class(2, 3) + mpq_class(1, k0z) - mpq_class(1, 18 * k1z);
    mpq_class tol = mpq_class(1, 36 * k1z * k1z) + mpq_class(1, k0z * k0z);
    rep.bracket_lo = center - tol;
    rep.bracket_hi = center + tol;
    rep.in_bracket = rep.bracket_lo <= rep.central.lo && rep.central.hi <= rep.bracket_hi;

    rep.ok = rep.central_attains && rep.branch_ok && rep.in_bracket;
    if (!rep.ok)
        throw construction_error("discontinuity witness failed verification (k0 = " +
                                 std::to_string(k0) + ")");
    return rep;
}

}  // namespace cfspec
