#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cfspec/errors.hpp"
#include "cfspec/quad_surd.hpp"

namespace cfspec {

struct Convergent {
    mpz_class p;
    mpz_class q;
    std::size_t index = 0;
};

// Eventually periodic continued fraction [a0; a1, ..., am, (c1, ..., cL)].
// Empty period means a rational number.
//
// Canonical form: all partial quotients >= 1, a finite expansion of length
// >= 2 never ends in 1, the period is not a power of a shorter word and
// cannot be absorbed into the preperiod.
//
// Digit positions follow the classical subscripts: position 0 is the integer
// part a0, positions 1..m the preperiod, then the period repeats forever.
class CFExpansion {
public:
    CFExpansion() : a0_(0) {}

    CFExpansion(mpz_class a0, std::vector<mpz_class> preperiod, std::vector<mpz_class> period)
        : a0_(std::move(a0)), pre_(std::move(preperiod)), per_(std::move(period)) {
        canonicalize();
    }

    const mpz_class& integer_part() const { return a0_; }
    const std::vector<mpz_class>& preperiod() const { return pre_; }
    const std::vector<mpz_class>& period() const { return per_; }

    bool is_rational() const { return per_.empty(); }
    std::size_t period_length() const { return per_.size(); }
    // first digit position inside the periodic zone
    std::size_t period_start() const { return pre_.size() + 1; }

    const mpz_class& digit(std::size_t n) const {
        if (n == 0) return a0_;
        if (n <= pre_.size()) return pre_[n - 1];
        if (per_.empty()) throw domain_error("CFExpansion: digit index past a finite expansion");
        return per_[(n - period_start()) % per_.size()];
    }

    std::size_t total_finite_digits() const { return 1 + pre_.size(); }

    bool operator==(const CFExpansion& o) const {
        return a0_ == o.a0_ && pre_ == o.pre_ && per_ == o.per_;
    }

    // Grammar: `[a0; a1, a2, (c1, c2, ...)]`, whitespace insignificant,
    // e.g. `[0; (1)]`, `[2;(1,1,3)]`, `[1; 2, 2]`.
    static CFExpansion parse(const std::string& text);
    std::string str() const;

private:
    void canonicalize() {
        for (const auto& a : pre_)
            if (a < 1) throw domain_error("CFExpansion: partial quotients must be >= 1");
        for (const auto& c : per_)
            if (c < 1) throw domain_error("CFExpansion: partial quotients must be >= 1");
        if (per_.empty()) {
            // rational canonical form: no trailing 1 (fold [..., a, 1] -> [..., a+1])
            while (!pre_.empty() && pre_.back() == 1 && pre_.size() >= 2) {
                pre_.pop_back();
                pre_.back() += 1;
            }
            if (pre_.size() == 1 && pre_[0] == 1) {
                pre_.clear();
                a0_ += 1;
            }
            return;
        }
        // minimal period: no proper power of a shorter word
        for (std::size_t len = 1; len < per_.size(); ++len) {
            if (per_.size() % len != 0) continue;
            bool rep = true;
            for (std::size_t i = len; i < per_.size() && rep; ++i)
                rep = per_[i] == per_[i % len];
            if (rep) {
                per_.resize(len);
                break;
            }
        }
        // absorb the period into the preperiod as far as possible
        while (!pre_.empty() && pre_.back() == per_.back()) {
            pre_.pop_back();
            std::rotate(per_.begin(), per_.end() - 1, per_.end());
        }
    }

    mpz_class a0_;
    std::vector<mpz_class> pre_;
    std::vector<mpz_class> per_;
};

namespace detail {

// 2x2 integer Moebius matrix acting as x -> (a x + b) / (c x + d)
struct Moebius {
    mpz_class a = 1, b = 0, c = 0, d = 1;

    void push_digit(const mpz_class& t) {
        // multiply on the right by [[t, 1], [1, 0]]
        mpz_class na = a * t + b;
        mpz_class nc = c * t + d;
        b = a;
        d = c;
        a = na;
        c = nc;
    }

    QuadSurd apply(const QuadSurd& x) const {
        QuadSurd num = x * QuadSurd::from_int(a) + QuadSurd::from_int(b);
        QuadSurd den = x * QuadSurd::from_int(c) + QuadSurd::from_int(d);
        return num / den;
    }
};

}  // namespace detail

// Exact value of an expansion.  The purely periodic tail is the root > 1 of
// the fixed-point quadratic of its convergent matrix; the preperiod is then
// applied as a Moebius map.
inline QuadSurd cf_value(const CFExpansion& cf) {
    detail::Moebius head;
    head.push_digit(cf.integer_part());
    for (const auto& a : cf.preperiod()) head.push_digit(a);
    if (cf.is_rational()) {
        mpq_class v(head.a, head.c);
        v.canonicalize();
        return QuadSurd::from_rational(v);
    }
    detail::Moebius per;
    for (const auto& c : cf.period()) per.push_digit(c);
    // tail solves c x^2 + (d - a) x - b = 0; root > 1 has the + sqrt
    mpz_class A = per.c, B = per.d - per.a, C = -per.b;
    mpz_class disc = B * B - 4 * A * C;
    QuadSurd tail(-B, 1, 2 * A, disc);
    return head.apply(tail);
}

// Expansion of an exact value; the period is detected via the first repeated
// surd state of the Gauss orbit.
inline CFExpansion cf_expand(const QuadSurd& x0) {
    if (x0.is_rational()) {
        mpq_class v = x0.to_rational();
        mpz_class a0;
        mpz_fdiv_q(a0.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
        std::vector<mpz_class> digits;
        mpq_class rest = v - mpq_class(a0);
        while (rest != 0) {
            mpq_class inv = 1 / rest;
            mpz_class a;
            mpz_fdiv_q(a.get_mpz_t(), inv.get_num_mpz_t(), inv.get_den_mpz_t());
            digits.push_back(a);
            rest = inv - mpq_class(a);
        }
        return CFExpansion(a0, digits, {});
    }
    mpz_class a0 = x0.floor();
    QuadSurd x = (x0 - QuadSurd::from_int(a0)).inverse();
    std::vector<mpz_class> digits;
    std::map<std::tuple<mpz_class, mpz_class, mpz_class, mpz_class>, std::size_t> seen;
    for (std::size_t step = 0;; ++step) {
        if (step > 100000) throw budget_error("cf_expand: period not found within budget");
        auto key = std::make_tuple(x.p(), x.q(), x.r(), x.d());
        auto it = seen.find(key);
        if (it != seen.end()) {
            std::vector<mpz_class> pre(digits.begin(), digits.begin() + it->second);
            std::vector<mpz_class> per(digits.begin() + it->second, digits.end());
            return CFExpansion(a0, pre, per);
        }
        seen.emplace(key, step);
        mpz_class a = x.floor();
        digits.push_back(a);
        x = (x - QuadSurd::from_int(a)).inverse();
    }
}

// Convergents p_0/q_0 .. p_n/q_n by the standard recurrence.
inline std::vector<Convergent> convergents(const CFExpansion& cf, std::size_t n) {
    if (cf.is_rational() && n >= cf.total_finite_digits())
        throw domain_error("convergents: index past a finite expansion");
    std::vector<Convergent> out;
    mpz_class pm1 = 1, qm1 = 0, pm2 = 0, qm2 = 1;
    for (std::size_t i = 0; i <= n; ++i) {
        const mpz_class& a = cf.digit(i);
        mpz_class p = a * pm1 + pm2;
        mpz_class q = a * qm1 + qm2;
        out.push_back({p, q, i});
        pm2 = pm1;
        qm2 = qm1;
        pm1 = p;
        qm1 = q;
    }
    return out;
}

// alpha_n = [a_n; a_{n+1}, ...], exact.
inline QuadSurd tail_alpha(const CFExpansion& cf, std::size_t n) {
    if (cf.is_rational()) throw domain_error("tail_alpha: rational input has no infinite tail");
    std::vector<mpz_class> pre, per;
    mpz_class a0 = cf.digit(n);
    std::size_t ps = cf.period_start();
    if (n < ps) {
        for (std::size_t i = n + 1; i < ps; ++i) pre.push_back(cf.digit(i));
        per = cf.period();
    } else {
        std::size_t idx = (n - ps) % cf.period_length();
        for (std::size_t j = 1; j <= cf.period_length(); ++j)
            per.push_back(cf.period()[(idx + j) % cf.period_length()]);
    }
    return cf_value(CFExpansion(a0, pre, per));
}

// Limit of beta_m = [0; a_{m-1}, ..., a_1] over m -> infinity in the residue
// class of n modulo the period length: the purely periodic value of the
// reversed period rotated to end just before position n.
inline QuadSurd limit_beta(const CFExpansion& cf, std::size_t n) {
    if (cf.is_rational()) throw domain_error("limit_beta: rational input has no infinite tail");
    std::size_t L = cf.period_length();
    std::size_t ps = cf.period_start();
    // residue of position n within the period (works as a residue class for
    // any n since only n mod L matters)
    std::size_t idx = (n + L * (ps / L + 1) - ps) % L;
    std::vector<mpz_class> per;
    for (std::size_t j = 0; j < L; ++j)
        per.push_back(cf.period()[(idx + L - 1 - j % L) % L]);
    return cf_value(CFExpansion(0, {}, per));
}

// -- string grammar ---------------------------------------------------------

inline CFExpansion CFExpansion::parse(const std::string& text) {
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto expect = [&](char c) {
        skip();
        if (i >= text.size() || text[i] != c)
            throw domain_error(std::string("CF parse: expected '") + c + "' in " + text);
        ++i;
    };
    auto integer = [&]() -> mpz_class {
        skip();
        std::size_t j = i;
        if (j < text.size() && (text[j] == '-' || text[j] == '+')) ++j;
        std::size_t k = j;
        while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
        if (k == j) throw domain_error("CF parse: expected integer in " + text);
        mpz_class v(text.substr(i, k - i));
        i = k;
        return v;
    };
    expect('[');
    mpz_class a0 = integer();
    std::vector<mpz_class> pre, per;
    skip();
    if (i < text.size() && text[i] == ';') {
        ++i;
        skip();
        bool in_period = false;
        while (true) {
            skip();
            if (i < text.size() && text[i] == '(') {
                ++i;
                in_period = true;
            }
            skip();
            if (i < text.size() && text[i] == ']') break;
            mpz_class v = integer();
            (in_period ? per : pre).push_back(v);
            skip();
            if (i < text.size() && text[i] == ',') {
                ++i;
                continue;
            }
            if (in_period) {
                expect(')');
                in_period = false;
            }
            skip();
            if (i < text.size() && text[i] == ']') break;
            if (i < text.size() && text[i] == ',') {
                ++i;
                continue;
            }
        }
    }
    expect(']');
    skip();
    if (i != text.size()) throw domain_error("CF parse: trailing characters in " + text);
    return CFExpansion(a0, pre, per);
}

inline std::string CFExpansion::str() const {
    std::ostringstream os;
    os << "[" << a0_;
    if (!pre_.empty() || !per_.empty()) os << "; ";
    for (std::size_t i = 0; i < pre_.size(); ++i) {
        os << pre_[i];
        if (i + 1 < pre_.size() || !per_.empty()) os << ", ";
    }
    if (!per_.empty()) {
        os << "(";
        for (std::size_t i = 0; i < per_.size(); ++i) {
            os << per_[i];
            if (i + 1 < per_.size()) os << ", ";
        }
        os << ")";
    }
    os << "]";
    return os.str();
}

}  // namespace cfspec
