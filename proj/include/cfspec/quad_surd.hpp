#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <compare>
#include <ostream>
#include <string>
#include <utility>

#include "cfspec/errors.hpp"
#include "cfspec/intmath.hpp"

namespace cfspec {

// Minimal RAII wrapper around an mpfr_t.
class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t prec = 128) { mpfr_init2(v_, prec); }
    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

private:
    mpfr_t v_;
};

// Exact element (p + q*sqrt(d)) / r of a real quadratic field.
//
// Canonical form: r > 0, gcd(p, q, r) = 1, d squarefree, and d = 0 whenever
// the value is rational (q folded into p for d in {0, 1}).  All arithmetic is
// exact; mixing two distinct irrational fields throws.
class QuadSurd {
public:
    QuadSurd() : p_(0), q_(0), r_(1), d_(0) {}

    QuadSurd(const mpz_class& p, const mpz_class& q, const mpz_class& r, const mpz_class& d) {
        if (r == 0) throw domain_error("QuadSurd: denominator r must be nonzero");
        if (d < 0) throw domain_error("QuadSurd: radicand d must be nonnegative");
        p_ = p;
        q_ = q;
        r_ = r;
        d_ = d;
        normalize();
    }

    static QuadSurd from_rational(const mpq_class& x) {
        return QuadSurd(x.get_num(), 0, x.get_den(), 0);
    }
    static QuadSurd from_int(const mpz_class& n) { return QuadSurd(n, 0, 1, 0); }
    static QuadSurd sqrt_of(const mpz_class& d) { return QuadSurd(0, 1, 1, d); }

    const mpz_class& p() const { return p_; }
    const mpz_class& q() const { return q_; }
    const mpz_class& r() const { return r_; }
    const mpz_class& d() const { return d_; }

    bool is_rational() const { return q_ == 0; }
    bool is_zero() const { return p_ == 0 && q_ == 0; }

    mpq_class to_rational() const {
        if (!is_rational()) throw domain_error("QuadSurd: value is irrational");
        mpq_class res(p_, r_);
        res.canonicalize();
        return res;
    }

    // -- arithmetic ---------------------------------------------------------

    QuadSurd operator-() const { return raw(-p_, -q_, r_, d_); }

    friend QuadSurd operator+(const QuadSurd& a, const QuadSurd& b) {
        mpz_class d = join_field(a, b);
        return raw(a.p_ * b.r_ + b.p_ * a.r_, a.q_ * b.r_ + b.q_ * a.r_, a.r_ * b.r_, d);
    }
    friend QuadSurd operator-(const QuadSurd& a, const QuadSurd& b) { return a + (-b); }

    friend QuadSurd operator*(const QuadSurd& a, const QuadSurd& b) {
        mpz_class d = join_field(a, b);
        return raw(a.p_ * b.p_ + a.q_ * b.q_ * d, a.p_ * b.q_ + a.q_ * b.p_, a.r_ * b.r_, d);
    }

    QuadSurd inverse() const {
        if (is_zero()) throw domain_error("QuadSurd: division by zero");
        // 1 / ((p + q sqrt d)/r) = r (p - q sqrt d) / (p^2 - q^2 d)
        mpz_class norm = p_ * p_ - q_ * q_ * d_;
        return raw(r_ * p_, -r_ * q_, norm, d_);
    }
    friend QuadSurd operator/(const QuadSurd& a, const QuadSurd& b) { return a * b.inverse(); }

    friend QuadSurd operator+(const QuadSurd& a, const mpq_class& c) {
        return a + from_rational(c);
    }
    friend QuadSurd operator*(const QuadSurd& a, const mpq_class& c) {
        return a * from_rational(c);
    }

    // -- exact order --------------------------------------------------------

    int sign() const {
        if (q_ == 0) return sgn(p_);
        if (p_ == 0) return sgn(q_);
        if (sgn(p_) == sgn(q_)) return sgn(p_);
        // opposite signs: compare p^2 with q^2 d
        int c = cmp(mpz_class(p_ * p_), mpz_class(q_ * q_ * d_));
        return c == 0 ? 0 : (c > 0 ? sgn(p_) : sgn(q_));
    }

    // Three-way comparison; requires both values in a common field (either
    // shares the same d or one side rational).  Cross-field order is decided
    // by compare_cross_field.
    int compare(const QuadSurd& o) const {
        if (d_ != 0 && o.d_ != 0 && d_ != o.d_) return compare_cross_field(o);
        return (*this - o).sign();
    }
    int compare(const mpq_class& c) const { return (*this - from_rational(c)).sign(); }

    bool operator==(const QuadSurd& o) const {
        return p_ == o.p_ && q_ == o.q_ && r_ == o.r_ && d_ == o.d_;
    }

    // Exact order between values of different quadratic fields via
    // adaptive-precision enclosures; equality is only possible when both are
    // rational (then handled exactly).
    int compare_cross_field(const QuadSurd& o) const {
        if (is_rational() && o.is_rational()) return cmp(to_rational(), o.to_rational());
        for (mpfr_prec_t prec = 128; prec <= 1 << 16; prec *= 2) {
            BigFloat alo(prec), ahi(prec), blo(prec), bhi(prec);
            eval(alo.get(), MPFR_RNDD);
            eval(ahi.get(), MPFR_RNDU);
            o.eval(blo.get(), MPFR_RNDD);
            o.eval(bhi.get(), MPFR_RNDU);
            if (mpfr_less_p(ahi.get(), blo.get())) return -1;
            if (mpfr_greater_p(alo.get(), bhi.get())) return 1;
        }
        throw budget_error("cross-field comparison failed to separate enclosures");
    }

    mpz_class floor() const {
        // sqrt part bracket: fl <= q sqrt(d) < fl + 1 (strict since irrational
        // whenever q != 0 and d > 0 squarefree)
        mpz_class fl;
        if (q_ == 0) {
            fl = 0;
        } else if (q_ > 0) {
            fl = isqrt(mpz_class(q_ * q_ * d_));
        } else {
            fl = -isqrt(mpz_class(q_ * q_ * d_)) - 1;
        }
        mpz_class m;
        mpz_fdiv_q(m.get_mpz_t(), mpz_class(p_ + fl).get_mpz_t(), r_.get_mpz_t());
        // exact fixup: want m <= x < m+1
        while (compare_int(m) < 0) m -= 1;
        while (compare_int(mpz_class(m + 1)) >= 0) m += 1;
        return m;
    }

    // -- numeric views ------------------------------------------------------

    void eval(mpfr_ptr out, mpfr_rnd_t rnd) const {
        mpfr_prec_t prec = mpfr_get_prec(out);
        BigFloat s(prec + 32), num(prec + 32);
        mpfr_set_z(s.get(), d_.get_mpz_t(), rnd);
        mpfr_sqrt(s.get(), s.get(), q_ >= 0 ? rnd : invert(rnd));
        mpfr_mul_z(s.get(), s.get(), q_.get_mpz_t(), rnd);
        mpfr_add_z(num.get(), s.get(), p_.get_mpz_t(), rnd);
        mpfr_div_z(out, num.get(), r_.get_mpz_t(), r_ > 0 ? rnd : invert(rnd));
    }

    double to_double() const {
        BigFloat f(128);
        eval(f.get(), MPFR_RNDN);
        return f.to_double();
    }

    // Decimal rendering with `digits` significant digits, round-half-even.
    std::string to_decimal(int digits = 30) const {
        BigFloat f(static_cast<mpfr_prec_t>(digits * 4 + 64));
        eval(f.get(), MPFR_RNDN);
        char buf[256];
        mpfr_snprintf(buf, sizeof buf, "%.*RNg", digits, f.get());
        return buf;
    }

    friend std::ostream& operator<<(std::ostream& os, const QuadSurd& x) {
        if (x.is_rational()) {
            os << x.p_;
            if (x.r_ != 1) os << "/" << x.r_;
            return os;
        }
        os << "(" << x.p_;
        if (x.q_ >= 0) os << "+";
        os << x.q_ << "*sqrt(" << x.d_ << "))/" << x.r_;
        return os;
    }

private:
    // Constructor for values whose d is already squarefree; only folds
    // rational content and signs.  Avoids re-factoring in arithmetic.
    static QuadSurd raw(mpz_class p, mpz_class q, mpz_class r, mpz_class d) {
        QuadSurd x;
        x.p_ = std::move(p);
        x.q_ = std::move(q);
        x.r_ = std::move(r);
        x.d_ = std::move(d);
        if (x.r_ == 0) throw domain_error("QuadSurd: denominator r must be nonzero");
        x.reduce();
        return x;
    }

    static mpz_class join_field(const QuadSurd& a, const QuadSurd& b) {
        if (a.d_ == 0) return b.d_;
        if (b.d_ == 0) return a.d_;
        if (a.d_ != b.d_)
            throw domain_error("QuadSurd: arithmetic across distinct quadratic fields");
        return a.d_;
    }

    static mpfr_rnd_t invert(mpfr_rnd_t rnd) {
        if (rnd == MPFR_RNDD) return MPFR_RNDU;
        if (rnd == MPFR_RNDU) return MPFR_RNDD;
        return rnd;
    }

    // sign of x - m for integer m
    int compare_int(const mpz_class& m) const {
        return raw(p_ - m * r_, q_, r_, d_).sign();
    }

    void normalize() {
        auto [m, s] = squarefree_split(d_ == 0 ? mpz_class(1) : d_);
        if (d_ == 0) m = 0;
        q_ *= s;
        d_ = m;
        if (d_ == 1 || d_ == 0) {
            if (d_ == 1) p_ += q_;
            q_ = 0;
            d_ = 0;
        }
        reduce();
    }

    void reduce() {
        if (q_ == 0) d_ = 0;
        if (d_ == 0) q_ = 0;
        if (r_ < 0) {
            p_ = -p_;
            q_ = -q_;
            r_ = -r_;
        }
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), p_.get_mpz_t(), q_.get_mpz_t());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), r_.get_mpz_t());
        if (g > 1) {
            p_ /= g;
            q_ /= g;
            r_ /= g;
        }
    }

    mpz_class p_, q_, r_, d_;
};

}  // namespace cfspec
