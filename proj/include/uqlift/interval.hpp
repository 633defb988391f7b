#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "numeric.hpp"

namespace uqlift {

// Closed double interval. Every operation widens its result by one ulp on
// each side, which is enough under round-to-nearest.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {}
    explicit Interval(double x) : lo(x), hi(x) {}

    static double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
    static double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

    static Interval exact(const Integer& z) {
        double d = z.get_d();
        if (Integer(d) == z) return Interval(d);
        return Interval(down(d), up(d));
    }
    static Interval of_long(long long v) {
        double d = static_cast<double>(v);
        if (static_cast<long long>(d) == v) return Interval(d);
        return Interval(down(d), up(d));
    }

    bool positive() const { return lo > 0.0; }
    bool negative() const { return hi < 0.0; }
    bool nonneg() const { return lo >= 0.0; }
    bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
    double mid() const { return 0.5 * (lo + hi); }

    // +1/-1 when certain, 0 when the interval straddles zero
    int certain_sign() const { return lo > 0.0 ? 1 : (hi < 0.0 ? -1 : 0); }

    friend Interval operator+(const Interval& a, const Interval& b) { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
    friend Interval operator-(const Interval& a, const Interval& b) { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }
    friend Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
    friend Interval operator*(const Interval& a, const Interval& b) {
        double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
        return {down(std::min({p1, p2, p3, p4})), up(std::max({p1, p2, p3, p4}))};
    }
    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains_zero()) {
            double inf = std::numeric_limits<double>::infinity();
            return {-inf, inf};
        }
        double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
        return {down(std::min({p1, p2, p3, p4})), up(std::max({p1, p2, p3, p4}))};
    }
    Interval& operator+=(const Interval& o) { return *this = *this + o; }
    Interval& operator-=(const Interval& o) { return *this = *this - o; }
    Interval& operator*=(const Interval& o) { return *this = *this * o; }

    Interval sqrt() const {
        double l = lo <= 0.0 ? 0.0 : down(std::sqrt(lo));
        return {std::max(0.0, l), up(std::sqrt(std::max(0.0, hi)))};
    }
    Interval hull(const Interval& o) const { return {std::min(lo, o.lo), std::max(hi, o.hi)}; }
};

// MPFR interval with directed rounding. Used where double precision may be
// insufficient: unit-rank certification and test oracles.
class MpInterval {
public:
    explicit MpInterval(mpfr_prec_t prec = 128) {
        mpfr_init2(lo_, prec);
        mpfr_init2(hi_, prec);
        mpfr_set_zero(lo_, 1);
        mpfr_set_zero(hi_, 1);
    }
    MpInterval(const MpInterval& o) {
        mpfr_init2(lo_, mpfr_get_prec(o.lo_));
        mpfr_init2(hi_, mpfr_get_prec(o.hi_));
        mpfr_set(lo_, o.lo_, MPFR_RNDD);
        mpfr_set(hi_, o.hi_, MPFR_RNDU);
    }
    MpInterval& operator=(const MpInterval& o) {
        if (this != &o) {
            mpfr_set_prec(lo_, mpfr_get_prec(o.lo_));
            mpfr_set_prec(hi_, mpfr_get_prec(o.hi_));
            mpfr_set(lo_, o.lo_, MPFR_RNDD);
            mpfr_set(hi_, o.hi_, MPFR_RNDU);
        }
        return *this;
    }
    ~MpInterval() {
        mpfr_clear(lo_);
        mpfr_clear(hi_);
    }

    mpfr_prec_t prec() const { return mpfr_get_prec(lo_); }

    static MpInterval from_integer(const Integer& z, mpfr_prec_t prec) {
        MpInterval r(prec);
        mpfr_set_z(r.lo_, z.get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(r.hi_, z.get_mpz_t(), MPFR_RNDU);
        return r;
    }
    static MpInterval from_rational(const Rational& q, mpfr_prec_t prec) {
        MpInterval r(prec);
        mpfr_set_q(r.lo_, q.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(r.hi_, q.get_mpq_t(), MPFR_RNDU);
        return r;
    }
    static MpInterval sqrt_of(const Integer& z, mpfr_prec_t prec) {
        MpInterval r = from_integer(z, prec);
        return r.sqrt();
    }

    MpInterval operator+(const MpInterval& b) const {
        MpInterval r(prec());
        mpfr_add(r.lo_, lo_, b.lo_, MPFR_RNDD);
        mpfr_add(r.hi_, hi_, b.hi_, MPFR_RNDU);
        return r;
    }
    MpInterval operator-(const MpInterval& b) const {
        MpInterval r(prec());
        mpfr_sub(r.lo_, lo_, b.hi_, MPFR_RNDD);
        mpfr_sub(r.hi_, hi_, b.lo_, MPFR_RNDU);
        return r;
    }
    MpInterval operator-() const {
        MpInterval r(prec());
        mpfr_neg(r.lo_, hi_, MPFR_RNDD);
        mpfr_neg(r.hi_, lo_, MPFR_RNDU);
        return r;
    }
    MpInterval operator*(const MpInterval& b) const {
        MpInterval r(prec());
        mpfr_t t;
        mpfr_init2(t, prec());
        bool first = true;
        const mpfr_t* as[2] = {&lo_, &hi_};
        const mpfr_t* bs[2] = {&b.lo_, &b.hi_};
        for (auto* x : as) {
            for (auto* y : bs) {
                mpfr_mul(t, *x, *y, MPFR_RNDD);
                if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
                mpfr_mul(t, *x, *y, MPFR_RNDU);
                if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
                first = false;
            }
        }
        mpfr_clear(t);
        return r;
    }
    MpInterval sqrt() const {
        MpInterval r(prec());
        if (mpfr_sgn(lo_) <= 0)
            mpfr_set_zero(r.lo_, 1);
        else
            mpfr_sqrt(r.lo_, lo_, MPFR_RNDD);
        if (mpfr_sgn(hi_) <= 0)
            mpfr_set_zero(r.hi_, 1);
        else
            mpfr_sqrt(r.hi_, hi_, MPFR_RNDU);
        return r;
    }
    MpInterval abs() const {
        if (mpfr_sgn(lo_) >= 0) return *this;
        if (mpfr_sgn(hi_) <= 0) return -*this;
        MpInterval r(prec());
        mpfr_set_zero(r.lo_, 1);
        if (mpfr_cmpabs(lo_, hi_) > 0)
            mpfr_neg(r.hi_, lo_, MPFR_RNDU);
        else
            mpfr_set(r.hi_, hi_, MPFR_RNDU);
        return r;
    }
    // log of a positive interval; requires lo > 0
    MpInterval log() const {
        MpInterval r(prec());
        mpfr_log(r.lo_, lo_, MPFR_RNDD);
        mpfr_log(r.hi_, hi_, MPFR_RNDU);
        return r;
    }

    int certain_sign() const {
        if (mpfr_sgn(lo_) > 0) return 1;
        if (mpfr_sgn(hi_) < 0) return -1;
        return 0;
    }
    bool positive() const { return mpfr_sgn(lo_) > 0; }
    Rational lo_q() const {
        Rational q;
        mpfr_get_q(q.get_mpq_t(), lo_);
        return q;
    }
    Rational hi_q() const {
        Rational q;
        mpfr_get_q(q.get_mpq_t(), hi_);
        return q;
    }
    double lo_d() const { return mpfr_get_d(lo_, MPFR_RNDD); }
    double hi_d() const { return mpfr_get_d(hi_, MPFR_RNDU); }
    double mid_d() const { return 0.5 * (lo_d() + hi_d()); }

private:
    mpfr_t lo_;
    mpfr_t hi_;
};

}  // namespace uqlift
