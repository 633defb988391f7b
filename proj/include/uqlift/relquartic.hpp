#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "exactfield.hpp"
#include "interval.hpp"

namespace uqlift {

// a + b·w with a, b ∈ O_F
struct KElem {
    QInt a;
    QInt b;

    KElem() = default;
    KElem(QInt a_, QInt b_) : a(std::move(a_)), b(std::move(b_)) {}
    friend bool operator==(const KElem& x, const KElem& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator!=(const KElem& x, const KElem& y) { return !(x == y); }
    friend bool operator<(const KElem& x, const KElem& y) {
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    }
    std::string str() const { return "[" + a.str() + "," + b.str() + "]"; }
};

namespace fast {

// O_F element with 128-bit coordinates; every operation is overflow-checked.
struct Q2 {
    __int128 m;
    __int128 n;
};

inline Q2 add(Q2 a, Q2 b) { return {ck_add(a.m, b.m), ck_add(a.n, b.n)}; }
inline Q2 sub(Q2 a, Q2 b) { return {ck_sub(a.m, b.m), ck_sub(a.n, b.n)}; }
inline Q2 mul(Q2 a, Q2 b, long k, long c) {
    __int128 bf = ck_mul(a.n, b.n);
    return {ck_add(ck_mul(a.m, b.m), ck_mul(bf, c)), ck_add(ck_add(ck_mul(a.m, b.n), ck_mul(a.n, b.m)), ck_mul(bf, k))};
}
inline int sign(Q2 a, int embedding, long k, long D) {
    __int128 X = ck_add(ck_mul(a.m, 2), ck_mul(a.n, k));
    __int128 Y = embedding == 1 ? a.n : -a.n;
    return detail::sign_xy(X, Y, D);
}
inline bool tp(Q2 a, long k, long D) { return sign(a, 1, k, D) > 0 && sign(a, 2, k, D) > 0; }
inline bool tnn(Q2 a, long k, long D) { return sign(a, 1, k, D) >= 0 && sign(a, 2, k, D) >= 0; }

inline bool fits(const QInt& a) { return fits_i64(a.m) && fits_i64(a.n); }
inline Q2 of(const QInt& a) { return {to_i64(a.m), to_i64(a.n)}; }

}  // namespace fast

class RelOrder {
public:
    RelOrder() = default;

    static RelOrder make(const QuadField& F, const QInt& Delta) {
        if (!F.totally_positive(Delta))
            throw Error(ErrorCode::NotTotallyPositive, "Delta " + Delta.str() + " is not totally positive");
        auto t = F.mod4_square_class(Delta);
        if (!t) throw Error(ErrorCode::NoSquareClass, "Delta " + Delta.str() + " has no square class mod 4");
        if (F.sqrt(Delta)) throw Error(ErrorCode::DegenerateSquare, "Delta " + Delta.str() + " is a square in F");
        RelOrder O;
        O.F_ = F;
        O.Delta_ = Delta;
        O.t_ = *t;
        QInt num = F.sub(F.mul(*t, *t), Delta);
        O.n_ = QuadField::div_int(num, 4);
        for (int i = 1; i <= 2; ++i) {
            O.sqrt_delta_iv_[i - 1] = F.embed_iv(Delta, i).sqrt();
            O.t_iv_[i - 1] = F.embed_iv(*t, i);
        }
        O.small_ = fast::fits(Delta) && fast::fits(O.n_);
        if (O.small_) {
            O.delta2_ = fast::of(Delta);
            O.t2_ = fast::of(*t);
            O.n2_ = fast::of(O.n_);
        }
        return O;
    }

    const QuadField& F() const { return F_; }
    const QInt& Delta() const { return Delta_; }
    const QInt& t() const { return t_; }
    const QInt& n() const { return n_; }

    Integer abs_disc() const { return Integer(F_.D()) * F_.D() * F_.norm(Delta_); }

    // ---- ring ----
    KElem add(const KElem& x, const KElem& y) const { return {F_.add(x.a, y.a), F_.add(x.b, y.b)}; }
    KElem sub(const KElem& x, const KElem& y) const { return {F_.sub(x.a, y.a), F_.sub(x.b, y.b)}; }
    KElem neg(const KElem& x) const { return {F_.neg(x.a), F_.neg(x.b)}; }
    KElem scale(const KElem& x, const QInt& c) const { return {F_.mul(x.a, c), F_.mul(x.b, c)}; }
    // w² = t·w − n
    KElem mul(const KElem& x, const KElem& y) const {
        QInt bd = F_.mul(x.b, y.b);
        QInt a = F_.sub(F_.mul(x.a, y.a), F_.mul(bd, n_));
        QInt b = F_.add(F_.add(F_.mul(x.a, y.b), F_.mul(x.b, y.a)), F_.mul(bd, t_));
        return {a, b};
    }
    KElem pow(KElem x, unsigned long e) const {
        KElem r(QInt(1), QInt(0));
        while (e) {
            if (e & 1) r = mul(r, x);
            x = mul(x, x);
            e >>= 1;
        }
        return r;
    }
    // K/F conjugate: w ↦ t − w
    KElem conj(const KElem& x) const { return {F_.add(x.a, F_.mul(x.b, t_)), F_.neg(x.b)}; }

    QInt trace_F(const KElem& x) const { return F_.add(F_.scale(x.a, 2), F_.mul(x.b, t_)); }
    QInt norm_F(const KElem& x) const {
        return F_.add(F_.add(F_.mul(x.a, x.a), F_.mul(F_.mul(x.a, x.b), t_)), F_.mul(F_.mul(x.b, x.b), n_));
    }
    Integer trace_Q(const KElem& x) const { return F_.trace(trace_F(x)); }
    Integer norm_Q(const KElem& x) const { return F_.norm(norm_F(x)); }

    bool is_unit(const KElem& x) const {
        Integer N = norm_Q(x);
        return N == 1 || N == -1;
    }
    // inverse of a unit
    KElem unit_inverse(const KElem& x) const {
        QInt N = norm_F(x);
        if (!F_.is_unit(N)) throw Error(ErrorCode::NotAUnit, "element " + x.str() + " is not a unit");
        QInt Ninv = F_.scale(F_.conj(N), F_.norm(N));
        return scale(conj(x), Ninv);
    }

    // ---- signs ----
    // embeddings 1..4 = (ρ1,+√), (ρ1,−√), (ρ2,+√), (ρ2,−√)
    int sign(const KElem& x, int embedding) const {
        int i = embedding <= 2 ? 1 : 2;
        int pm = (embedding % 2 == 1) ? 1 : -1;
        QInt s = trace_F(x);
        int sx = F_.sign(s, i);
        int sy = pm * F_.sign(x.b, i);
        if (sy == 0) return sx;
        if (sx == 0) return sy;
        if (sx == sy) return sx;
        QInt d = F_.sub(F_.mul(s, s), F_.mul(F_.mul(x.b, x.b), Delta_));
        int sd = F_.sign(d, i);
        return sx > 0 ? sd : -sd;
    }

    // a + b·w ≻ 0  ⇔  s = 2a + bt ≻ 0 and s² − b²Δ ≻ 0
    bool totally_positive(const KElem& x) const { return tp_sb(trace_F(x), x.b); }
    bool totally_nonneg(const KElem& x) const { return tnn_sb(trace_F(x), x.b); }

    bool tp_sb(const QInt& s, const QInt& b) const {
        if (small_ && fast::fits(s) && fast::fits(b)) {
            try {
                return tp_fast(fast::of(s), fast::of(b));
            } catch (const Overflow&) {
            }
        }
        if (!F_.totally_positive(s)) return false;
        return F_.totally_positive(F_.sub(F_.mul(s, s), F_.mul(F_.mul(b, b), Delta_)));
    }
    bool tnn_sb(const QInt& s, const QInt& b) const {
        if (!F_.totally_nonneg(s)) return false;
        return F_.totally_nonneg(F_.sub(F_.mul(s, s), F_.mul(F_.mul(b, b), Delta_)));
    }

    // may throw Overflow
    bool tp_fast(fast::Q2 s, fast::Q2 b) const {
        long k = F_.tau_trace(), c = F_.tau_c(), D = F_.D();
        if (!fast::tp(s, k, D)) return false;
        fast::Q2 d = fast::sub(fast::mul(s, s, k, c), fast::mul(fast::mul(b, b, k, c), delta2_, k, c));
        return fast::tp(d, k, D);
    }
    bool small() const { return small_; }
    fast::Q2 t2() const { return t2_; }
    fast::Q2 n2() const { return n2_; }
    fast::Q2 delta2() const { return delta2_; }

    // ---- numerics ----
    Interval sqrt_delta_iv(int i) const { return sqrt_delta_iv_[i - 1]; }
    Interval t_iv(int i) const { return t_iv_[i - 1]; }
    Interval embed_iv(const KElem& x, int embedding) const {
        int i = embedding <= 2 ? 1 : 2;
        Interval s = F_.embed_iv(trace_F(x), i);
        Interval b = F_.embed_iv(x.b, i) * sqrt_delta_iv_[i - 1];
        Interval h(0.5);
        return embedding % 2 == 1 ? (s + b) * h : (s - b) * h;
    }
    double embed(const KElem& x, int embedding) const { return embed_iv(x, embedding).mid(); }

private:
    QuadField F_;
    QInt Delta_;
    QInt t_;
    QInt n_;
    std::array<Interval, 2> sqrt_delta_iv_{};
    std::array<Interval, 2> t_iv_{};
    bool small_ = false;
    fast::Q2 delta2_{0, 0}, t2_{0, 0}, n2_{0, 0};
};

inline RelOrder make_order(const QuadField& F, const QElem& Delta) { return RelOrder::make(F, F.require_integral(Delta)); }
inline int sign_quartic(const RelOrder& O, const KElem& x, int embedding) { return O.sign(x, embedding); }
inline Integer trace_Q(const RelOrder& O, const KElem& x) { return O.trace_Q(x); }
inline QInt trace_F(const RelOrder& O, const KElem& x) { return O.trace_F(x); }
inline QInt norm_F(const RelOrder& O, const KElem& x) { return O.norm_F(x); }

// ---- enumeration ----

namespace detail {

inline long floor_l(double x) { return static_cast<long>(std::floor(x)); }
inline long ceil_l(double x) { return static_cast<long>(std::ceil(x)); }

// Totally positive s ∈ O_F with Tr(s) = T, exact, ordered by n.
inline std::vector<std::pair<long, long>> tp_with_trace(const QuadField& F, long T) {
    std::vector<std::pair<long, long>> out;
    long k = F.tau_trace();
    long D = F.D();
    if (k == 0 && T % 2 != 0) return out;
    // |n|·√D < T
    Integer T2 = Integer(T) * T;
    if (T <= 0) return out;
    long nmax = to_i64(isqrt((T2 - 1) / D));
    for (long n = -nmax; n <= nmax; ++n) {
        if (k == 1 && ((T - n) % 2 != 0)) continue;
        long m = k == 1 ? (T - n) / 2 : T / 2;
        if (F.totally_positive(QInt(m, n))) out.emplace_back(m, n);
    }
    return out;
}

// Integral b with |ρ_i(b)| ≤ h_i (h_i given as upper bounds), outward box.
template <class Fn>
void for_box(const QuadField& F, double h1, double h2, Fn&& fn) {
    Interval sD = F.sqrtD_iv();
    double nb = ((Interval(h1) + Interval(h2)) / sD).hi;
    long nlo = -ceil_l(nb) - 1, nhi = ceil_l(nb) + 1;
    for (long n = nlo; n <= nhi; ++n) {
        Interval nn = Interval::of_long(n);
        Interval c1 = nn * F.tau_iv(1), c2 = nn * F.tau_iv(2);
        double lo = std::max((Interval(-h1) - c1).lo, (Interval(-h2) - c2).lo);
        double hi = std::min((Interval(h1) - c1).hi, (Interval(h2) - c2).hi);
        if (lo > hi) continue;
        for (long m = floor_l(lo); m <= ceil_l(hi); ++m) fn(m, n);
    }
}

}  // namespace detail

// Visits every totally positive a + b·w of O with Tr_{K/Q} exactly T, sorted
// by coordinates.
inline std::vector<KElem> tp_with_trace(const RelOrder& O, long T) {
    std::vector<KElem> out;
    const QuadField& F = O.F();
    long k = F.tau_trace(), c = F.tau_c();
    fast::Q2 t2 = fast::of(O.t());
    for (auto [sm, sn] : detail::tp_with_trace(F, T)) {
        QInt s(sm, sn);
        Interval s1 = F.embed_iv(sm, sn, 1), s2 = F.embed_iv(sm, sn, 2);
        double h1 = (s1 / O.sqrt_delta_iv(1)).hi, h2 = (s2 / O.sqrt_delta_iv(2)).hi;
        detail::for_box(F, h1, h2, [&](long bm, long bn) {
            // a = (s − b t)/2 must be integral
            fast::Q2 bt = fast::mul({bm, bn}, t2, k, c);
            __int128 xm = sm - bt.m, xn = sn - bt.n;
            if ((xm & 1) || (xn & 1)) return;
            QInt b(bm, bn);
            if (!O.tp_sb(s, b)) return;
            out.emplace_back(QInt(from_i128(xm / 2), from_i128(xn / 2)), b);
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Streams all totally positive elements with Tr_{K/Q} ≤ Tmax in (trace, coordinates)
// order. The callback may return false to stop.
template <class Fn>
void enumerate_tp_by_trace(const RelOrder& O, long Tmax, Fn&& fn) {
    for (long T = 1; T <= Tmax; ++T)
        for (const KElem& x : tp_with_trace(O, T))
            if (!fn(x, T)) return;
}

inline std::vector<KElem> enumerate_tp_by_trace(const RelOrder& O, long Tmax) {
    std::vector<KElem> out;
    enumerate_tp_by_trace(O, Tmax, [&](const KElem& x, long) {
        out.push_back(x);
        return true;
    });
    return out;
}

// m ∈ O_F with m + w ≻ 0, by increasing Tr_F(m), ties by ρ1(m).
class TpShiftGenerator {
public:
    explicit TpShiftGenerator(const RelOrder& O) : O_(&O) {
        const QuadField& F = O.F();
        // ρ_i(m) > L_i := (√ρ_i(Δ) − ρ_i(t))/2, so Tr(m) > L1 + L2
        Interval h(0.5);
        L_[0] = (O.sqrt_delta_iv(1) - O.t_iv(1)) * h;
        L_[1] = (O.sqrt_delta_iv(2) - O.t_iv(2)) * h;
        T_ = detail::floor_l((L_[0] + L_[1]).lo) - 1;
        if (F.tau_trace() == 0 && (T_ % 2 != 0)) --T_;
    }

    static bool admissible(const RelOrder& O, const QInt& m) {
        const QuadField& F = O.F();
        return O.tp_sb(F.add(F.scale(m, 2), O.t()), QInt(1));
    }

    QInt next() {
        while (pos_ >= buf_.size()) fill();
        return buf_[pos_++];
    }

private:
    void fill() {
        const QuadField& F = O_->F();
        buf_.clear();
        pos_ = 0;
        long k = F.tau_trace();
        long T = T_;
        T_ += (k == 0) ? 2 : 1;
        // ρ1(m) = (T + n√D)/2 > L1 and ρ2(m) = (T − n√D)/2 > L2
        Interval sD = F.sqrtD_iv();
        Interval TT = Interval::of_long(T);
        double nlo = ((Interval(2.0) * L_[0] - TT) / sD).lo;
        double nhi = ((TT - Interval(2.0) * L_[1]) / sD).hi;
        for (long n = detail::floor_l(nlo) - 1; n <= detail::ceil_l(nhi) + 1; ++n) {
            if (k == 1 && ((T - n) % 2 != 0)) continue;
            long m = k == 1 ? (T - n) / 2 : T / 2;
            QInt q(m, n);
            if (admissible(*O_, q)) buf_.push_back(q);
        }
    }

    const RelOrder* O_;
    std::array<Interval, 2> L_{};
    long T_ = 0;
    std::vector<QInt> buf_;
    std::size_t pos_ = 0;
};

}  // namespace uqlift
