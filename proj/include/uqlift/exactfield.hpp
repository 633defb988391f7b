#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <optional>
#include <string>
#include <utility>

#include "errors.hpp"
#include "interval.hpp"
#include "numeric.hpp"

namespace uqlift {

// Integral element m + n·τ of O_F.
struct QInt {
    Integer m;
    Integer n;

    QInt() = default;
    QInt(Integer m_, Integer n_) : m(std::move(m_)), n(std::move(n_)) {}
    QInt(long m_) : m(m_), n(0) {}  // NOLINT: rational integers embed implicitly

    bool is_zero() const { return m == 0 && n == 0; }
    friend bool operator==(const QInt& a, const QInt& b) { return a.m == b.m && a.n == b.n; }
    friend bool operator!=(const QInt& a, const QInt& b) { return !(a == b); }
    // lexicographic (m, n); used only for canonical ordering
    friend bool operator<(const QInt& a, const QInt& b) {
        int c = cmp(a.m, b.m);
        if (c != 0) return c < 0;
        return a.n < b.n;
    }
    std::string str() const { return "[" + m.get_str() + "," + n.get_str() + "]"; }
};

// Element x + y·√D with rational coordinates.
struct QElem {
    Rational x;
    Rational y;

    QElem() = default;
    QElem(Rational x_, Rational y_) : x(std::move(x_)), y(std::move(y_)) {}
    friend bool operator==(const QElem& a, const QElem& b) { return a.x == b.x && a.y == b.y; }
    QElem operator+(const QElem& o) const { return {x + o.x, y + o.y}; }
    QElem operator-(const QElem& o) const { return {x - o.x, y - o.y}; }
    QElem operator-() const { return {-x, -y}; }
};

namespace detail {

// sign of X + Y·√D for integers, D > 0 not a square
inline int sign_xy(const Integer& X, const Integer& Y, long D) {
    int sx = sgn(X), sy = sgn(Y);
    if (sy == 0) return sx;
    if (sx == 0) return sy;
    if (sx == sy) return sx;
    Integer d = X * X - Y * Y * D;
    int sd = sgn(d);
    return sx > 0 ? sd : -sd;
}

inline int sign_xy(__int128 X, __int128 Y, long D) {
    int sx = (X > 0) - (X < 0), sy = (Y > 0) - (Y < 0);
    if (sy == 0) return sx;
    if (sx == 0) return sy;
    if (sx == sy) return sx;
    __int128 d = ck_sub(ck_mul(X, X), ck_mul(ck_mul(Y, Y), D));
    int sd = (d > 0) - (d < 0);
    return sx > 0 ? sd : -sd;
}

}  // namespace detail

class QuadField {
public:
    QuadField() = default;

    // Builds O_F = Z + Zτ and its fundamental unit.
    static QuadField make(long D) {
        if (D <= 1) throw Error(ErrorCode::DegenerateInput, "D must exceed 1, got " + std::to_string(D));
        if (!is_fundamental_discriminant(D))
            throw Error(ErrorCode::NotFundamental, std::to_string(D) + " is not a fundamental discriminant");
        QuadField F;
        F.D_ = D;
        if (D % 4 == 1) {
            F.k_ = 1;
            F.c_ = (D - 1) / 4;
        } else {
            F.k_ = 0;
            F.c_ = D / 4;
        }
        F.sqrtD_ = Interval::of_long(D).sqrt();
        Interval half(0.5);
        Interval kh = Interval(0.5 * F.k_);
        F.tau_iv_[0] = kh + half * F.sqrtD_;
        F.tau_iv_[1] = kh - half * F.sqrtD_;
        F.eps_fund_ = F.compute_fundamental_unit();
        F.eps_square_ = F.mul(F.eps_fund_, F.eps_fund_);
        F.init_square_classes();
        return F;
    }

    long D() const { return D_; }
    bool tau_half() const { return k_ == 1; }
    // τ² = k·τ + c
    long tau_trace() const { return k_; }
    long tau_c() const { return c_; }
    const QInt& eps_fund() const { return eps_fund_; }
    const QInt& eps_square() const { return eps_square_; }

    // l_F = √D/2 + 1 as (1, 1/2)
    QElem l_F() const { return {Rational(1), Rational(1, 2)}; }

    // U_F = {0, 1, τ, 1+τ}
    static std::array<QInt, 4> residue_system() { return {QInt(0, 0), QInt(1, 0), QInt(0, 1), QInt(1, 1)}; }

    // ---- ring operations on O_F ----
    QInt add(const QInt& a, const QInt& b) const { return {a.m + b.m, a.n + b.n}; }
    QInt sub(const QInt& a, const QInt& b) const { return {a.m - b.m, a.n - b.n}; }
    QInt neg(const QInt& a) const { return {-a.m, -a.n}; }
    QInt mul(const QInt& a, const QInt& b) const {
        Integer bf = a.n * b.n;
        return {a.m * b.m + bf * c_, a.m * b.n + a.n * b.m + bf * k_};
    }
    QInt scale(const QInt& a, const Integer& s) const { return {a.m * s, a.n * s}; }
    QInt conj(const QInt& a) const { return {a.m + a.n * k_, -a.n}; }
    Integer trace(const QInt& a) const { return 2 * a.m + a.n * k_; }
    Integer norm(const QInt& a) const { return a.m * a.m + k_ * a.m * a.n - c_ * a.n * a.n; }
    QInt pow(QInt a, unsigned long e) const {
        QInt r(1);
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

    // exact division a / b in O_F; nullopt if the quotient is not integral
    std::optional<QInt> divexact(const QInt& a, const QInt& b) const {
        Integer N = norm(b);
        if (N == 0) throw Error(ErrorCode::InvalidArgument, "division by zero");
        QInt num = mul(a, conj(b));
        if (mod(num.m, abs(N)) != 0 || mod(num.n, abs(N)) != 0) return std::nullopt;
        return QInt(Integer(num.m / N), Integer(num.n / N));
    }
    // a ≡ 0 mod s for a rational integer s
    static bool divisible(const QInt& a, long s) { return mod(a.m, s) == 0 && mod(a.n, s) == 0; }
    static QInt div_int(const QInt& a, long s) { return {Integer(a.m / s), Integer(a.n / s)}; }

    // ---- conversions ----
    QElem to_qelem(const QInt& a) const { return {Rational(a.m) + make_q(a.n * k_, 2), make_q(a.n, 2)}; }
    std::optional<QInt> to_qint(const QElem& e) const {
        Rational n = 2 * e.y;
        if (n.get_den() != 1) return std::nullopt;
        Rational m = e.x - make_q(n.get_num() * k_, 2);
        if (m.get_den() != 1) return std::nullopt;
        return QInt(m.get_num(), n.get_num());
    }
    QInt require_integral(const QElem& e) const {
        auto q = to_qint(e);
        if (!q) throw Error(ErrorCode::NotIntegral, "element is not in O_F");
        return *q;
    }

    // ---- signs and embeddings ----
    // embedding ∈ {1, 2}
    int sign(const QInt& a, int embedding) const {
        if (fits_i64(a.m) && fits_i64(a.n)) {
            __int128 X = (__int128)to_i64(a.m) * 2 + (__int128)to_i64(a.n) * k_;
            __int128 Y = embedding == 1 ? (__int128)to_i64(a.n) : -(__int128)to_i64(a.n);
            try {
                return detail::sign_xy(X, Y, D_);
            } catch (const Overflow&) {
            }
        }
        Integer X = 2 * a.m + a.n * k_;
        Integer Y = embedding == 1 ? a.n : Integer(-a.n);
        return detail::sign_xy(X, Y, D_);
    }
    int sign(const QElem& e, int embedding) const {
        Integer den = lcm_den(e);
        Integer X = e.x.get_num() * (den / e.x.get_den());
        Integer Y = e.y.get_num() * (den / e.y.get_den());
        if (embedding == 2) Y = -Y;
        return detail::sign_xy(X, Y, D_);
    }
    bool totally_positive(const QInt& a) const { return sign(a, 1) > 0 && sign(a, 2) > 0; }
    bool totally_nonneg(const QInt& a) const { return sign(a, 1) >= 0 && sign(a, 2) >= 0; }
    bool totally_positive(const QElem& a) const { return sign(a, 1) > 0 && sign(a, 2) > 0; }
    bool totally_nonneg(const QElem& a) const { return sign(a, 1) >= 0 && sign(a, 2) >= 0; }
    // a ⪯ b
    bool leq(const QInt& a, const QInt& b) const { return totally_nonneg(sub(b, a)); }

    double embed(const QInt& a, int embedding) const {
        double t = embedding == 1 ? tau_iv_[0].mid() : tau_iv_[1].mid();
        return a.m.get_d() + a.n.get_d() * t;
    }
    Interval embed_iv(const QInt& a, int embedding) const {
        return Interval::exact(a.m) + Interval::exact(a.n) * tau_iv_[embedding - 1];
    }
    Interval embed_iv(long long m, long long n, int embedding) const {
        return Interval::of_long(m) + Interval::of_long(n) * tau_iv_[embedding - 1];
    }
    const Interval& tau_iv(int embedding) const { return tau_iv_[embedding - 1]; }
    const Interval& sqrtD_iv() const { return sqrtD_; }

    // floor of the real number x + y√D (embedding 1)
    Integer floor_real(const QElem& e) const {
        Integer est = floor_q(e.x);
        Integer Y = e.y.get_num();
        Integer root = isqrt(Y * Y * D_);  // floor(|Y|√D)
        Integer yy = Y >= 0 ? floor_div(root, e.y.get_den()) : Integer(-ceil_div(root + 1, e.y.get_den()));
        est += yy;
        // est is within a few units of the true floor; settle exactly
        while (sign(QElem(e.x - Rational(est), e.y), 1) < 0) est -= 1;
        while (sign(QElem(e.x - Rational(est + 1), e.y), 1) >= 0) est += 1;
        return est;
    }
    Integer ceil_real(const QElem& e) const { return -floor_real(-e); }

    // ---- residues ----
    std::optional<QInt> mod4_square_class(const QInt& a) const {
        Integer rm = mod(a.m, 4), rn = mod(a.n, 4);
        for (int i = 0; i < 4; ++i)
            if (sq_res_[i].first == rm && sq_res_[i].second == rn) return residue_system()[i];
        return std::nullopt;
    }

    // α ∈ O_F with x ≤ ρ1(α) < x + l_F and y ≤ ρ2(α) < y + l_F
    QInt round_to_box(const Rational& x, const Rational& y) const {
        // k: x − y − k√D ∈ (−√D/2, √D/2]  ⇔  k = ⌈(x−y)/√D − 1/2⌉
        Rational d = x - y;
        QElem kt(Rational(-1, 2), d / Rational(D_));  // (x−y)/√D = (x−y)√D / D
        Integer k = ceil_real(kt);
        // x' + y' = x + y − k·Tr(τ);  m = ⌈(x' + y' + √D/2) / 2⌉
        Rational s = x + y - Rational(k * k_);
        Integer m = ceil_real(QElem(s / 2, Rational(1, 4)));
        return QInt(m, k);
    }

    // ---- fundamental domain ----
    // γ = ρ1(eps_square)
    QElem gamma() const { return to_qelem(eps_square_); }

    // 1/γ ≤ ρ1(α)/ρ2(α) < γ via ρ1(εα − ᾱ) ≥ 0 and ρ1(εᾱ − α) > 0
    bool in_fundamental_domain(const QInt& a) const {
        if (!totally_positive(a)) throw Error(ErrorCode::NotTotallyPositive, "fundamental domain needs α ≻ 0");
        QInt ab = conj(a);
        return sign(sub(mul(eps_square_, a), ab), 1) >= 0 && sign(sub(mul(eps_square_, ab), a), 1) > 0;
    }

    bool is_unit(const QInt& a) const {
        Integer N = norm(a);
        return N == 1 || N == -1;
    }

    // exact square root in O_F if a is a square. With a = (A + B√D)/2 and
    // s = (X + Y√D)/2: X² + Y²D = 2A, XY = B, X² − Y²D = ±4√N(a).
    std::optional<QInt> sqrt(const QInt& a) const {
        if (a.is_zero()) return QInt(0, 0);
        if (!totally_nonneg(a)) return std::nullopt;
        Integer N = norm(a);
        if (!is_perfect_square(N)) return std::nullopt;
        Integer r = isqrt(N);
        Integer A = 2 * a.m + a.n * k_;
        Integer B = a.n;
        for (int e : {1, -1}) {
            Integer X2 = A + e * 2 * r;
            Integer Y2D = A - e * 2 * r;
            if (X2 < 0 || Y2D < 0 || mod(Y2D, D_) != 0) continue;
            Integer Y2 = Y2D / D_;
            if (!is_perfect_square(X2) || !is_perfect_square(Y2)) continue;
            Integer X = isqrt(X2), Y = isqrt(Y2);
            if (X * Y != abs(B)) continue;
            if (B < 0) Y = -Y;
            auto s = to_qint(QElem(make_q(X, 2), make_q(Y, 2)));
            if (!s) continue;
            if (mul(*s, *s) == a) return *s;
            QInt t = neg(*s);
            if (mul(t, t) == a) return t;
        }
        return std::nullopt;
    }

private:
    static Integer lcm_den(const QElem& e) {
        Integer g = gcd(e.x.get_den(), e.y.get_den());
        return e.x.get_den() / g * e.y.get_den();
    }

    // Continued fraction of τ; the first convergent p/q with N(p − qτ) = ±1
    // yields the fundamental unit.
    QInt compute_fundamental_unit() const {
        // τ = (P + √N)/Q
        Integer P = k_ == 1 ? 1 : 0;
        Integer Q = k_ == 1 ? 2 : 1;
        long N = k_ == 1 ? D_ : c_;
        Integer sN = isqrt(Integer(N));
        Integer p1 = 1, p2 = 0, q1 = 0, q2 = 1;
        for (int it = 0; it < 100000; ++it) {
            Integer a = floor_div(P + sN, Q);
            Integer p = a * p1 + p2, q = a * q1 + q2;
            p2 = p1;
            p1 = p;
            q2 = q1;
            q1 = q;
            QInt u(p, -q);
            if (is_unit(u)) {
                for (const QInt& cand : {u, neg(u), conj(u), neg(conj(u))})
                    if (sign(sub(cand, QInt(1)), 1) > 0) return cand;
            }
            P = a * Q - P;
            Q = (Integer(N) - P * P) / Q;
        }
        throw Error(ErrorCode::InvalidArgument, "continued fraction did not terminate");
    }

    void init_square_classes() {
        auto U = residue_system();
        for (int i = 0; i < 4; ++i) {
            QInt s = mul(U[i], U[i]);
            sq_res_[i] = {mod(s.m, 4), mod(s.n, 4)};
        }
    }

    long D_ = 0;
    long k_ = 0;
    long c_ = 0;
    QInt eps_fund_;
    QInt eps_square_;
    Interval sqrtD_;
    std::array<Interval, 2> tau_iv_{};
    std::array<std::pair<Integer, Integer>, 4> sq_res_{};
};

// Free-function surface mirroring the field methods.
inline QuadField make_field(long D) { return QuadField::make(D); }
inline int sign_at(const QuadField& F, const QElem& a, int embedding) { return F.sign(a, embedding); }
inline bool totally_positive(const QuadField& F, const QElem& a) { return F.totally_positive(a); }
inline bool totally_nonneg(const QuadField& F, const QElem& a) { return F.totally_nonneg(a); }
inline std::optional<QInt> mod4_square_class(const QuadField& F, const QElem& a) {
    return F.mod4_square_class(F.require_integral(a));
}
inline QElem round_to_box(const Rational& x, const Rational& y, const QuadField& F) {
    return F.to_qelem(F.round_to_box(x, y));
}

}  // namespace uqlift
