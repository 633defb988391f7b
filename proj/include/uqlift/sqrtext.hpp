#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "errors.hpp"
#include "exactfield.hpp"
#include "numeric.hpp"
#include "radical.hpp"
#include "relquartic.hpp"
#include "reptest.hpp"

namespace uqlift {

// K = F(√e) with gcd(D_F, D_Q(√e)) = 1, so O_K = O_F + O_F·ω_e.
struct SqrtEContext {
    QuadField F;
    long e = 0;
    long delta_e = 0;  // discriminant of Q(√e)
    RelOrder order;    // O_F[w] for Δ = delta_e
    KElem omega;       // ω_e written in the basis 1, w
};

inline long quadratic_discriminant(long e) { return e % 4 == 1 ? e : 4 * e; }

inline SqrtEContext compositum_check(const QuadField& F, long e) {
    if (e <= 1) throw Error(ErrorCode::InvalidArgument, "e must be a square-free integer > 1, got " + std::to_string(e));
    if (!is_squarefree(e)) throw Error(ErrorCode::NotSquarefree, std::to_string(e) + " is not square-free");
    long de = quadratic_discriminant(e);
    Integer g = gcd(Integer(F.D()), Integer(de));
    if (g != 1)
        throw Error(ErrorCode::NotCoprime, "gcd(" + std::to_string(F.D()) + ", " + std::to_string(de) + ") = " + g.get_str());
    SqrtEContext ctx;
    ctx.F = F;
    ctx.e = e;
    ctx.delta_e = de;
    ctx.order = RelOrder::make(F, QInt(de));
    // w = (t + √Δ)/2; ω_e = (t0 + √Δ)/2 with t0 = 1 or 0, so ω_e = w − (t − t0)/2
    QInt t0(e % 4 == 1 ? 1 : 0);
    QInt diff = F.sub(ctx.order.t(), t0);
    if (mod(diff.m, 2) != 0 || mod(diff.n, 2) != 0)
        throw Error(ErrorCode::PreconditionFailed, "order O_F[w] does not contain omega_e");
    QInt shift = QuadField::div_int(diff, 2);
    ctx.omega = KElem(F.neg(shift), QInt(1));
    return ctx;
}

enum class WitnessVerdict { NotRepresentable, Representable };

inline const char* witness_verdict_name(WitnessVerdict v) {
    return v == WitnessVerdict::NotRepresentable ? "NOT_REPRESENTABLE" : "REPRESENTABLE";
}

struct SqrtEWitness {
    Integer n_e;
    KElem alpha;
    RepResult rep;
    WitnessVerdict verdict = WitnessVerdict::NotRepresentable;
};

// α = 1 + ω_5 in O_F[ω_5]; representable (it is ω_5²).
inline KElem one_plus_omega(const SqrtEContext& ctx) { return ctx.order.add(KElem(QInt(1), QInt(0)), ctx.omega); }

inline SqrtEWitness sqrt_e_witness(const SqrtEContext& ctx) {
    if (ctx.e == 5) throw Error(ErrorCode::ESpecialFive, "the construction does not apply to e = 5");
    const RelOrder& O = ctx.order;
    SqrtEWitness out;
    Integer s = isqrt(Integer(ctx.e));
    // ⌊(1+√e)/2⌋ = ⌊(1+⌊√e⌋)/2⌋ since e is not a square
    out.n_e = ctx.e % 4 == 1 ? Integer((1 + s) / 2) : Integer(1 + s);
    out.alpha = O.add(KElem(QInt(out.n_e, 0), QInt(0)), ctx.omega);
    if (!O.totally_positive(out.alpha))
        throw Error(ErrorCode::PreconditionFailed, "constructed alpha " + out.alpha.str() + " is not totally positive");
    out.rep = f_representable(O, out.alpha);
    out.verdict = out.rep.representable() ? WitnessVerdict::Representable : WitnessVerdict::NotRepresentable;
    return out;
}

// ---- extension by √5 ----

constexpr long kSqrt5Threshold = 4077;

// Exact arithmetic in Q(√D, √5); basis 1, √D, √5, √D√5.
class Sqrt5Tower {
public:
    using Elem = RadicalTower::Elem;

    explicit Sqrt5Tower(const QuadField& F) : F_(F) {
        T_.adjoin(Rational(F.D()));
        T_.adjoin(Rational(5));
    }

    Elem num(const Rational& q) const { return T_.constant(q); }
    Elem sqrtD() const { return T_.sqrt_radicand(1); }
    Elem sqrt5() const { return T_.sqrt_radicand(2); }
    Elem eps() const { return T_.scale(T_.add(num(1), sqrt5()), Rational(1, 2)); }

    // ρ_i(x) for x ∈ O_F
    Elem embed(const QInt& x, int i) const {
        QElem q = F_.to_qelem(x);
        Elem r = num(q.x);
        return T_.add(r, T_.scale(sqrtD(), i == 1 ? q.y : Rational(-q.y)));
    }

    Elem add(const Elem& a, const Elem& b) const { return T_.add(a, b); }
    Elem sub(const Elem& a, const Elem& b) const { return T_.sub(a, b); }
    Elem mul(const Elem& a, const Elem& b) const { return T_.mul(a, b); }
    Elem scale(const Elem& a, const Rational& q) const { return T_.scale(a, q); }
    int sign(const Elem& a) const { return T_.sign(a); }

    double approx(const Elem& a) const {
        double sd = std::sqrt(double(F_.D())), s5 = std::sqrt(5.0);
        return a[0].get_d() + a[1].get_d() * sd + a[2].get_d() * s5 + a[3].get_d() * sd * s5;
    }

    // smallest integer j with j·√5 > g
    Integer first_multiple_above(const Elem& g) const {
        Integer j(static_cast<long>(std::floor(approx(g) / std::sqrt(5.0))));
        auto above = [&](const Integer& k) { return sign(sub(scale(sqrt5(), Rational(k)), g)) > 0; };
        while (above(j)) j -= 1;
        while (!above(j)) j += 1;
        return j;
    }

    // smallest integer strictly greater than x
    Integer int_above(const Elem& x) const {
        Integer j(static_cast<long>(std::floor(approx(x))));
        auto above = [&](const Integer& k) { return sign(sub(num(Rational(k)), x)) > 0; };
        while (above(j)) j -= 1;
        while (!above(j)) j += 1;
        return j;
    }

private:
    QuadField F_;
    RadicalTower T_;
};

// α = a + b·ε ≻ 0 iff a ≻ 0 and (1−ε)ρ(a) < ρ(b) < ερ(a) at both embeddings.
inline bool sqrt5_tp_condition(const Sqrt5Tower& T, const QInt& a, const QInt& b) {
    for (int i = 1; i <= 2; ++i) {
        auto ra = T.embed(a, i), rb = T.embed(b, i);
        if (T.sign(ra) <= 0) return false;
        auto e = T.eps();
        if (T.sign(T.sub(rb, T.mul(T.sub(T.num(1), e), ra))) <= 0) return false;
        if (T.sign(T.sub(T.mul(e, ra), rb)) <= 0) return false;
    }
    return true;
}

// 0 ⪯ r ⪯ a and, with β = ρ(b/a), |ρ(r/a) − (β+2)/5| ≤ (2/5)√(1+β−β²) at both embeddings.
// Cleared of denominators: 4(a² + ab − b²) − (5r − b − 2a)² ⪰ 0.
inline bool r_bound_holds(const QuadField& F, const QInt& a, const QInt& b, const QInt& r) {
    if (!F.totally_nonneg(r) || !F.leq(r, a)) return false;
    QInt rad = F.sub(F.add(F.mul(a, a), F.mul(a, b)), F.mul(b, b));
    QInt dev = F.sub(F.sub(F.scale(r, 5), b), F.scale(a, 2));
    return F.totally_nonneg(F.sub(F.scale(rad, 4), F.mul(dev, dev)));
}

struct Sqrt5Witness {
    long D = 0;
    bool proved_regime = true;  // D ≥ 4077
    Integer a_index;            // a = τ + a_index
    QInt a;
    QInt b;                     // b = 2τ + b_index
    Integer b_index;
    long b_choices = 0;         // lattice points of 2τ + Z on the segment
    KElem alpha;
    RepResult rep;
    WitnessVerdict verdict = WitnessVerdict::NotRepresentable;
};

inline Sqrt5Witness sqrt5_witness(long D, bool allow_unproved = false) {
    if (!is_fundamental_discriminant(D))
        throw Error(ErrorCode::NotFundamental, std::to_string(D) + " is not a fundamental discriminant");
    if (D % 5 == 0) throw Error(ErrorCode::DivisibleBy5, std::to_string(D) + " is divisible by 5");
    if (D < kSqrt5Threshold && !allow_unproved)
        throw Error(ErrorCode::DTooSmall, std::to_string(D) + " < 4077; pass allow_unproved for an empirical run");

    QuadField F = make_field(D);
    SqrtEContext ctx = compositum_check(F, 5);
    Sqrt5Tower T(F);
    Sqrt5Witness out;
    out.D = D;
    out.proved_regime = D >= kSqrt5Threshold;

    auto eps = T.eps();
    auto eps1 = T.sub(eps, T.num(1));
    auto f = [&](const QInt& x) { return T.add(T.mul(eps, T.embed(x, 1)), T.mul(eps1, T.embed(x, 2))); };
    auto lower = T.add(T.scale(T.sqrtD(), 2), T.num(1));
    auto upper = T.add(lower, T.sqrt5());
    auto in_window = [&](const QInt& x) {
        auto fx = f(x);
        return T.sign(T.sub(fx, lower)) > 0 && T.sign(T.sub(upper, fx)) >= 0;
    };

    // f(τ + j) = f(τ) + j√5
    QInt tau(0, 1);
    out.a_index = T.first_multiple_above(T.sub(lower, f(tau)));
    out.a = F.add(tau, QInt(out.a_index, 0));
    if (!in_window(out.a) || in_window(F.add(out.a, QInt(1))) || in_window(F.sub(out.a, QInt(1))))
        throw Error(ErrorCode::PreconditionFailed, "f(a) window is not hit by exactly one a");

    // b = 2τ + i with ρ1(b) < ερ1(a) and ρ2(b) > (1−ε)ρ2(a)
    QInt two_tau(0, 2);
    auto lo = T.sub(T.mul(T.sub(T.num(1), eps), T.embed(out.a, 2)), T.embed(two_tau, 2));
    auto hi = T.sub(T.mul(eps, T.embed(out.a, 1)), T.embed(two_tau, 1));
    Integer first = T.int_above(lo);
    for (Integer i = first; T.sign(T.sub(hi, T.num(Rational(i)))) > 0; i += 1) ++out.b_choices;
    if (out.b_choices == 0) throw Error(ErrorCode::PreconditionFailed, "no lattice point of 2tau + Z on the segment");
    out.b_index = first;
    out.b = F.add(two_tau, QInt(first, 0));

    out.alpha = ctx.order.add(KElem(out.a, QInt(0)), ctx.order.scale(ctx.omega, out.b));
    bool tp_generic = ctx.order.totally_positive(out.alpha);
    bool tp_closed = sqrt5_tp_condition(T, out.a, out.b);
    if (tp_generic != tp_closed)
        throw Error(ErrorCode::PreconditionFailed, "total positivity tests disagree for " + out.alpha.str());
    if (!tp_generic)
        throw Error(ErrorCode::NotTotallyPositive, "constructed a + b*eps " + out.alpha.str() + " is not totally positive");
    out.rep = f_representable(ctx.order, out.alpha);
    out.verdict = out.rep.representable() ? WitnessVerdict::Representable : WitnessVerdict::NotRepresentable;
    return out;
}

// first `count` fundamental D ≥ from with 5 ∤ D
inline std::vector<long> sqrt5_candidates(long from, int count) {
    std::vector<long> out;
    for (long D = from; int(out.size()) < count; ++D)
        if (D % 5 != 0 && is_fundamental_discriminant(D)) out.push_back(D);
    return out;
}

}  // namespace uqlift
