#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "errors.hpp"
#include "exactfield.hpp"
#include "interval.hpp"
#include "radical.hpp"
#include "relquartic.hpp"

namespace uqlift {

struct RepWitness {
    QInt p;
    QInt q;
    QInt r;
    friend bool operator==(const RepWitness& a, const RepWitness& b) { return a.p == b.p && a.q == b.q && a.r == b.r; }
};

struct RepResult {
    std::optional<RepWitness> witness;
    std::uint64_t searched_r_count = 0;

    bool representable() const { return witness.has_value(); }
};

// p, r, 4pr − q² ⪰ 0 and p + q·w + r·w² = α
inline bool check_witness(const RelOrder& O, const KElem& alpha, const RepWitness& W) {
    const QuadField& F = O.F();
    if (!F.totally_nonneg(W.p) || !F.totally_nonneg(W.r)) return false;
    QInt disc = F.sub(F.scale(F.mul(W.p, W.r), 4), F.mul(W.q, W.q));
    if (!F.totally_nonneg(disc)) return false;
    KElem w(QInt(0), QInt(1));
    KElem lhs = O.add(O.add(KElem(W.p, QInt(0)), KElem(QInt(0), W.q)), O.scale(O.mul(w, w), W.r));
    return lhs == alpha;
}

namespace detail {

// Exact test of a single r for α = u + v·w.
inline bool try_r(const RelOrder& O, const QInt& u, const QInt& v, const QInt& r, RepWitness& out) {
    const QuadField& F = O.F();
    if (O.small() && fast::fits(u) && fast::fits(v) && fast::fits(r)) {
        try {
            long k = F.tau_trace(), c = F.tau_c(), D = F.D();
            fast::Q2 r2 = fast::of(r);
            if (!fast::tnn(r2, k, D)) return false;
            fast::Q2 p2 = fast::add(fast::of(u), fast::mul(O.n2(), r2, k, c));
            if (!fast::tnn(p2, k, D)) return false;
            fast::Q2 q2 = fast::sub(fast::of(v), fast::mul(O.t2(), r2, k, c));
            fast::Q2 pr = fast::mul(p2, r2, k, c);
            fast::Q2 d = fast::sub({ck_mul(pr.m, 4), ck_mul(pr.n, 4)}, fast::mul(q2, q2, k, c));
            if (!fast::tnn(d, k, D)) return false;
            out = {QInt(from_i128(p2.m), from_i128(p2.n)), QInt(from_i128(q2.m), from_i128(q2.n)), r};
            return true;
        } catch (const Overflow&) {
        }
    }
    if (!F.totally_nonneg(r)) return false;
    QInt p = F.add(u, F.mul(O.n(), r));
    if (!F.totally_nonneg(p)) return false;
    QInt q = F.sub(v, F.mul(O.t(), r));
    QInt d = F.sub(F.scale(F.mul(p, r), 4), F.mul(q, q));
    if (!F.totally_nonneg(d)) return false;
    out = {p, q, r};
    return true;
}

}  // namespace detail

// Decides F-representability of a totally positive α = u + v·w. The search
// covers every integral r with ρ_i(r) inside the roots of
// ρ_i(Δ)x² − 2ρ_i(2u+vt)x + ρ_i(v)² ≤ 0, scanned in lexicographic (m, n) order.
inline RepResult f_representable(const RelOrder& O, const KElem& alpha) {
    if (!O.totally_positive(alpha))
        throw Error(ErrorCode::NotTotallyPositive, "element " + alpha.str() + " is not totally positive");
    const QuadField& F = O.F();
    const QInt& u = alpha.a;
    const QInt& v = alpha.b;
    QInt S = O.trace_F(alpha);  // 2u + vt
    std::array<Interval, 2> lo{}, hi{};
    for (int i = 1; i <= 2; ++i) {
        Interval s = F.embed_iv(S, i);
        Interval d = F.embed_iv(O.Delta(), i);
        Interval vv = F.embed_iv(v, i);
        Interval disc = s * s - d * vv * vv;
        Interval root = disc.sqrt();
        lo[i - 1] = (s - root) / d;
        hi[i - 1] = (s + root) / d;
        lo[i - 1].lo = std::max(lo[i - 1].lo, 0.0);
    }
    RepResult res;
    // m = c1·ρ1 + c2·ρ2 with c1 = 1 − τ1/√D ≥ 0, c2 = τ1/√D ≥ 0
    Interval c2 = F.tau_iv(1) / F.sqrtD_iv();
    Interval c1 = Interval(1.0) - c2;
    double mlo = (c1 * Interval(lo[0].lo) + c2 * Interval(lo[1].lo)).lo;
    double mhi = (c1 * Interval(hi[0].hi) + c2 * Interval(hi[1].hi)).hi;
    if (!(mlo <= mhi)) return res;
    RepWitness W;
    for (long m = detail::floor_l(mlo) - 1; m <= detail::ceil_l(mhi) + 1; ++m) {
        Interval mm = Interval::of_long(m);
        // ρ1 = m + nτ1 with τ1 > 0; ρ2 = m + nτ2 with τ2 < 0
        double n1lo = ((Interval(lo[0].lo) - mm) / F.tau_iv(1)).lo;
        double n1hi = ((Interval(hi[0].hi) - mm) / F.tau_iv(1)).hi;
        double n2lo = ((Interval(hi[1].hi) - mm) / F.tau_iv(2)).lo;
        double n2hi = ((Interval(lo[1].lo) - mm) / F.tau_iv(2)).hi;
        double nlo = std::max(n1lo, n2lo), nhi = std::min(n1hi, n2hi);
        if (nlo > nhi) continue;
        for (long n = detail::floor_l(nlo); n <= detail::ceil_l(nhi); ++n) {
            ++res.searched_r_count;
            if (detail::try_r(O, u, v, QInt(m, n), W)) {
                res.witness = W;
                return res;
            }
        }
    }
    return res;
}

// Δ ⪰ u² and Δ ⪰ (2−u)² for u ∈ U_F, and Δ ⪰ 9 when Δ ≡ 1 mod 4
inline bool cond_delta_holds(const QuadField& F, const QInt& Delta) {
    for (const QInt& u : QuadField::residue_system()) {
        if (!F.leq(F.mul(u, u), Delta)) return false;
        QInt v = F.sub(QInt(2), u);
        if (!F.leq(F.mul(v, v), Delta)) return false;
    }
    if (QuadField::divisible(F.sub(Delta, QInt(1)), 4) && !F.leq(QInt(9), Delta)) return false;
    return true;
}
inline bool cond_delta_holds(const QuadField& F, const QElem& Delta) {
    return cond_delta_holds(F, F.require_integral(Delta));
}

// m₁ = (Δ−t²)/4 when t ≠ 1, else m₂ = (Δ−1)/4 − 1. The element m + w is
// checked to be totally positive and non-representable before returning.
inline QInt witness_m(const RelOrder& O) {
    const QuadField& F = O.F();
    if (!cond_delta_holds(F, O.Delta()))
        throw Error(ErrorCode::PreconditionFailed, "condDelta does not hold for " + O.Delta().str());
    QInt m = F.neg(O.n());
    if (O.t() == QInt(1)) m = F.sub(m, QInt(1));
    KElem x(m, QInt(1));
    if (!O.totally_positive(x)) throw std::logic_error("witness m + w is not totally positive: " + x.str());
    if (f_representable(O, x).representable()) throw std::logic_error("witness m + w is representable: " + x.str());
    return m;
}

namespace detail {

// sign of N(Δ) − (2√ρ1(Δ) + L)(2√ρ2(Δ) + L) with L = 4·l_F = 2√D + 4
inline int add_bound_sign_exact(const QuadField& F, const QInt& Delta) {
    RadicalTower tw;
    tw.adjoin(Rational(F.D()));
    QElem x = F.to_qelem(Delta), y = F.to_qelem(F.conj(Delta));
    tw.adjoin(RadicalTower::Elem{x.x, x.y});
    tw.adjoin(RadicalTower::Elem{y.x, y.y, 0, 0});
    RadicalTower::Elem L = tw.add(tw.constant(4), tw.scale(tw.sqrt_radicand(1), 2));
    RadicalTower::Elem a = tw.add(tw.scale(tw.sqrt_radicand(2), 2), L);
    RadicalTower::Elem b = tw.add(tw.scale(tw.sqrt_radicand(3), 2), L);
    RadicalTower::Elem diff = tw.sub(tw.constant(Rational(F.norm(Delta))), tw.mul(a, b));
    return tw.sign(diff);
}

inline int add_bound_sign(const QuadField& F, const QInt& Delta) {
    Interval x = F.embed_iv(Delta, 1), y = F.embed_iv(Delta, 2);
    Interval L = Interval(4.0) + Interval(2.0) * F.sqrtD_iv();
    Interval rhs = (Interval(2.0) * x.sqrt() + L) * (Interval(2.0) * y.sqrt() + L);
    int s = (x * y - rhs).certain_sign();
    if (s != 0) return s;
    return add_bound_sign_exact(F, Delta);
}

}  // namespace detail

inline bool add_bound_holds(const QuadField& F, const QInt& Delta) { return detail::add_bound_sign(F, Delta) >= 0; }
inline bool add_bound_holds(const RelOrder& O) { return add_bound_holds(O.F(), O.Delta()); }

// x_i ≤ ρ_i(m) < x_i + l_F with x_i = (√ρ_i(Δ) − ρ_i(t))/2, checked exactly
inline bool rounding_box_holds(const RelOrder& O, const QInt& m) {
    const QuadField& F = O.F();
    QInt s = F.add(F.scale(m, 2), O.t());
    QInt sqrtD = F.sub(QInt(0, 2), QInt(F.tau_trace()));  // 2τ − k = √D under ρ1
    auto below_root = [&](const QInt& e, int i) {   // ρ_i(e) < √ρ_i(Δ)
        if (F.sign(e, i) < 0) return true;
        return F.sign(F.sub(O.Delta(), F.mul(e, e)), i) > 0;
    };
    for (int i = 1; i <= 2; ++i) {
        // 2ρ_i(m) + ρ_i(t) ≥ √ρ_i(Δ)
        if (F.sign(s, i) < 0) return false;
        if (F.sign(F.sub(F.mul(s, s), O.Delta()), i) < 0) return false;
        // 2ρ_i(m) + ρ_i(t) < √ρ_i(Δ) + √D + 2, where √D is the positive real in both embeddings
        QInt shift = i == 1 ? F.add(sqrtD, QInt(2)) : F.sub(QInt(2), sqrtD);
        if (!below_root(F.sub(s, shift), i)) return false;
    }
    return true;
}

// Rounding-based witness: m by rounding, aimed at the box above;
// the rational targets are upper approximations refined until the exact box
// check passes.
inline QInt witness_m_rounding(const RelOrder& O) {
    const QuadField& F = O.F();
    if (!add_bound_holds(O))
        throw Error(ErrorCode::PreconditionFailed, "add-bound does not hold for " + O.Delta().str());
    long D = F.D();
    for (mpfr_prec_t prec = 64; prec <= 4096; prec *= 2) {
        std::array<Rational, 2> target;
        for (int i = 1; i <= 2; ++i) {
            QElem d = F.to_qelem(i == 1 ? O.Delta() : F.conj(O.Delta()));
            QElem t = F.to_qelem(i == 1 ? O.t() : F.conj(O.t()));
            MpInterval sD = MpInterval::sqrt_of(Integer(D), prec);
            MpInterval dv = MpInterval::from_rational(d.x, prec) + MpInterval::from_rational(d.y, prec) * sD;
            MpInterval tv = MpInterval::from_rational(t.x, prec) + MpInterval::from_rational(t.y, prec) * sD;
            MpInterval x = (dv.sqrt() - tv) * MpInterval::from_rational(Rational(1, 2), prec);
            target[i - 1] = x.hi_q();
        }
        QInt m = F.round_to_box(target[0], target[1]);
        if (rounding_box_holds(O, m)) {
            KElem x(m, QInt(1));
            if (!O.totally_positive(x)) throw std::logic_error("rounding witness is not totally positive");
            if (f_representable(O, x).representable())
                throw std::logic_error("rounding witness is representable: " + x.str());
            return m;
        }
    }
    throw std::logic_error("rounding witness did not converge for " + O.Delta().str());
}

}  // namespace uqlift
