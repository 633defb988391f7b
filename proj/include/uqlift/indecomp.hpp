#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "interval.hpp"
#include "relquartic.hpp"

namespace uqlift {

// ---- unit data ----

struct UnitData {
    long D = 0;
    QInt delta;
    std::vector<KElem> units;
    std::string source;
};

inline const UnitData* find_units(const std::vector<UnitData>& all, long D, const QInt& delta) {
    for (const UnitData& u : all)
        if (u.D == D && u.delta == delta) return &u;
    return nullptr;
}

namespace detail {

inline MpInterval embed_mp(const QuadField& F, const QInt& a, int i, mpfr_prec_t prec) {
    // ρ_i(τ) = (k ± √D)/2
    MpInterval sD = MpInterval::sqrt_of(F.D(), prec);
    MpInterval half = MpInterval::from_rational(Rational(1, 2), prec);
    MpInterval tau = (MpInterval::from_integer(F.tau_trace(), prec) + (i == 1 ? sD : -sD)) * half;
    return MpInterval::from_integer(a.m, prec) + MpInterval::from_integer(a.n, prec) * tau;
}

inline MpInterval embed_mp(const RelOrder& O, const KElem& x, int j, mpfr_prec_t prec) {
    int i = j <= 2 ? 1 : 2;
    const QuadField& F = O.F();
    MpInterval s = embed_mp(F, O.trace_F(x), i, prec);
    MpInterval b = embed_mp(F, x.b, i, prec) * embed_mp(F, O.Delta(), i, prec).sqrt();
    MpInterval half = MpInterval::from_rational(Rational(1, 2), prec);
    return (j % 2 == 1 ? s + b : s - b) * half;
}

// log|x^{(j)}| for j = 1..4
inline std::array<MpInterval, 4> log_embeddings(const RelOrder& O, const KElem& x, mpfr_prec_t prec) {
    std::array<MpInterval, 4> r{MpInterval(prec), MpInterval(prec), MpInterval(prec), MpInterval(prec)};
    for (int j = 1; j <= 4; ++j) {
        MpInterval v = embed_mp(O, x, j, prec).abs();
        if (!v.positive()) throw Overflow{};  // not separated from 0 at this precision
        r[j - 1] = v.log();
    }
    return r;
}

template <class T>
T det3(const std::array<std::array<T, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

using Vec3 = std::array<long, 3>;

}  // namespace detail

// Units with their log-embedding matrix, after exact and numeric checks.
struct VerifiedUnits {
    std::array<KElem, 3> g;
    std::array<std::array<double, 4>, 3> logs{};
};

// |N_{K/Q}(g)| = 1 exactly; log-embedding rank 3 certified by intervals with
// precision doubling.
inline VerifiedUnits verify_units(const RelOrder& O, const UnitData& U) {
    if (U.units.size() != 3)
        throw Error(ErrorCode::RankDeficient, "expected 3 units, got " + std::to_string(U.units.size()));
    VerifiedUnits V;
    for (int i = 0; i < 3; ++i) {
        if (!O.is_unit(U.units[i])) throw Error(ErrorCode::NotAUnit, "not a unit: " + U.units[i].str());
        V.g[i] = U.units[i];
    }
    for (mpfr_prec_t prec = 64; prec <= 4096; prec *= 2) {
        std::array<std::array<MpInterval, 4>, 3> L;
        try {
            for (int i = 0; i < 3; ++i) L[i] = detail::log_embeddings(O, V.g[i], prec);
        } catch (const Overflow&) {
            continue;
        }
        std::array<std::array<MpInterval, 3>, 3> M;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M[i][j] = L[i][j];
        if (detail::det3(M).certain_sign() != 0) {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 4; ++j) V.logs[i][j] = L[i][j].mid_d();
            return V;
        }
    }
    throw Error(ErrorCode::RankDeficient, "log-embedding rank of the units is not 3");
}

// ±g^v with the sign making it totally positive; nullopt if neither sign is.
inline KElem unit_power(const RelOrder& O, const std::array<KElem, 3>& g, const detail::Vec3& v) {
    KElem r(QInt(1), QInt(0));
    for (int i = 0; i < 3; ++i) {
        if (v[i] == 0) continue;
        KElem base = v[i] > 0 ? g[i] : O.unit_inverse(g[i]);
        r = O.mul(r, O.pow(base, static_cast<unsigned long>(std::labs(v[i]))));
    }
    return r;
}

inline std::optional<KElem> tp_unit_power(const RelOrder& O, const std::array<KElem, 3>& g, const detail::Vec3& v) {
    KElem r = unit_power(O, g, v);
    if (O.totally_positive(r)) return r;
    KElem n = O.neg(r);
    if (O.totally_positive(n)) return n;
    return std::nullopt;
}

// totally positive generator of O_F^{×,+}
inline QInt eps_plus(const QuadField& F) {
    return F.totally_positive(F.eps_fund()) ? F.eps_fund() : F.eps_square();
}

// Exponent vector v with ε⁺ = ±g^v: least squares on logs, then a
// neighbourhood search verified by exact multiplication.
inline detail::Vec3 eps_plus_exponents(const RelOrder& O, const VerifiedUnits& V, long radius = 2) {
    KElem e(eps_plus(O.F()), QInt(0));
    std::array<double, 4> le{};
    for (int j = 1; j <= 4; ++j) le[j - 1] = std::log(std::fabs(O.embed(e, j)));
    // normal equations (A Aᵀ) v = A le with A = logs (3×4)
    std::array<std::array<double, 3>, 3> G{};
    std::array<double, 3> r{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 4; ++j) G[i][k] += V.logs[i][j] * V.logs[k][j];
        for (int j = 0; j < 4; ++j) r[i] += V.logs[i][j] * le[j];
    }
    double d = detail::det3(G);
    detail::Vec3 v0{};
    for (int c = 0; c < 3; ++c) {
        auto Gc = G;
        for (int i = 0; i < 3; ++i) Gc[i][c] = r[i];
        v0[c] = std::lround(detail::det3(Gc) / d);
    }
    std::vector<detail::Vec3> cand;
    for (long a = -radius; a <= radius; ++a)
        for (long b = -radius; b <= radius; ++b)
            for (long c = -radius; c <= radius; ++c) cand.push_back({v0[0] + a, v0[1] + b, v0[2] + c});
    std::stable_sort(cand.begin(), cand.end(), [&](const detail::Vec3& x, const detail::Vec3& y) {
        long dx = std::labs(x[0] - v0[0]) + std::labs(x[1] - v0[1]) + std::labs(x[2] - v0[2]);
        long dy = std::labs(y[0] - v0[0]) + std::labs(y[1] - v0[1]) + std::labs(y[2] - v0[2]);
        return dx < dy;
    });
    for (const auto& v : cand) {
        KElem p = unit_power(O, V.g, v);
        if (p == e || O.neg(p) == e) return v;
    }
    throw Error(ErrorCode::ExponentRecoveryFailed,
                "eps_F+ is not ±g^v within radius " + std::to_string(radius) + " of the least-squares estimate");
}

namespace detail {

// row Hermite normal form of integer rows; returns the nonzero rows
inline std::vector<Vec3> hnf_rows(std::vector<Vec3> A) {
    std::size_t p = 0;
    for (int col = 0; col < 3 && p < A.size(); ++col) {
        for (;;) {
            // smallest nonzero |entry| in this column among rows ≥ p goes to row p
            std::size_t best = A.size();
            for (std::size_t i = p; i < A.size(); ++i)
                if (A[i][col] != 0 && (best == A.size() || std::labs(A[i][col]) < std::labs(A[best][col]))) best = i;
            if (best == A.size()) break;
            std::swap(A[p], A[best]);
            bool done = true;
            for (std::size_t i = p + 1; i < A.size(); ++i) {
                long q = A[i][col] / A[p][col];
                for (int k = 0; k < 3; ++k) A[i][k] -= q * A[p][k];
                if (A[i][col] != 0) done = false;
            }
            if (done) break;
        }
        if (p < A.size() && A[p][col] != 0) {
            if (A[p][col] < 0)
                for (int k = 0; k < 3; ++k) A[p][k] = -A[p][k];
            for (std::size_t i = 0; i < p; ++i) {
                long q = floor_div(A[i][col], A[p][col]).get_si();
                for (int k = 0; k < 3; ++k) A[i][k] -= q * A[p][k];
            }
            ++p;
        }
    }
    A.resize(p);
    return A;
}

inline long det_rows(const Vec3& a, const Vec3& b, const Vec3& c) {
    std::array<std::array<long, 3>, 3> m{{{a[0], a[1], a[2]}, {b[0], b[1], b[2]}, {c[0], c[1], c[2]}}};
    return det3(m);
}

// c with c·B = g, if integral
inline std::optional<Vec3> coords_in(const std::array<Vec3, 3>& B, const Vec3& g) {
    long d = det_rows(B[0], B[1], B[2]);
    if (d == 0) return std::nullopt;
    Vec3 c{};
    for (int k = 0; k < 3; ++k) {
        std::array<Vec3, 3> Bk = B;
        Bk[k] = g;
        long num = det_rows(Bk[0], Bk[1], Bk[2]);
        if (num % d != 0) return std::nullopt;
        c[k] = num / d;
    }
    return c;
}

}  // namespace detail

// Exponent lattice of O_F^{×,+}O_K^{×2} in the coordinates of the given units:
// generated by 2e₁, 2e₂, 2e₃ and the exponent vector of ε⁺.
inline std::array<detail::Vec3, 3> plus_square_lattice(const detail::Vec3& v) {
    auto rows = detail::hnf_rows({{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, v});
    return {rows[0], rows[1], rows[2]};
}

struct PlusSquareBasis {
    std::array<KElem, 3> u;
    std::array<detail::Vec3, 3> exponents;
    detail::Vec3 eps_plus_exponent;
    long index = 0;  // [Z³ : lattice]
};

namespace detail {

inline double trace_estimate(const VerifiedUnits& V, const Vec3& w) {
    double t = 0;
    for (int j = 0; j < 4; ++j) t += std::exp(w[0] * V.logs[0][j] + w[1] * V.logs[1][j] + w[2] * V.logs[2][j]);
    return t;
}

inline double cone_estimate(const VerifiedUnits& V, const Vec3& a, const Vec3& b, const Vec3& c) {
    double best = 0;
    for (int s = 0; s < 8; ++s) {
        Vec3 w{};
        for (int k = 0; k < 3; ++k) w[k] = (s & 1 ? a[k] : 0) + (s & 2 ? b[k] : 0) + (s & 4 ? c[k] : 0);
        best = std::max(best, trace_estimate(V, w));
    }
    return 4 * best;
}

}  // namespace detail

// A basis of O_F^{×,+}O_K^{×2}. Among small recombinations of the normal-form
// basis, the one with the least trace bound is kept.
inline PlusSquareBasis derive_plus_square_basis(const RelOrder& O, const UnitData& U) {
    VerifiedUnits V = verify_units(O, U);
    PlusSquareBasis P;
    P.eps_plus_exponent = eps_plus_exponents(O, V);
    auto H = plus_square_lattice(P.eps_plus_exponent);
    P.index = std::labs(detail::det_rows(H[0], H[1], H[2]));

    std::vector<detail::Vec3> vecs;
    for (long a = -3; a <= 3; ++a)
        for (long b = -3; b <= 3; ++b)
            for (long c = -3; c <= 3; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                detail::Vec3 w{};
                for (int k = 0; k < 3; ++k) w[k] = a * H[0][k] + b * H[1][k] + c * H[2][k];
                vecs.push_back(w);
            }
    std::sort(vecs.begin(), vecs.end());
    vecs.erase(std::unique(vecs.begin(), vecs.end()), vecs.end());
    std::stable_sort(vecs.begin(), vecs.end(), [&](const detail::Vec3& x, const detail::Vec3& y) {
        return detail::trace_estimate(V, x) < detail::trace_estimate(V, y);
    });
    if (vecs.size() > 60) vecs.resize(60);

    std::array<detail::Vec3, 3> best = H;
    double bestM = detail::cone_estimate(V, H[0], H[1], H[2]);
    for (std::size_t i = 0; i < vecs.size(); ++i)
        for (std::size_t j = i + 1; j < vecs.size(); ++j)
            for (std::size_t k = j + 1; k < vecs.size(); ++k) {
                if (std::labs(detail::det_rows(vecs[i], vecs[j], vecs[k])) != P.index) continue;
                double M = detail::cone_estimate(V, vecs[i], vecs[j], vecs[k]);
                if (M < bestM) {
                    bestM = M;
                    best = {vecs[i], vecs[j], vecs[k]};
                }
            }
    P.exponents = best;
    for (int i = 0; i < 3; ++i) {
        auto u = tp_unit_power(O, V.g, best[i]);
        if (!u) throw std::logic_error("basis unit has no totally positive sign");
        P.u[i] = *u;
    }

    // every generator of the subgroup is an exact product of the basis units
    std::vector<std::pair<detail::Vec3, KElem>> gens;
    for (int i = 0; i < 3; ++i) {
        detail::Vec3 e{};
        e[i] = 2;
        gens.emplace_back(e, O.mul(V.g[i], V.g[i]));
    }
    gens.emplace_back(P.eps_plus_exponent, KElem(eps_plus(O.F()), QInt(0)));
    for (const auto& [vec, elem] : gens) {
        auto c = detail::coords_in(best, vec);
        if (!c) throw std::logic_error("subgroup generator outside the derived lattice");
        if (unit_power(O, P.u, *c) != elem) throw std::logic_error("subgroup generator not recovered exactly");
    }
    return P;
}

// ---- cone data ----

struct ConeData {
    std::array<KElem, 3> u;
    std::array<KElem, 8> U;  // 1, u1, u2, u3, u1u2, u1u3, u2u3, u1u2u3
    Integer M;
};

inline Integer trace_bound(const RelOrder& O, const ConeData& C) {
    Integer best = 0;
    for (const KElem& v : C.U) best = std::max(best, O.trace_Q(v));
    return 4 * best;
}

inline ConeData make_cone(const RelOrder& O, const std::array<KElem, 3>& u) {
    ConeData C;
    C.u = u;
    KElem one(QInt(1), QInt(0));
    C.U = {one, u[0], u[1], u[2], O.mul(u[0], u[1]), O.mul(u[0], u[2]), O.mul(u[1], u[2]),
           O.mul(O.mul(u[0], u[1]), u[2])};
    for (const KElem& v : C.U) {
        if (!O.totally_positive(v)) throw Error(ErrorCode::NotTotallyPositive, "cone generator " + v.str());
        if (!O.is_unit(v)) throw Error(ErrorCode::NotAUnit, "cone generator " + v.str());
    }
    C.M = trace_bound(O, C);
    return C;
}

inline ConeData make_cone(const RelOrder& O, const UnitData& U) { return make_cone(O, derive_plus_square_basis(O, U).u); }

// ---- decomposability ----

// Totally positive elements grouped by trace, built on demand.
class TpCache {
public:
    explicit TpCache(const RelOrder& O) : O_(&O) {}
    const std::vector<KElem>& at(long T) {
        while (static_cast<long>(by_trace_.size()) <= T)
            by_trace_.push_back(tp_with_trace(*O_, static_cast<long>(by_trace_.size())));
        return by_trace_[T];
    }

private:
    const RelOrder* O_;
    std::vector<std::vector<KElem>> by_trace_;
};

// α = β + γ with β, γ ≻ 0; one summand has at most half the trace
inline bool is_decomposable(const RelOrder& O, const KElem& alpha, TpCache& cache) {
    if (!O.totally_positive(alpha))
        throw Error(ErrorCode::NotTotallyPositive, "element " + alpha.str() + " is not totally positive");
    long T = O.trace_Q(alpha).get_si();
    for (long t = 1; 2 * t <= T; ++t)
        for (const KElem& b : cache.at(t))
            if (O.totally_positive(O.sub(alpha, b))) return true;
    return false;
}

namespace detail {

// Integral b with l_i ≤ ρ_i(b) ≤ h_i (outward).
template <class Fn>
void for_rect(const QuadField& F, double l1, double h1, double l2, double h2, Fn&& fn) {
    if (l1 > h1 || l2 > h2) return;
    Interval sD = F.sqrtD_iv();
    // ρ1(b) − ρ2(b) = n√D
    long nlo = floor_l(((Interval(l1) - Interval(h2)) / sD).lo) - 1;
    long nhi = ceil_l(((Interval(h1) - Interval(l2)) / sD).hi) + 1;
    for (long n = nlo; n <= nhi; ++n) {
        Interval nn = Interval::of_long(n);
        Interval c1 = nn * F.tau_iv(1), c2 = nn * F.tau_iv(2);
        double lo = std::max((Interval(l1) - c1).lo, (Interval(l2) - c2).lo);
        double hi = std::min((Interval(h1) - c1).hi, (Interval(h2) - c2).hi);
        if (lo > hi) continue;
        for (long m = floor_l(lo); m <= ceil_l(hi); ++m) fn(m, n);
    }
}

}  // namespace detail

// Produces indecomposables in increasing trace. At trace T only elements with
// some conjugate ≤ 1 are candidates (otherwise α − 1 ≻ 0), and a candidate is
// decomposable iff α − ι ≻ 0 for an indecomposable ι with 2·Tr(ι) ≤ T.
class IndecomposableScanner {
public:
    explicit IndecomposableScanner(const RelOrder& O) : O_(&O) {}

    long trace() const { return T_; }
    const std::vector<KElem>& found() const { return found_; }
    const std::vector<long>& found_traces() const { return traces_; }
    std::size_t candidates_checked() const { return checked_; }

    // advances one trace and returns the indecomposables there, sorted
    std::vector<KElem> next_trace() {
        ++T_;
        std::vector<KElem> out;
        const RelOrder& O = *O_;
        const QuadField& F = O.F();
        long T = T_;
        long k = F.tau_trace(), c = F.tau_c();
        Interval two(2.0);
        for (auto [sm, sn] : detail::tp_with_trace(F, T)) {
            QInt s(sm, sn);
            std::vector<std::pair<long, long>> bs;
            auto push = [&](long bm, long bn) { bs.emplace_back(bm, bn); };
            std::array<Interval, 2> H, W;
            for (int i = 0; i < 2; ++i) {
                H[i] = F.embed_iv(sm, sn, i + 1) / O.sqrt_delta_iv(i + 1);
                W[i] = two / O.sqrt_delta_iv(i + 1);
            }
            // strip where (ρ_i(s) ± ρ_i(b)√ρ_iΔ)/2 ≤ 1, for each of the four conjugates
            for (int i = 0; i < 2; ++i) {
                double l_minus = (-H[i]).lo, h_minus = (W[i] - H[i]).hi;
                double l_plus = (H[i] - W[i]).lo, h_plus = H[i].hi;
                double ol = (-H[1 - i]).lo, oh = H[1 - i].hi;
                for (auto [lo, hi] : {std::pair{l_minus, h_minus}, std::pair{l_plus, h_plus}}) {
                    if (i == 0)
                        detail::for_rect(F, lo, hi, ol, oh, push);
                    else
                        detail::for_rect(F, ol, oh, lo, hi, push);
                }
            }
            std::sort(bs.begin(), bs.end());
            bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
            fast::Q2 s2{sm, sn};
            for (auto [bm, bn] : bs) {
                fast::Q2 b2{bm, bn};
                fast::Q2 bt = fast::mul(b2, O.t2(), k, c);
                __int128 xm = sm - bt.m, xn = sn - bt.n;
                if ((xm & 1) || (xn & 1)) continue;
                if (!tp(s2, b2)) continue;
                if (tp({s2.m - 2, s2.n}, b2)) continue;  // α − 1 ≻ 0
                ++checked_;
                if (decomposable(s2, b2, T)) continue;
                out.emplace_back(QInt(from_i128(xm / 2), from_i128(xn / 2)), QInt(bm, bn));
            }
        }
        std::sort(out.begin(), out.end());
        for (const KElem& x : out) {
            found_.push_back(x);
            traces_.push_back(T);
            QInt s = O.trace_F(x);
            sb_.push_back({fast::of(s), fast::of(x.b)});
        }
        return out;
    }

private:
    bool tp(fast::Q2 s, fast::Q2 b) const {
        try {
            return O_->tp_fast(s, b);
        } catch (const Overflow&) {
            return O_->tp_sb(QInt(from_i128(s.m), from_i128(s.n)), QInt(from_i128(b.m), from_i128(b.n)));
        }
    }
    bool decomposable(fast::Q2 s, fast::Q2 b, long T) const {
        for (std::size_t i = 0; i < sb_.size() && 2 * traces_[i] <= T; ++i) {
            const auto& [si, bi] = sb_[i];
            if (tp({s.m - si.m, s.n - si.n}, {b.m - bi.m, b.n - bi.n})) return true;
        }
        return false;
    }

    const RelOrder* O_;
    long T_ = 0;
    std::vector<KElem> found_;
    std::vector<long> traces_;
    std::vector<std::pair<fast::Q2, fast::Q2>> sb_;
    std::size_t checked_ = 0;
};

// All indecomposables with Tr_{K/Q} ≤ bound, sorted by (trace, coordinates).
inline std::vector<KElem> indecomposables_up_to(const RelOrder& O, long bound) {
    if (!O.small()) throw Error(ErrorCode::InvalidArgument, "order coordinates exceed 64 bits");
    IndecomposableScanner S(O);
    while (S.trace() < bound) S.next_trace();
    return S.found();
}

inline std::vector<KElem> indecomposables_under_bound(const RelOrder& O, const ConeData& C) {
    if (!fits_i64(C.M)) throw Error(ErrorCode::InvalidArgument, "trace bound too large: " + C.M.get_str());
    return indecomposables_up_to(O, C.M.get_si());
}

// x/y is a unit
inline bool unit_associate(const RelOrder& O, const KElem& x, const KElem& y) {
    if (abs(O.norm_Q(x)) != abs(O.norm_Q(y))) return false;
    const QuadField& F = O.F();
    KElem p = O.mul(x, O.conj(y));
    QInt N = O.norm_F(y);
    return F.divexact(p.a, N).has_value() && F.divexact(p.b, N).has_value();
}

// number of classes modulo units
inline std::size_t count_up_to_units(const RelOrder& O, const std::vector<KElem>& xs) {
    std::vector<KElem> reps;
    std::map<Integer, std::vector<std::size_t>> by_norm;
    for (const KElem& x : xs) {
        Integer N = O.norm_Q(x);
        auto& bucket = by_norm[N];
        bool seen = false;
        for (std::size_t r : bucket)
            if (unit_associate(O, x, reps[r])) {
                seen = true;
                break;
            }
        if (!seen) {
            bucket.push_back(reps.size());
            reps.push_back(x);
        }
    }
    return reps.size();
}

}  // namespace uqlift
