#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace uqlift {

// Tower Q ⊂ Q(√r1) ⊂ Q(√r1,√r2) ⊂ ... with each radicand r_j a nonnegative
// element of the previous level. An element of level k is a flat vector of
// 2^k rationals; bit j of an index marks a factor √r_{j+1}. Signs refer to
// the real embedding with all square roots taken positive.
class RadicalTower {
public:
    using Elem = std::vector<Rational>;

    RadicalTower() = default;

    // Appends a radicand given at the current top level; returns the new level.
    int adjoin(const Elem& radicand) {
        int k = levels();
        if (radicand.size() != size_at(k))
            throw Error(ErrorCode::InvalidArgument, "radicand has wrong level");
        if (sign(radicand) < 0) throw Error(ErrorCode::InvalidArgument, "negative radicand");
        radicands_.push_back(radicand);
        return k + 1;
    }
    int adjoin(const Rational& r) { return adjoin(lift(Elem{r}, levels())); }

    int levels() const { return static_cast<int>(radicands_.size()); }
    static std::size_t size_at(int level) { return std::size_t(1) << level; }

    Elem constant(const Rational& q) const { return lift(Elem{q}, levels()); }
    Elem zero() const { return Elem(size_at(levels())); }

    // √r_j (1-based) at the top level
    Elem sqrt_radicand(int j) const {
        Elem e = zero();
        e[std::size_t(1) << (j - 1)] = 1;
        return e;
    }

    static Elem lift(const Elem& e, int to_level) {
        Elem r(size_at(to_level));
        for (std::size_t i = 0; i < e.size(); ++i) r[i] = e[i];
        return r;
    }

    Elem add(const Elem& a, const Elem& b) const {
        Elem r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
        return r;
    }
    Elem sub(const Elem& a, const Elem& b) const {
        Elem r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
        return r;
    }
    Elem scale(const Elem& a, const Rational& q) const {
        Elem r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * q;
        return r;
    }
    Elem mul(const Elem& a, const Elem& b) const { return mul_at(a, b, level_of(a)); }

    int sign(const Elem& a) const { return sign_at(a, level_of(a)); }

private:
    static int level_of(const Elem& a) {
        int k = 0;
        while (size_at(k) < a.size()) ++k;
        return k;
    }

    static Elem half(const Elem& a, bool upper) {
        std::size_t h = a.size() / 2;
        return Elem(a.begin() + (upper ? h : 0), a.begin() + (upper ? a.size() : h));
    }
    static Elem join(const Elem& x, const Elem& y) {
        Elem r(x);
        r.insert(r.end(), y.begin(), y.end());
        return r;
    }

    Elem mul_at(const Elem& a, const Elem& b, int k) const {
        if (k == 0) return Elem{a[0] * b[0]};
        Elem x1 = half(a, false), y1 = half(a, true);
        Elem x2 = half(b, false), y2 = half(b, true);
        const Elem& r = radicands_[k - 1];
        Elem xx = mul_at(x1, x2, k - 1);
        Elem yy = mul_at(mul_at(y1, y2, k - 1), r, k - 1);
        Elem xy = mul_at(x1, y2, k - 1);
        Elem yx = mul_at(y1, x2, k - 1);
        return join(add(xx, yy), add(xy, yx));
    }

    int sign_at(const Elem& a, int k) const {
        if (k == 0) return sgn(a[0]);
        Elem x = half(a, false), y = half(a, true);
        int sx = sign_at(x, k - 1);
        int sy = sign_at(y, k - 1);
        if (sy == 0) return sx;
        const Elem& r = radicands_[k - 1];
        if (sign_at(r, k - 1) == 0) return sx;
        if (sx == 0) return sy;
        if (sx == sy) return sx;
        Elem d = sub(mul_at(x, x, k - 1), mul_at(mul_at(y, y, k - 1), r, k - 1));
        int sd = sign_at(d, k - 1);
        return sx > 0 ? sd : -sd;
    }

    std::vector<Elem> radicands_;
};

}  // namespace uqlift
