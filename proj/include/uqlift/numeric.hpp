#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace uqlift {

using Integer = mpz_class;
using Rational = mpq_class;

// canonical a/b; mpq_class(a, b) alone does not reduce
inline Rational make_q(const Integer& a, const Integer& b) {
    Rational q(a, b);
    q.canonicalize();
    return q;
}

inline int sgn(const Integer& a) { return ::sgn(a); }
inline int sgn(const Rational& a) { return ::sgn(a); }

inline Integer isqrt(const Integer& a) {
    Integer r;
    mpz_sqrt(r.get_mpz_t(), a.get_mpz_t());
    return r;
}

inline bool is_perfect_square(const Integer& a) {
    return a >= 0 && mpz_perfect_square_p(a.get_mpz_t()) != 0;
}

inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Integer ceil_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Integer mod(const Integer& a, const Integer& b) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Integer floor_q(const Rational& q) { return floor_div(q.get_num(), q.get_den()); }
inline Integer ceil_q(const Rational& q) { return ceil_div(q.get_num(), q.get_den()); }

inline Integer gcd(const Integer& a, const Integer& b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline bool fits_i64(const Integer& a) { return mpz_fits_slong_p(a.get_mpz_t()) != 0; }

inline std::int64_t to_i64(const Integer& a) { return mpz_get_si(a.get_mpz_t()); }

inline Integer from_i128(__int128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1 : (unsigned __int128)v;
    Integer hi = Integer(static_cast<unsigned long>(u >> 64));
    Integer lo = Integer(static_cast<unsigned long>(u & 0xFFFFFFFFFFFFFFFFull));
    Integer r = (hi << 64) + lo;
    return neg ? Integer(-r) : r;
}

inline double to_double(const Integer& a) { return a.get_d(); }

inline bool is_squarefree(long long n) {
    if (n < 0) n = -n;
    if (n == 0) return false;
    for (long long p = 2; p * p <= n; ++p) {
        if (n % (p * p) == 0) return false;
        if (n % p == 0) n /= p;
    }
    return true;
}

// D ≡ 1 mod 4 squarefree, or 4d with d ≡ 2,3 mod 4 squarefree.
inline bool is_fundamental_discriminant(long long D) {
    if (D <= 1) return false;
    if (D % 4 == 1) return is_squarefree(D);
    if (D % 4 == 0) {
        long long d = D / 4;
        return (d % 4 == 2 || d % 4 == 3) && is_squarefree(d);
    }
    return false;
}

// Checked 128-bit arithmetic for fast paths; callers catch Overflow and
// redo the computation with GMP.
struct Overflow {};

inline __int128 ck_add(__int128 a, __int128 b) {
    __int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw Overflow{};
    return r;
}
inline __int128 ck_sub(__int128 a, __int128 b) {
    __int128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw Overflow{};
    return r;
}
inline __int128 ck_mul(__int128 a, __int128 b) {
    __int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
    return r;
}

}  // namespace uqlift
