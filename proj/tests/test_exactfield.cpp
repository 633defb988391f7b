#include <gtest/gtest.h>

#include "oracles.hpp"
#include "uqlift/exactfield.hpp"

using namespace uqlift;

namespace {

const long kFields[] = {5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 56, 177};

TEST(MakeField, GoldenRatioCase) {
    QuadField F = make_field(5);
    EXPECT_TRUE(F.tau_half());
    EXPECT_EQ(F.to_qelem(QInt(0, 1)), QElem(Rational(1, 2), Rational(1, 2)));
    // (3+√5)/2 = 1 + τ
    EXPECT_EQ(F.to_qelem(F.eps_square()), QElem(Rational(3, 2), Rational(1, 2)));
}

TEST(MakeField, SqrtTwo) {
    QuadField F = make_field(8);
    EXPECT_FALSE(F.tau_half());
    EXPECT_EQ(F.eps_fund(), QInt(1, 1));
}

TEST(MakeField, Rejections) {
    try {
        make_field(9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotFundamental);
    }
    try {
        make_field(1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
    }
    EXPECT_THROW(make_field(20), Error);
    EXPECT_THROW(make_field(7), Error);
}

TEST(MakeField, UnitMatchesBruteForce) {
    for (long D = 5; D <= 200; ++D) {
        if (!is_fundamental_discriminant(D)) continue;
        QuadField F = make_field(D);
        auto [x, y] = oracle::smallest_unit(D);
        QElem expect(make_q(x, 2), make_q(y, 2));
        EXPECT_EQ(F.to_qelem(F.eps_fund()), expect) << "D=" << D;
        Integer N = F.norm(F.eps_fund());
        EXPECT_TRUE(N == 1 || N == -1);
        EXPECT_EQ(F.norm(F.eps_square()), 1);
    }
}

TEST(MakeField, NoUnitBetweenOneAndFundamental) {
    for (long D : {5, 8, 12, 13, 21, 29, 33}) {
        QuadField F = make_field(D);
        double e = F.embed(F.eps_fund(), 1);
        long B = static_cast<long>(e) + 2;
        for (long m = -B; m <= B; ++m)
            for (long n = -B; n <= B; ++n) {
                QInt u(m, n);
                if (!F.is_unit(u)) continue;
                bool above_one = F.sign(F.sub(u, QInt(1)), 1) > 0;
                bool below_eps = F.sign(F.sub(F.eps_fund(), u), 1) > 0;
                EXPECT_FALSE(above_one && below_eps) << D << " " << u.str();
            }
    }
}

TEST(SquareClasses, DistinctAndInverse) {
    for (long D : kFields) {
        QuadField F = make_field(D);
        for (const QInt& u : QuadField::residue_system()) {
            auto t = F.mod4_square_class(F.mul(u, u));
            ASSERT_TRUE(t.has_value());
            EXPECT_EQ(*t, u) << "D=" << D;
        }
    }
}

TEST(SignAt, Examples) {
    QuadField F8 = make_field(8);
    EXPECT_EQ(sign_at(F8, QElem(3, -1), 1), 1);  // 3 − 2√2
    EXPECT_EQ(sign_at(F8, QElem(0, 0), 1), 0);
    QuadField F5 = make_field(5);
    EXPECT_EQ(sign_at(F5, QElem(-11, 5), 1), 1);
    EXPECT_EQ(sign_at(F5, QElem(-11, 5), 2), -1);
}

TEST(SignAt, AgreesWithHighPrecisionOracle) {
    for (long D : kFields) {
        QuadField F = make_field(D);
        for (int it = 0; it < 1000; ++it) {
            long sc = it < 500 ? 50 : 5000000;
            QInt a(oracle::rand_in(-sc, sc), oracle::rand_in(-sc, sc));
            if (it % 7 == 0) {
                // near-zero elements from convergent-like pairs
                a = F.sub(F.pow(F.eps_fund(), it % 5 + 1), QInt(oracle::rand_in(-3, 3)));
            }
            for (int i = 1; i <= 2; ++i) {
                MpInterval v = oracle::embed(D, a, i);
                int s = v.certain_sign();
                if (s != 0) {
                    EXPECT_EQ(F.sign(a, i), s) << D << " " << a.str();
                }
                EXPECT_EQ(F.sign(F.to_qelem(a), i), F.sign(a, i));
            }
        }
    }
}

TEST(SignAt, RationalPairsAgainstOracle) {
    for (long D : {5, 8, 13}) {
        QuadField F = make_field(D);
        for (int it = 0; it < 3000; ++it) {
            Rational x(oracle::rand_in(-1000, 1000), oracle::rand_in(1, 30));
            Rational y(oracle::rand_in(-1000, 1000), oracle::rand_in(1, 30));
            x.canonicalize();
            y.canonicalize();
            MpInterval v = MpInterval::from_rational(x, oracle::kPrec) +
                           MpInterval::from_rational(y, oracle::kPrec) * oracle::sqrt_int(D);
            int s = v.certain_sign();
            if (s != 0) {
                EXPECT_EQ(sign_at(F, QElem(x, y), 1), s);
            }
        }
    }
}

TEST(TotallyPositive, Examples) {
    QuadField F5 = make_field(5);
    EXPECT_TRUE(totally_positive(F5, QElem(Rational(3, 2), Rational(1, 2))));
    EXPECT_FALSE(totally_positive(F5, QElem(Rational(1, 2), Rational(1, 2))));
    QuadField F8 = make_field(8);
    EXPECT_TRUE(totally_positive(F8, QElem(2, 0)));
    EXPECT_TRUE(totally_nonneg(F8, QElem(0, 0)));
    EXPECT_FALSE(totally_positive(F8, QElem(0, 0)));
}

TEST(Mod4SquareClass, Examples) {
    QuadField F5 = make_field(5);
    EXPECT_EQ(*mod4_square_class(F5, QElem(5, 0)), QInt(1));
    EXPECT_FALSE(mod4_square_class(F5, QElem(2, 0)).has_value());
    QuadField F8 = make_field(8);
    EXPECT_EQ(*mod4_square_class(F8, QElem(5, 0)), QInt(1));
    EXPECT_THROW(mod4_square_class(F5, QElem(Rational(1, 3), 0)), Error);
}

TEST(Conversion, RoundTrip) {
    for (long D : kFields) {
        QuadField F = make_field(D);
        for (int it = 0; it < 200; ++it) {
            QInt a(oracle::rand_in(-1000, 1000), oracle::rand_in(-1000, 1000));
            EXPECT_EQ(*F.to_qint(F.to_qelem(a)), a);
        }
        EXPECT_FALSE(F.to_qint(QElem(Rational(1, 3), 0)).has_value());
    }
}

TEST(FieldSqrt, DetectsSquaresExactly) {
    for (long D : kFields) {
        QuadField F = make_field(D);
        for (int it = 0; it < 300; ++it) {
            QInt s(oracle::rand_in(-200, 200), oracle::rand_in(-200, 200));
            QInt a = F.mul(s, s);
            auto r = F.sqrt(a);
            ASSERT_TRUE(r.has_value()) << D << " " << s.str();
            EXPECT_EQ(F.mul(*r, *r), a);
            QInt b = F.add(a, QInt(oracle::rand_in(1, 3)));
            if (auto r2 = F.sqrt(b)) {
                EXPECT_EQ(F.mul(*r2, *r2), b);
            }
        }
        long p = 3;
        while (D % p == 0) p += 2;
        EXPECT_FALSE(F.sqrt(QInt(p)).has_value()) << D << " " << p;
    }
    QuadField F5 = make_field(5);
    EXPECT_TRUE(F5.sqrt(QInt(5)).has_value());  // 5 = (2τ − 1)²
}

// oracle for the rounding box: every integral point in a generous window
bool in_box(const QuadField& F, const QInt& a, const Rational& x, const Rational& y) {
    QElem l = F.l_F();
    QElem r1 = F.to_qelem(a);
    // ρ2 via the conjugate
    QElem r2 = F.to_qelem(F.conj(a));
    return F.sign(r1 - QElem(x, 0), 1) >= 0 && F.sign(QElem(x, 0) + l - r1, 1) > 0 &&
           F.sign(r2 - QElem(y, 0), 1) >= 0 && F.sign(QElem(y, 0) + l - r2, 1) > 0;
}

TEST(RoundToBox, Examples) {
    QuadField F5 = make_field(5);
    QElem z = round_to_box(0, 0, F5);
    EXPECT_TRUE(in_box(F5, F5.require_integral(z), 0, 0));
    for (auto [D, x, y] : std::vector<std::tuple<long, long, long>>{{5, 10, 10}, {8, 0, 5}}) {
        QuadField F = make_field(D);
        QInt a = F.round_to_box(x, y);
        EXPECT_TRUE(in_box(F, a, x, y));
        // the box scan finds at least this point
        bool found = false;
        for (long m = -40; m <= 40; ++m)
            for (long n = -40; n <= 40; ++n)
                if (in_box(F, QInt(m, n), x, y) && QInt(m, n) == a) found = true;
        EXPECT_TRUE(found);
    }
}

TEST(RoundToBox, RandomBoxes) {
    for (long D : kFields) {
        QuadField F = make_field(D);
        for (int it = 0; it < 10000 / 12 + 1; ++it) {
            Rational x(oracle::rand_in(-100000, 100000), oracle::rand_in(1, 97));
            Rational y(oracle::rand_in(-100000, 100000), oracle::rand_in(1, 97));
            x.canonicalize();
            y.canonicalize();
            QInt a = F.round_to_box(x, y);
            ASSERT_TRUE(in_box(F, a, x, y)) << D << " " << x << " " << y;
        }
    }
}

TEST(FundamentalDomain, Examples) {
    QuadField F5 = make_field(5);
    EXPECT_TRUE(F5.in_fundamental_domain(QInt(1)));
    EXPECT_FALSE(F5.in_fundamental_domain(F5.eps_square()));
    EXPECT_THROW(F5.in_fundamental_domain(QInt(0, 1)), Error);
    EXPECT_EQ(F5.gamma(), QElem(Rational(3, 2), Rational(1, 2)));
    for (long D : kFields) EXPECT_TRUE(make_field(D).in_fundamental_domain(QInt(1)));
}

TEST(FundamentalDomain, ExactlyOneOrbitMember) {
    for (long D : {5, 8, 12, 13, 17, 29}) {
        QuadField F = make_field(D);
        QInt e = F.eps_square();
        QInt einv = F.conj(e);  // norm 1
        for (int it = 0; it < 200; ++it) {
            QInt a(oracle::rand_in(-500, 500), oracle::rand_in(-500, 500));
            if (!F.totally_positive(a)) continue;
            int hits = 0;
            for (int k = -20; k <= 20; ++k) {
                QInt u = k >= 0 ? F.pow(e, k) : F.pow(einv, -k);
                if (F.in_fundamental_domain(F.mul(a, u))) ++hits;
            }
            EXPECT_EQ(hits, 1) << D << " " << a.str();
        }
    }
}

TEST(FloorReal, MatchesOracle) {
    QuadField F = make_field(13);
    for (int it = 0; it < 2000; ++it) {
        Rational x(oracle::rand_in(-10000, 10000), oracle::rand_in(1, 50));
        Rational y(oracle::rand_in(-10000, 10000), oracle::rand_in(1, 50));
        x.canonicalize();
        y.canonicalize();
        Integer f = F.floor_real(QElem(x, y));
        MpInterval v = MpInterval::from_rational(x, 200) + MpInterval::from_rational(y, 200) * oracle::sqrt_int(13);
        EXPECT_LE(f.get_d(), v.hi_d());
        EXPECT_GT(f.get_d() + 1, v.lo_d());
    }
}

}  // namespace
