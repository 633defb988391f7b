#include <gtest/gtest.h>

#include "oracles.hpp"
#include "uqlift/reptest.hpp"

using namespace uqlift;

namespace {

RelOrder order(long D, long m, long n) { return RelOrder::make(make_field(D), QInt(m, n)); }

TEST(FRepresentable, SquareOfGoldenRatio) {
    RelOrder O = order(8, 5, 0);
    RepResult r = f_representable(O, KElem(QInt(1), QInt(1)));
    ASSERT_TRUE(r.representable());
    EXPECT_EQ(*r.witness, (RepWitness{QInt(0), QInt(0), QInt(1)}));
}

TEST(FRepresentable, TwoPlusSqrtTwoOverGoldenField) {
    RelOrder O = order(5, 8, 0);  // w = √2
    EXPECT_EQ(O.t(), QInt(0));
    RepResult r = f_representable(O, KElem(QInt(2), QInt(1)));
    EXPECT_FALSE(r.representable());
}

TEST(FRepresentable, BaseElementsRepresentThemselves) {
    for (const RelOrder& O : {order(8, 5, 0), order(5, 5, 1), order(12, 5, 0)}) {
        const QuadField& F = O.F();
        for (long m = 1; m < 30; ++m)
            for (long n = -10; n <= 10; ++n) {
                QInt c(m, n);
                if (!F.totally_positive(c)) continue;
                RepResult r = f_representable(O, KElem(c, QInt(0)));
                ASSERT_TRUE(r.representable());
                EXPECT_EQ(*r.witness, (RepWitness{c, QInt(0), QInt(0)}));
            }
    }
}

TEST(FRepresentable, RejectsNonPositive) {
    RelOrder O = order(8, 5, 0);
    EXPECT_THROW(f_representable(O, KElem(QInt(0), QInt(1))), Error);
}

TEST(FRepresentable, AgreesWithBruteForce) {
    // the first three have every totally positive element representable
    std::vector<RelOrder> orders = {order(8, 5, 0), order(5, 5, 1), order(12, 5, 0), order(13, 17, 0), order(5, 41, 0)};
    for (size_t k = 0; k < orders.size(); ++k) {
        const RelOrder& O = orders[k];
        int tested = 0, yes = 0;
        while (tested < 150) {
            KElem x(QInt(oracle::rand_in(-6, 6), oracle::rand_in(-6, 6)),
                    QInt(oracle::rand_in(-6, 6), oracle::rand_in(-6, 6)));
            if (!O.totally_positive(x)) continue;
            ++tested;
            RepResult r = f_representable(O, x);
            auto b = oracle::brute_force(O, x, 40);
            ASSERT_EQ(r.representable(), b.has_value()) << O.F().D() << " " << x.str();
            if (r.representable()) {
                ++yes;
                EXPECT_TRUE(check_witness(O, x, *r.witness));
            }
        }
        EXPECT_GT(yes, 0);
        // small traces are where non-representable elements live
        int no = 0;
        for (const KElem& y : enumerate_tp_by_trace(O, 40)) {
            RepResult r2 = f_representable(O, y);
            auto b2 = oracle::brute_force(O, y, 40);
            ASSERT_EQ(r2.representable(), b2.has_value()) << O.F().D() << " " << y.str();
            if (!r2.representable()) ++no;
        }
        if (k < 3) {
            EXPECT_EQ(no, 0);
        } else {
            EXPECT_GT(no, 0);
        }
    }
}

TEST(CondDelta, Examples) {
    QuadField F5 = make_field(5);
    EXPECT_FALSE(cond_delta_holds(F5, QInt(5)));
    EXPECT_TRUE(cond_delta_holds(F5, QInt(9)));  // equality with 9 is allowed
    EXPECT_TRUE(cond_delta_holds(F5, QInt(8)));
    EXPECT_FALSE(cond_delta_holds(F5, QInt(6)));  // (1+τ)² is larger at ρ1
}

TEST(CondDelta, MatchesNumericEvaluation) {
    QuadField F = make_field(5);
    for (long m = 0; m < 40; ++m)
        for (long n = -20; n <= 20; ++n) {
            QInt d(m, n);
            if (!F.totally_positive(d)) continue;
            bool expect = true;
            auto ge = [&](const QInt& a) {
                for (int i = 1; i <= 2; ++i) {
                    MpInterval diff = oracle::embed(5, d, i) - oracle::embed(5, a, i);
                    if (diff.certain_sign() < 0) return false;
                    if (diff.certain_sign() == 0 && F.sign(F.sub(d, a), i) < 0) return false;
                }
                return true;
            };
            for (const QInt& u : QuadField::residue_system()) {
                QInt v = F.sub(QInt(2), u);
                expect = expect && ge(F.mul(u, u)) && ge(F.mul(v, v));
            }
            if (QuadField::divisible(F.sub(d, QInt(1)), 4)) expect = expect && ge(QInt(9));
            EXPECT_EQ(cond_delta_holds(F, d), expect) << d.str();
        }
    EXPECT_TRUE(cond_delta_holds(F, QInt(25)));
}

TEST(WitnessM, ConfirmedBySolver) {
    for (long D : {5, 8, 12}) {
        auto orders = oracle::sample_orders(D, 20, [](const RelOrder& O) { return cond_delta_holds(O.F(), O.Delta()); });
        ASSERT_EQ(orders.size(), 20u);
        bool saw_t1 = false, saw_other = false;
        for (const RelOrder& O : orders) {
            QInt m = witness_m(O);
            KElem x(m, QInt(1));
            EXPECT_TRUE(O.totally_positive(x));
            EXPECT_FALSE(f_representable(O, x).representable());
            (O.t() == QInt(1) ? saw_t1 : saw_other) = true;
        }
        EXPECT_TRUE(saw_t1);
        EXPECT_TRUE(saw_other);
    }
}

TEST(WitnessM, RequiresCondDelta) {
    RelOrder O = order(5, 5, 1);
    try {
        witness_m(O);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PreconditionFailed);
    }
}

TEST(AddBound, Examples) {
    QuadField F5 = make_field(5);
    EXPECT_FALSE(add_bound_holds(order(5, 5, 1)));
    RelOrder O41 = order(5, 41, 0);
    EXPECT_TRUE(add_bound_holds(O41));
    QInt m = witness_m_rounding(O41);
    EXPECT_TRUE(rounding_box_holds(O41, m));
    EXPECT_FALSE(f_representable(O41, KElem(m, QInt(1))).representable());
    EXPECT_THROW(witness_m_rounding(order(5, 5, 1)), Error);
}

TEST(AddBound, ExactAgreesWithPrefilterAndOracle) {
    for (long D : {5, 8, 12, 13}) {
        QuadField F = make_field(D);
        for (long m = 1; m < 400; m += 3)
            for (long n = -60; n <= 60; n += 3) {
                QInt d(m, n);
                if (!F.totally_positive(d)) continue;
                int exact = detail::add_bound_sign_exact(F, d);
                EXPECT_EQ(exact >= 0, add_bound_holds(F, d));
                MpInterval x = oracle::embed(D, d, 1), y = oracle::embed(D, d, 2);
                MpInterval L = MpInterval::from_integer(4, 200) + MpInterval::from_integer(2, 200) * oracle::sqrt_int(D);
                MpInterval two = MpInterval::from_integer(2, 200);
                MpInterval diff = x * y - (two * x.sqrt() + L) * (two * y.sqrt() + L);
                if (diff.certain_sign() != 0) {
                    EXPECT_EQ(exact, diff.certain_sign());
                }
            }
    }
}

TEST(AddBound, RoundingWitnessConfirmedBySolver) {
    for (long D : {5, 8, 12}) {
        auto orders = oracle::sample_orders(D, 20, [](const RelOrder& O) { return add_bound_holds(O); });
        ASSERT_EQ(orders.size(), 20u);
        for (const RelOrder& O : orders) {
            QInt m = witness_m_rounding(O);
            EXPECT_TRUE(rounding_box_holds(O, m));
            KElem x(m, QInt(1));
            EXPECT_TRUE(O.totally_positive(x));
            EXPECT_FALSE(f_representable(O, x).representable());
        }
    }
}

}  // namespace
