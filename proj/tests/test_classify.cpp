#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "uqlift/classify.hpp"

using namespace uqlift;

namespace {

const std::vector<UnitData>& units() {
    static const std::vector<UnitData> u = load_bundled_units();
    return u;
}

ClassifyParams params() {
    ClassifyParams p;
    p.units = &units();
    p.units_file = "bundled";
    return p;
}

std::set<QInt> deltas(const std::vector<S1Entry>& xs) {
    std::set<QInt> s;
    for (const auto& e : xs) s.insert(e.delta);
    return s;
}

TEST(StaticData, ClassNumberOneAndLabels) {
    EXPECT_EQ(class_number_one_list().size(), 46u);
    EXPECT_TRUE(has_class_number_one(177));
    EXPECT_FALSE(has_class_number_one(40));
    EXPECT_EQ(*label_match(725), "4.4.725.1");
    EXPECT_EQ(*label_match(2304), "4.4.2304.1");
    EXPECT_FALSE(label_match(7056 * 2).has_value());
}

TEST(AbsDiscriminant, Examples) {
    QuadField F5 = make_field(5);
    RelOrder O = RelOrder::make(F5, QInt(5, 1));  // (11+√5)/2
    EXPECT_EQ(abs_discriminant(O), 725);
    EXPECT_EQ(*label_match(abs_discriminant(O)), "4.4.725.1");
    QuadField F28 = make_field(28);
    EXPECT_EQ(abs_discriminant(RelOrder::make(F28, QInt(3))), 7056);
    EXPECT_EQ(abs_discriminant(RelOrder::make(F28, QInt(5))), 19600);
    EXPECT_EQ(abs_discriminant(RelOrder::make(make_field(12), QInt(8, -4))), 2304);
    EXPECT_EQ(abs_discriminant(RelOrder::make(make_field(24), QInt(2))), 2304);
}

TEST(EnumerateS1, Examples) {
    auto s5 = deltas(enumerate_S1(make_field(5)).S1);
    EXPECT_TRUE(s5.count(QInt(5, 1)));   // (11+√5)/2
    EXPECT_TRUE(s5.count(QInt(6, -1)));  // (11−√5)/2
    EXPECT_FALSE(s5.count(QInt(5)));     // 5 is a square in Q(√5)
    auto s8 = deltas(enumerate_S1(make_field(8)).S1);
    EXPECT_TRUE(s8.count(QInt(5)));
}

// both embeddings below γ·c_max, every integral point, independent filters
std::set<QInt> literal_box_S1(long D) {
    QuadField F = make_field(D);
    MpInterval sD = oracle::sqrt_int(D);
    double gamma = oracle::embed(D, F.eps_square(), 1).hi_d();
    double B = gamma * c_max(F) + 1;
    double sd = std::sqrt(double(D));
    std::set<QInt> out;
    long nmax = long(2 * B / sd) + 2;
    for (long n = -nmax; n <= nmax; ++n)
        for (long m = -long(B) - nmax * long(sd + 1) - 2; m <= long(B) + nmax * long(sd + 1) + 2; ++m) {
            // coarse double cut with a wide margin, the box is a superset anyway
            double xd = m + n * (F.tau_trace() + sd) / 2, yd = m + n * (F.tau_trace() - sd) / 2;
            if (xd > B + 1 || yd > B + 1 || xd < -1 || yd < -1) continue;
            QInt a(m, n);
            if (!F.totally_positive(a) || !F.in_fundamental_domain(a)) continue;
            MpInterval x = oracle::embed(D, a, 1), y = oracle::embed(D, a, 2);
            if (!F.mod4_square_class(a) || F.sqrt(a)) continue;
            if (cond_delta_holds(F, a)) continue;
            // add-cond via the high-precision oracle, exact tower when undecided
            MpInterval L = MpInterval::from_integer(4, oracle::kPrec) + MpInterval::from_integer(2, oracle::kPrec) * sD;
            MpInterval two = MpInterval::from_integer(2, oracle::kPrec);
            MpInterval diff = x * y - (two * x.sqrt() + L) * (two * y.sqrt() + L);
            int s = diff.certain_sign();
            if (s == 0) s = detail::add_bound_sign_exact(F, a);
            if (s >= 0) continue;
            out.insert(a);
        }
    return out;
}

TEST(EnumerateS1, MatchesLiteralBoxScan) {
    for (long D : {5, 8, 12, 13, 17, 21}) {
        auto fast = deltas(enumerate_S1(make_field(D)).S1);
        EXPECT_EQ(fast, literal_box_S1(D)) << "D=" << D;
    }
}

TEST(EnumerateS1, EveryEntryFailsBothFiltersAndIsDeduplicated) {
    for (long D : {5, 8, 12, 13, 17, 24, 28}) {
        QuadField F = make_field(D);
        auto S1 = enumerate_S1(F).S1;
        std::set<QInt> s = deltas(S1);
        for (const auto& e : S1) {
            EXPECT_FALSE(cond_delta_holds(F, e.delta));
            EXPECT_FALSE(add_bound_holds(F, e.delta));
            EXPECT_TRUE(F.in_fundamental_domain(e.delta));
            EXPECT_EQ(*F.mod4_square_class(e.delta), e.t);
            EXPECT_FALSE(s.count(F.mul(e.delta, F.eps_square())));
        }
    }
}

TEST(EnumerateS1, FilterRecordsReplay) {
    QuadField F = make_field(8);
    S1Result r = enumerate_S1(F, true);
    EXPECT_EQ(r.filter_eliminations.size(), r.counts.cond_delta + r.counts.add_bound);
    ASSERT_GT(r.counts.cond_delta, 0u);
    ASSERT_GT(r.counts.add_bound, 0u);
    for (const auto& e : r.filter_eliminations) EXPECT_TRUE(replay(F, e)) << e.delta.str();
}

TEST(RefineS2, WorkedExamples) {
    QuadField F5 = make_field(5);
    auto [S2, elim] = refine_S2(F5, enumerate_S1(F5).S1, 50);
    EXPECT_EQ(deltas(S2), (std::set<QInt>{QInt(5, 1), QInt(6, -1)}));
    QuadField F8 = make_field(8);
    EXPECT_EQ(deltas(refine_S2(F8, enumerate_S1(F8).S1, 50).first), (std::set<QInt>{QInt(5)}));
    EXPECT_THROW(refine_S2(F8, enumerate_S1(F8).S1, 0), Error);
}

TEST(RefineS2, MonotoneInMCount) {
    for (long D : {5, 8, 12}) {
        QuadField F = make_field(D);
        auto S1 = enumerate_S1(F).S1;
        std::set<QInt> prev = deltas(S1);
        for (int mc : {5, 20, 50}) {
            auto [S2, elim] = refine_S2(F, S1, mc);
            auto cur = deltas(S2);
            EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end())) << D << " " << mc;
            for (const auto& e : elim) {
                Elimination x{e.delta, "mTest", e.m, {}, 0};
                EXPECT_TRUE(replay(F, x));
            }
            prev = cur;
        }
    }
}

TEST(VerifyField, Verdicts) {
    QuadField F8 = make_field(8);
    RelOrder O8 = RelOrder::make(F8, QInt(5));
    VerifyResult v = verify_field(O8, find_units(units(), 8, QInt(5)));
    EXPECT_EQ(v.verdict, Verdict::UniversalLiftExists);
    EXPECT_EQ(v.trace_bound, 72);
    EXPECT_EQ(v.certificate.size(), v.indec_count);
    for (const auto& [a, w] : v.certificate) EXPECT_TRUE(check_witness(O8, a, w));

    RelOrder O5 = RelOrder::make(make_field(5), QInt(5, 1));
    EXPECT_EQ(verify_field(O5, find_units(units(), 5, QInt(5, 1))).verdict, Verdict::UniversalLiftExists);

    // no bundled units and nothing fails below the probe
    VerifyOptions small;
    small.probe_trace = 40;
    EXPECT_EQ(verify_field(O8, nullptr, small).verdict, Verdict::NeedsUnits);

    RelOrder O12 = RelOrder::make(make_field(12), QInt(7));
    VerifyResult f = verify_field(O12, nullptr);
    ASSERT_EQ(f.verdict, Verdict::Fails);
    EXPECT_TRUE(O12.totally_positive(*f.failing));
    EXPECT_FALSE(f_representable(O12, *f.failing).representable());
    EXPECT_EQ(f.failing_trace, O12.trace_Q(*f.failing));
}

TEST(VerifyField, SquaredGeneratorsKeepTheVerdict) {
    for (auto [D, delta] : std::vector<std::pair<long, QInt>>{{8, QInt(5)}, {5, QInt(5, 1)}, {12, QInt(9, 4)}}) {
        RelOrder O = RelOrder::make(make_field(D), delta);
        PlusSquareBasis P = derive_plus_square_basis(O, *find_units(units(), D, delta));
        // u1² generates a subgroup of index 2; M grows, the verdict must not change
        ConeData C = make_cone(O, {O.mul(P.u[0], P.u[0]), P.u[1], P.u[2]});
        ConeData C0 = make_cone(O, P.u);
        EXPECT_GE(C.M, C0.M);
        auto xs = indecomposables_under_bound(O, C);
        auto xs0 = indecomposables_under_bound(O, C0);
        EXPECT_TRUE(std::includes(xs.begin(), xs.end(), xs0.begin(), xs0.end()));
        for (const KElem& x : xs) EXPECT_TRUE(f_representable(O, x).representable());
    }
}

TEST(Classify, TableRows) {
    auto r8 = classify(8, params());
    EXPECT_EQ(r8.verified_discriminants, (std::vector<Integer>{1600}));
    EXPECT_EQ(r8.verified.at(0).label, std::optional<std::string>("4.4.1600.1"));
    auto r12 = classify(12, params());
    EXPECT_EQ(r12.verified_discriminants, (std::vector<Integer>{2304, 3600, 4752}));
    auto r13 = classify(13, params());
    EXPECT_TRUE(r13.verified.empty());
    EXPECT_TRUE(r13.needs_units.empty());
}

TEST(Classify, InvariantsAndReplay) {
    for (long D : {12, 13, 17}) {
        QuadField F = make_field(D);
        auto r = classify(D, params());
        std::set<QInt> s1;
        for (const auto& e : r.S1) s1.insert(e.delta);
        std::set<QInt> s2(r.S2.begin(), r.S2.end());
        for (const auto& d : s2) EXPECT_TRUE(s1.count(d));
        for (const auto& v : r.verified) {
            EXPECT_TRUE(s2.count(v.delta));
            EXPECT_EQ(v.abs_disc, Integer(D) * D * F.norm(v.delta));
        }
        EXPECT_EQ(r.eliminations.size() + r.verified.size() + r.needs_units.size(), r.S1.size());
        for (const auto& e : r.eliminations) EXPECT_TRUE(replay(F, e)) << D << " " << e.delta.str();
    }
}

TEST(Classify, Gating) {
    try {
        classify(300, params());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ClassNumberNotOne);
    }
    EXPECT_THROW(classify(40, params()), Error);
    EXPECT_THROW(classify(9, params()), Error);
    ClassifyParams p = params();
    p.m_count = 0;
    EXPECT_THROW(classify(8, p), Error);
}

TEST(Classify, DeterministicAcrossWorkers) {
    ClassifyParams p1 = params(), p3 = params();
    p3.workers = 3;
    EXPECT_EQ(to_json(classify(12, p1)).dump(), to_json(classify(12, p3)).dump());
}

TEST(Report, JsonRoundTrip) {
    ClassifyParams p = params();
    p.record_filters = true;
    for (long D : {5, 12}) {
        auto r = classify(D, p);
        std::string text = to_json(r).dump(1);
        EXPECT_EQ(report_from_json(json::parse(text)), r);
        EXPECT_EQ(to_json(report_from_json(json::parse(text))).dump(1), text);
    }
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / ("uqlift_" + name + std::to_string(::getpid()))).string()) {
        std::filesystem::remove(path);
    }
    ~TempFile() { std::filesystem::remove(path); }
};

TEST(Checkpoint, ResumeIsByteIdentical) {
    std::string plain = to_json(classify(12, params())).dump();
    TempFile ck("ck12");
    ClassifyParams p = params();
    p.checkpoint = ck.path;
    p.stop_after = 7;
    EXPECT_THROW(classify(12, p), Interrupted);
    EXPECT_TRUE(std::filesystem::exists(ck.path));
    p.stop_after = 11;
    EXPECT_THROW(classify(12, p), Interrupted);
    p.stop_after = 0;
    EXPECT_EQ(to_json(classify(12, p)).dump(), plain);
    // a finished checkpoint reproduces the report again
    EXPECT_EQ(to_json(classify(12, p)).dump(), plain);
}

TEST(Checkpoint, RejectsOtherVersionsAndGarbage) {
    TempFile ck("ckv");
    ClassifyParams p = params();
    p.checkpoint = ck.path;
    classify(8, p);
    json j = json::parse(std::ifstream(ck.path));
    j["version"] = "uqlift.checkpoint/0";
    std::ofstream(ck.path) << j.dump();
    try {
        classify(8, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptCheckpoint);
    }
    std::ofstream(ck.path) << "{not json";
    try {
        classify(8, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptCheckpoint);
    }
    // a checkpoint from a run with other parameters is not reused
    std::filesystem::remove(ck.path);
    classify(8, p);
    ClassifyParams q = p;
    q.m_count = 20;
    EXPECT_THROW(classify(8, q), Error);
}

}  // namespace
