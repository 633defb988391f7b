#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "indecomp.hpp"
#include "json_io.hpp"
#include "parallel.hpp"
#include "relquartic.hpp"
#include "reptest.hpp"

namespace uqlift {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr const char* kReportSchema = "uqlift.classification/1";
inline constexpr const char* kCheckpointVersion = "uqlift.checkpoint/1+0.1.0";

// ---- static data ----

// fundamental discriminants ≤ 200 of real quadratic fields with class number 1
inline const std::vector<long>& class_number_one_list() {
    static const std::vector<long> v = {5,   8,   12,  13,  17,  21,  24,  28,  29,  33,  37,  41,  44,  53,  56,  57,
                                        61,  69,  73,  76,  77,  88,  89,  92,  93,  97,  101, 109, 113, 124, 129, 133,
                                        137, 141, 149, 152, 157, 161, 172, 173, 177, 181, 184, 188, 193, 197};
    return v;
}

inline bool has_class_number_one(long D) {
    const auto& v = class_number_one_list();
    return std::binary_search(v.begin(), v.end(), D);
}

struct Table1Row {
    long D;
    std::vector<long> discs;
};

inline const std::vector<Table1Row>& table1() {
    static const std::vector<Table1Row> t = {
        {5, {725}},   {8, {1600}},        {12, {2304, 3600, 4752}}, {17, {4913}},   {21, {11025}},
        {24, {2304, 14400}}, {28, {7056, 19600}}, {29, {4205}},      {33, {13068}}, {56, {28224}},
    };
    return t;
}

inline std::vector<long> table1_discs(long D) {
    for (const auto& r : table1())
        if (r.D == D) return r.discs;
    return {};
}

inline Integer abs_discriminant(const RelOrder& O) { return O.abs_disc(); }

inline std::optional<std::string> label_match(const Integer& disc) {
    for (const auto& r : table1())
        for (long d : r.discs)
            if (disc == d) return "4.4." + std::to_string(d) + ".1";
    return std::nullopt;
}

// ---- S1 ----

// max of ρ_i(u²), ρ_i((2−u)²) over U_F, and 9
inline double c_max(const QuadField& F) {
    double c = 9;
    for (const QInt& u : QuadField::residue_system()) {
        QInt v = F.sub(QInt(2), u);
        for (int i = 1; i <= 2; ++i) c = std::max({c, F.embed(F.mul(u, u), i), F.embed(F.mul(v, v), i)});
    }
    return c;
}

struct ScanCounts {
    std::uint64_t visited = 0;
    std::uint64_t totally_positive = 0;
    std::uint64_t in_domain = 0;
    std::uint64_t no_square_class = 0;
    std::uint64_t square = 0;
    std::uint64_t cond_delta = 0;
    std::uint64_t add_bound = 0;
    bool operator==(const ScanCounts&) const = default;
};

// A Δ removed before the m-tests, with its replayable witness m.
struct FilterElimination {
    QInt delta;
    std::string reason;  // condDelta | addBound
    QInt m;
    bool operator==(const FilterElimination&) const = default;
};

struct S1Entry {
    QInt delta;
    QInt t;
    bool operator==(const S1Entry&) const = default;
};

struct S1Result {
    std::vector<S1Entry> S1;
    ScanCounts counts;
    std::vector<FilterElimination> filter_eliminations;
};

inline const char* kScanRegion =
    "norm-bounded: inside the ratio window 1/gamma <= x/y < gamma, failing add-cond forces "
    "P = xy < 4 sqrt(P) + 2 L g P^(1/4) + L^2 with L = 2 sqrt(D) + 4, g = gamma^(1/4) + gamma^(-1/4); "
    "failing condDelta forces min(x, y) < c_max. Every point of the region is filtered exactly.";

namespace detail {

// largest root of s⁴ − 4s² − 2Lg·s − L², padded
inline double s1_norm_bound(double L, double g) {
    auto f = [&](double s) { return s * s * s * s - 4 * s * s - 2 * L * g * s - L * L; };
    double lo = 0, hi = 1;
    while (f(hi) < 0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return std::pow(hi, 4) * 1.01 + 10;
}

}  // namespace detail

// Calls fn(Δ) on every integral totally positive Δ in the fundamental domain
// whose norm is under the add-cond bound.
template <class Fn>
void scan_s1_region(const QuadField& F, ScanCounts& counts, Fn&& fn) {
    double gamma = F.embed(F.eps_square(), 1);
    double sD = std::sqrt(static_cast<double>(F.D()));
    double L = 2 * sD + 4;
    double g = std::pow(gamma, 0.25) + std::pow(gamma, -0.25);
    double P = detail::s1_norm_bound(L, g);
    long k = F.tau_trace();
    double tau2 = F.tau_iv(2).mid();
    long nmax = static_cast<long>(std::sqrt(P * gamma) / sD) + 2;
    long double lsD = std::sqrt(static_cast<long double>(F.D())), ltau2 = (k - lsD) / 2;
    long ntau = (k * k - F.D()) / 4;  // N(τ)
    __int128 Pcap = static_cast<__int128>(std::ceil(P));
    long double lg = F.embed_iv(F.eps_square(), 1).mid(), lg_inv = 1 / lg;
    for (long n = -nmax; n <= nmax; ++n) {
        double dn = n * sD;  // x − y
        double ylo = std::max(0.0, -dn);
        double root = std::sqrt(dn * dn + 4 * P);
        double yhi = dn > 0 ? 2 * P / (dn + root) : (root - dn) / 2;
        if (dn > 0) ylo = std::max(ylo, dn / (gamma - 1));
        if (dn < 0) ylo = std::max(ylo, -gamma * dn / (gamma - 1));
        double slack = 1e-9 * (1 + std::fabs(yhi) + std::fabs(n * tau2)) + 1;
        if (ylo > yhi + slack) continue;
        long mlo = static_cast<long>(std::floor(ylo - n * tau2 - slack));
        long mhi = static_cast<long>(std::ceil(yhi - n * tau2 + slack));
        for (long m = mlo; m <= mhi; ++m) {
            ++counts.visited;
            if (!fast::tp({m, n}, k, F.D())) continue;
            ++counts.totally_positive;
            __int128 N = static_cast<__int128>(m) * m + static_cast<__int128>(k) * m * n + static_cast<__int128>(ntau) * n * n;
            if (N > Pcap) continue;
            QInt a(m, n);
            // decide the ratio window in long double away from its edges; exact near them
            long double y = m + n * ltau2, x = y + n * lsD;
            long double err = 1e-15L * (std::fabs(static_cast<long double>(m)) + std::fabs(n * lsD) + 1);
            long double rel = 8 * (err / x + err / y) + 1e-12L, r = x / y;
            bool inside;
            if (r > lg_inv * (1 + rel) && r < lg * (1 - rel)) inside = true;
            else if (r < lg_inv * (1 - rel) || r > lg * (1 + rel)) inside = false;
            else inside = F.in_fundamental_domain(a);
            if (!inside) continue;
            ++counts.in_domain;
            fn(a);
        }
    }
}

// Exact filters shared by the region scan and the literal box scan. Returns
// the S1 entry, or nullopt with the counters updated.
inline std::optional<S1Entry> s1_filter(const QuadField& F, const QInt& a, ScanCounts& counts,
                                        std::vector<FilterElimination>* records) {
    auto t = F.mod4_square_class(a);
    if (!t) {
        ++counts.no_square_class;
        return std::nullopt;
    }
    if (F.sqrt(a)) {
        ++counts.square;
        return std::nullopt;
    }
    if (cond_delta_holds(F, a)) {
        ++counts.cond_delta;
        if (records) records->push_back({a, "condDelta", witness_m(RelOrder::make(F, a))});
        return std::nullopt;
    }
    if (add_bound_holds(F, a)) {
        ++counts.add_bound;
        if (records) records->push_back({a, "addBound", witness_m_rounding(RelOrder::make(F, a))});
        return std::nullopt;
    }
    return S1Entry{a, *t};
}

inline S1Result enumerate_S1(const QuadField& F, bool record_filters = false) {
    S1Result R;
    auto* rec = record_filters ? &R.filter_eliminations : nullptr;
    scan_s1_region(F, R.counts, [&](const QInt& a) {
        if (auto e = s1_filter(F, a, R.counts, rec)) R.S1.push_back(*e);
    });
    std::sort(R.S1.begin(), R.S1.end(), [](const S1Entry& x, const S1Entry& y) { return x.delta < y.delta; });
    std::sort(R.filter_eliminations.begin(), R.filter_eliminations.end(),
              [](const FilterElimination& x, const FilterElimination& y) { return x.delta < y.delta; });
    return R;
}

// ---- S2 ----

// first non-representable m + w among the first m_count admissible m
inline std::optional<QInt> m_test(const RelOrder& O, int m_count) {
    if (m_count < 1) throw Error(ErrorCode::InvalidArgument, "m_count must be at least 1");
    TpShiftGenerator gen(O);
    for (int i = 0; i < m_count; ++i) {
        QInt m = gen.next();
        if (!f_representable(O, KElem(m, QInt(1))).representable()) return m;
    }
    return std::nullopt;
}

struct MTestElimination {
    QInt delta;
    QInt m;
    bool operator==(const MTestElimination&) const = default;
};

inline std::pair<std::vector<S1Entry>, std::vector<MTestElimination>> refine_S2(const QuadField& F,
                                                                                 const std::vector<S1Entry>& S1,
                                                                                 int m_count, unsigned workers = 1) {
    if (m_count < 1) throw Error(ErrorCode::InvalidArgument, "m_count must be at least 1");
    auto res = parallel_map<std::optional<QInt>>(S1.size(), workers, [&](std::size_t i) {
        return m_test(RelOrder::make(F, S1[i].delta), m_count);
    });
    std::vector<S1Entry> S2;
    std::vector<MTestElimination> elim;
    for (std::size_t i = 0; i < S1.size(); ++i) {
        if (res[i])
            elim.push_back({S1[i].delta, *res[i]});
        else
            S2.push_back(S1[i]);
    }
    return {S2, elim};
}

// ---- verification ----

enum class Verdict { UniversalLiftExists, Fails, NeedsUnits };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::UniversalLiftExists: return "UniversalLiftExists";
        case Verdict::Fails: return "Fails";
        case Verdict::NeedsUnits: return "NeedsUnits";
    }
    return "?";
}

struct VerifyResult {
    Verdict verdict = Verdict::NeedsUnits;
    std::optional<KElem> failing;
    long failing_trace = 0;
    std::vector<std::pair<KElem, RepWitness>> certificate;
    std::size_t indec_count = 0;
    long scanned_trace = 0;
    Integer trace_bound = 0;  // M when units were used
    std::string units_source;
    std::vector<KElem> indecomposables;  // all scanned, when the verdict is not Fails
};

struct VerifyOptions {
    long probe_trace = 160;
    unsigned workers = 1;
    bool keep_certificate = true;
};

// Indecomposables are scanned in increasing trace and each is tested for
// F-representability. The first failure is a valid Fails(α) with or without
// units, since the least-trace non-representable element is indecomposable.
// Without units a clean scan up to probe_trace proves nothing: NeedsUnits.
inline VerifyResult verify_field(const RelOrder& O, const UnitData* units, const VerifyOptions& opt = {}) {
    VerifyResult R;
    long bound = opt.probe_trace;
    if (units) {
        ConeData C = make_cone(O, *units);
        if (!fits_i64(C.M)) throw Error(ErrorCode::InvalidArgument, "trace bound too large: " + C.M.get_str());
        R.trace_bound = C.M;
        R.units_source = units->source;
        bound = C.M.get_si();
    }
    if (!O.small()) throw Error(ErrorCode::InvalidArgument, "order coordinates exceed 64 bits");
    IndecomposableScanner S(O);
    while (S.trace() < bound) {
        std::vector<KElem> band = S.next_trace();
        auto res = parallel_map<RepResult>(band.size(), opt.workers, [&](std::size_t i) {
            return f_representable(O, band[i]);
        });
        for (std::size_t i = 0; i < band.size(); ++i) {
            if (!res[i].representable()) {
                R.verdict = Verdict::Fails;
                R.failing = band[i];
                R.failing_trace = S.trace();
                R.indec_count = S.found().size();
                R.scanned_trace = S.trace();
                R.certificate.clear();
                return R;
            }
            if (opt.keep_certificate) R.certificate.emplace_back(band[i], *res[i].witness);
        }
    }
    R.indec_count = S.found().size();
    R.scanned_trace = S.trace();
    R.indecomposables = S.found();
    R.verdict = units ? Verdict::UniversalLiftExists : Verdict::NeedsUnits;
    return R;
}

// ---- report ----

struct Elimination {
    QInt delta;
    std::string reason;  // mTest | indecFail
    QInt m;              // mTest
    KElem alpha;         // indecFail
    long trace = 0;      // indecFail
    bool operator==(const Elimination&) const = default;
};

struct VerifiedEntry {
    QInt delta;
    QInt t;
    Integer abs_disc;
    std::optional<std::string> label;
    std::uint64_t indec_count = 0;
    std::uint64_t indec_classes = 0;
    Integer max_trace_bound;
    std::string units_source;
    bool index_unverified = true;
    bool operator==(const VerifiedEntry&) const = default;
};

struct NeedsUnitsEntry {
    QInt delta;
    QInt t;
    Integer abs_disc;
    long probe_trace = 0;
    std::uint64_t indec_count = 0;
    bool operator==(const NeedsUnitsEntry&) const = default;
};

struct ReportParameters {
    int m_count = 50;
    long probe_trace = 160;
    bool record_filters = false;
    bool allow_large_D = false;
    std::string units_file;
    bool operator==(const ReportParameters&) const = default;
};

struct ClassificationReport {
    std::string schema = kReportSchema;
    long D = 0;
    std::string c_max;
    ReportParameters parameters;
    std::string scan_region;
    ScanCounts counts;
    std::vector<S1Entry> S1;
    std::vector<FilterElimination> filter_eliminations;
    std::vector<Elimination> eliminations;
    std::vector<QInt> S2;
    std::vector<VerifiedEntry> verified;
    std::vector<NeedsUnitsEntry> needs_units;
    std::vector<Integer> verified_discriminants;
    bool operator==(const ClassificationReport&) const = default;
};

inline json to_json(const ScanCounts& c) {
    return json{{"visited", c.visited},         {"totally_positive", c.totally_positive},
                {"in_domain", c.in_domain},     {"no_square_class", c.no_square_class},
                {"square", c.square},           {"condDelta", c.cond_delta},
                {"addBound", c.add_bound}};
}
inline ScanCounts scan_counts_from_json(const json& j) {
    ScanCounts c;
    c.visited = j.at("visited");
    c.totally_positive = j.at("totally_positive");
    c.in_domain = j.at("in_domain");
    c.no_square_class = j.at("no_square_class");
    c.square = j.at("square");
    c.cond_delta = j.at("condDelta");
    c.add_bound = j.at("addBound");
    return c;
}

inline json to_json(const ReportParameters& p) {
    return json{{"m_count", p.m_count},
                {"probe_trace", p.probe_trace},
                {"record_filters", p.record_filters},
                {"allow_large_D", p.allow_large_D},
                {"units_file", p.units_file}};
}
inline ReportParameters parameters_from_json(const json& j) {
    ReportParameters p;
    p.m_count = j.at("m_count");
    p.probe_trace = j.at("probe_trace");
    p.record_filters = j.at("record_filters");
    p.allow_large_D = j.at("allow_large_D");
    p.units_file = j.at("units_file");
    return p;
}

inline json to_json(const S1Entry& e) { return json{{"delta", to_json(e.delta)}, {"t", to_json(e.t)}}; }
inline S1Entry s1_entry_from_json(const json& j) { return {qint_from_json(j.at("delta")), qint_from_json(j.at("t"))}; }

inline json to_json(const FilterElimination& e) {
    return json{{"delta", to_json(e.delta)}, {"reason", e.reason}, {"m", to_json(e.m)}};
}
inline FilterElimination filter_elim_from_json(const json& j) {
    return {qint_from_json(j.at("delta")), j.at("reason"), qint_from_json(j.at("m"))};
}

inline json to_json(const Elimination& e) {
    json j{{"delta", to_json(e.delta)}, {"reason", e.reason}};
    if (e.reason == "mTest") j["m"] = to_json(e.m);
    if (e.reason == "indecFail") {
        j["alpha"] = to_json(e.alpha);
        j["trace"] = e.trace;
    }
    return j;
}
inline Elimination elimination_from_json(const json& j) {
    Elimination e;
    e.delta = qint_from_json(j.at("delta"));
    e.reason = j.at("reason");
    if (e.reason == "mTest") e.m = qint_from_json(j.at("m"));
    if (e.reason == "indecFail") {
        e.alpha = kelem_from_json(j.at("alpha"));
        e.trace = j.at("trace");
    }
    return e;
}

inline json to_json(const VerifiedEntry& v) {
    return json{{"delta", to_json(v.delta)},
                {"t", to_json(v.t)},
                {"abs_disc", int_to_json(v.abs_disc)},
                {"label", v.label ? json(*v.label) : json(nullptr)},
                {"indec_count", v.indec_count},
                {"indec_classes", v.indec_classes},
                {"max_trace_bound", int_to_json(v.max_trace_bound)},
                {"units_source", v.units_source},
                {"index_unverified", v.index_unverified}};
}
inline VerifiedEntry verified_from_json(const json& j) {
    VerifiedEntry v;
    v.delta = qint_from_json(j.at("delta"));
    v.t = qint_from_json(j.at("t"));
    v.abs_disc = int_from_json(j.at("abs_disc"));
    if (!j.at("label").is_null()) v.label = j.at("label").get<std::string>();
    v.indec_count = j.at("indec_count");
    v.indec_classes = j.at("indec_classes");
    v.max_trace_bound = int_from_json(j.at("max_trace_bound"));
    v.units_source = j.at("units_source");
    v.index_unverified = j.at("index_unverified");
    return v;
}

inline json to_json(const NeedsUnitsEntry& v) {
    return json{{"delta", to_json(v.delta)},       {"t", to_json(v.t)},
                {"abs_disc", int_to_json(v.abs_disc)}, {"probe_trace", v.probe_trace},
                {"indec_count", v.indec_count}};
}
inline NeedsUnitsEntry needs_units_from_json(const json& j) {
    return {qint_from_json(j.at("delta")), qint_from_json(j.at("t")), int_from_json(j.at("abs_disc")),
            j.at("probe_trace").get<long>(), j.at("indec_count").get<std::uint64_t>()};
}

template <class T, class F>
json list_to_json(const std::vector<T>& xs, F&& f) {
    json a = json::array();
    for (const T& x : xs) a.push_back(f(x));
    return a;
}
template <class T, class F>
std::vector<T> list_from_json(const json& j, F&& f) {
    std::vector<T> out;
    for (const json& x : j) out.push_back(f(x));
    return out;
}

inline json to_json(const ClassificationReport& r) {
    auto id = [](const auto& x) { return to_json(x); };
    return json{{"schema", r.schema},
                {"D", r.D},
                {"c_max", r.c_max},
                {"parameters", to_json(r.parameters)},
                {"scan_region", r.scan_region},
                {"counts", to_json(r.counts)},
                {"S1", list_to_json(r.S1, id)},
                {"filter_eliminations", list_to_json(r.filter_eliminations, id)},
                {"eliminations", list_to_json(r.eliminations, id)},
                {"S2", list_to_json(r.S2, id)},
                {"verified", list_to_json(r.verified, id)},
                {"needs_units", list_to_json(r.needs_units, id)},
                {"verified_discriminants", list_to_json(r.verified_discriminants, int_to_json)}};
}

inline ClassificationReport report_from_json(const json& j) {
    ClassificationReport r;
    r.schema = j.at("schema");
    if (r.schema != kReportSchema) throw Error(ErrorCode::InvalidArgument, "unknown report schema " + r.schema);
    r.D = j.at("D");
    r.c_max = j.at("c_max");
    r.parameters = parameters_from_json(j.at("parameters"));
    r.scan_region = j.at("scan_region");
    r.counts = scan_counts_from_json(j.at("counts"));
    r.S1 = list_from_json<S1Entry>(j.at("S1"), s1_entry_from_json);
    r.filter_eliminations = list_from_json<FilterElimination>(j.at("filter_eliminations"), filter_elim_from_json);
    r.eliminations = list_from_json<Elimination>(j.at("eliminations"), elimination_from_json);
    r.S2 = list_from_json<QInt>(j.at("S2"), qint_from_json);
    r.verified = list_from_json<VerifiedEntry>(j.at("verified"), verified_from_json);
    r.needs_units = list_from_json<NeedsUnitsEntry>(j.at("needs_units"), needs_units_from_json);
    r.verified_discriminants = list_from_json<Integer>(j.at("verified_discriminants"), int_from_json);
    return r;
}

// ---- classify ----

struct ClassifyParams {
    int m_count = 50;
    long probe_trace = 160;
    bool record_filters = false;
    bool allow_large_D = false;
    unsigned workers = 1;
    const std::vector<UnitData>* units = nullptr;
    std::string units_file;  // recorded in the report
    std::string checkpoint;  // empty: no checkpointing
    std::size_t stop_after = 0;  // testing hook: interrupt after this many candidates
};

struct Interrupted : std::runtime_error {
    Interrupted() : std::runtime_error("interrupted at checkpoint") {}
};

inline QuadField classify_field(long D, bool allow_large_D) {
    if (D > 200 && !allow_large_D)
        throw Error(ErrorCode::ClassNumberNotOne,
                    "D=" + std::to_string(D) + " is beyond the class-number table; pass the override to proceed");
    QuadField F = make_field(D);
    if (D <= 200 && !has_class_number_one(D))
        throw Error(ErrorCode::ClassNumberNotOne, "D=" + std::to_string(D) + " has class number > 1");
    return F;
}

// per-candidate outcome after the m-tests and verification
struct Outcome {
    std::string kind;  // mTest | indecFail | verified | needsUnits
    Elimination elim;
    VerifiedEntry verified;
    NeedsUnitsEntry needs;
    bool operator==(const Outcome&) const = default;
};

inline json to_json(const Outcome& o) {
    json j{{"kind", o.kind}};
    if (o.kind == "mTest" || o.kind == "indecFail") j["elim"] = to_json(o.elim);
    if (o.kind == "verified") j["verified"] = to_json(o.verified);
    if (o.kind == "needsUnits") j["needs"] = to_json(o.needs);
    return j;
}
inline Outcome outcome_from_json(const json& j) {
    Outcome o;
    o.kind = j.at("kind");
    if (o.kind == "mTest" || o.kind == "indecFail")
        o.elim = elimination_from_json(j.at("elim"));
    else if (o.kind == "verified")
        o.verified = verified_from_json(j.at("verified"));
    else if (o.kind == "needsUnits")
        o.needs = needs_units_from_json(j.at("needs"));
    else
        throw Error(ErrorCode::CorruptCheckpoint, "unknown outcome kind " + o.kind);
    return o;
}

inline Outcome process_candidate(const QuadField& F, const S1Entry& e, const ClassifyParams& p) {
    RelOrder O = RelOrder::make(F, e.delta);
    Outcome o;
    if (auto m = m_test(O, p.m_count)) {
        o.kind = "mTest";
        o.elim.delta = e.delta;
        o.elim.reason = "mTest";
        o.elim.m = *m;
        return o;
    }
    const UnitData* U = p.units ? find_units(*p.units, F.D(), e.delta) : nullptr;
    VerifyOptions vo;
    vo.probe_trace = p.probe_trace;
    vo.keep_certificate = false;
    VerifyResult v = verify_field(O, U, vo);
    if (v.verdict == Verdict::Fails) {
        o.kind = "indecFail";
        o.elim.delta = e.delta;
        o.elim.reason = "indecFail";
        o.elim.alpha = *v.failing;
        o.elim.trace = v.failing_trace;
    } else if (v.verdict == Verdict::UniversalLiftExists) {
        o.kind = "verified";
        VerifiedEntry& ve = o.verified;
        ve.delta = e.delta;
        ve.t = e.t;
        ve.abs_disc = abs_discriminant(O);
        ve.label = label_match(ve.abs_disc);
        ve.indec_count = v.indec_count;
        ve.indec_classes = count_up_to_units(O, v.indecomposables);
        ve.max_trace_bound = v.trace_bound;
        ve.units_source = v.units_source;
    } else {
        o.kind = "needsUnits";
        o.needs = {e.delta, e.t, abs_discriminant(O), v.scanned_trace, v.indec_count};
    }
    return o;
}

namespace detail {

inline json checkpoint_json(long D, const ReportParameters& params, const S1Result& s1, const std::vector<Outcome>& done) {
    auto id = [](const auto& x) { return to_json(x); };
    return json{{"format", "uqlift.checkpoint"},
                {"version", kCheckpointVersion},
                {"D", D},
                {"parameters", to_json(params)},
                {"counts", to_json(s1.counts)},
                {"S1", list_to_json(s1.S1, id)},
                {"filter_eliminations", list_to_json(s1.filter_eliminations, id)},
                {"outcomes", list_to_json(done, id)}};
}

inline void write_atomic(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
        out << text;
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot rename checkpoint: " + ec.message());
}

// nullopt if the file does not exist
inline std::optional<std::pair<S1Result, std::vector<Outcome>>> load_checkpoint(const std::string& path, long D,
                                                                                const ReportParameters& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptCheckpoint, "unreadable checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.at("format") != "uqlift.checkpoint" || j.at("version") != kCheckpointVersion)
            throw Error(ErrorCode::CorruptCheckpoint, "checkpoint " + path + " was written by another version");
        if (j.at("D").get<long>() != D || parameters_from_json(j.at("parameters")) != params)
            throw Error(ErrorCode::CorruptCheckpoint, "checkpoint " + path + " belongs to a different run");
        S1Result s1;
        s1.counts = scan_counts_from_json(j.at("counts"));
        s1.S1 = list_from_json<S1Entry>(j.at("S1"), s1_entry_from_json);
        s1.filter_eliminations = list_from_json<FilterElimination>(j.at("filter_eliminations"), filter_elim_from_json);
        auto done = list_from_json<Outcome>(j.at("outcomes"), outcome_from_json);
        if (done.size() > s1.S1.size()) throw Error(ErrorCode::CorruptCheckpoint, "checkpoint has extra outcomes");
        return std::make_pair(std::move(s1), std::move(done));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptCheckpoint, "malformed checkpoint " + path + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptCheckpoint) throw;
        throw Error(ErrorCode::CorruptCheckpoint, std::string("malformed checkpoint: ") + e.what());
    }
}

inline std::string format_cmax(double c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", c);
    return buf;
}

}  // namespace detail

inline ClassificationReport classify(long D, const ClassifyParams& p = {}) {
    if (p.m_count < 1) throw Error(ErrorCode::InvalidArgument, "m_count must be at least 1");
    QuadField F = classify_field(D, p.allow_large_D);
    ReportParameters rp{p.m_count, p.probe_trace, p.record_filters, p.allow_large_D, p.units_file};

    S1Result s1;
    std::vector<Outcome> done;
    bool have = false;
    if (!p.checkpoint.empty()) {
        if (auto ck = detail::load_checkpoint(p.checkpoint, D, rp)) {
            s1 = std::move(ck->first);
            done = std::move(ck->second);
            have = true;
        }
    }
    auto save = [&] {
        if (!p.checkpoint.empty()) detail::write_atomic(p.checkpoint, detail::checkpoint_json(D, rp, s1, done).dump());
    };
    if (!have) {
        s1 = enumerate_S1(F, p.record_filters);
        save();
    }

    std::size_t batch = std::max<std::size_t>(1, p.workers) * 4;
    auto last_save = std::chrono::steady_clock::now();
    std::size_t processed_now = 0;
    while (done.size() < s1.S1.size()) {
        std::size_t start = done.size();
        std::size_t n = std::min(batch, s1.S1.size() - start);
        if (p.stop_after) n = std::min(n, p.stop_after - processed_now);
        auto res = parallel_map<Outcome>(n, p.workers, [&](std::size_t i) {
            return process_candidate(F, s1.S1[start + i], p);
        });
        done.insert(done.end(), res.begin(), res.end());
        processed_now += n;
        if (p.stop_after && processed_now >= p.stop_after && done.size() < s1.S1.size()) {
            save();
            throw Interrupted();
        }
        auto now = std::chrono::steady_clock::now();
        if (now - last_save > std::chrono::seconds(2)) {
            save();
            last_save = now;
        }
    }
    save();

    ClassificationReport r;
    r.D = D;
    r.c_max = detail::format_cmax(c_max(F));
    r.parameters = rp;
    r.scan_region = kScanRegion;
    r.counts = s1.counts;
    r.S1 = s1.S1;
    r.filter_eliminations = s1.filter_eliminations;
    std::set<Integer> discs;
    for (std::size_t i = 0; i < done.size(); ++i) {
        const Outcome& o = done[i];
        if (o.kind == "mTest") {
            r.eliminations.push_back(o.elim);
            continue;
        }
        r.S2.push_back(s1.S1[i].delta);
        if (o.kind == "indecFail") r.eliminations.push_back(o.elim);
        if (o.kind == "verified") {
            r.verified.push_back(o.verified);
            discs.insert(o.verified.abs_disc);
        }
        if (o.kind == "needsUnits") r.needs_units.push_back(o.needs);
    }
    r.verified_discriminants.assign(discs.begin(), discs.end());
    return r;
}

// Re-runs the witness of an elimination: m + w (or α) must be totally
// positive and not F-representable.
inline bool replay(const QuadField& F, const Elimination& e) {
    RelOrder O = RelOrder::make(F, e.delta);
    KElem x = e.reason == "mTest" ? KElem(e.m, QInt(1)) : e.alpha;
    return O.totally_positive(x) && !f_representable(O, x).representable();
}

inline bool replay(const QuadField& F, const FilterElimination& e) {
    RelOrder O = RelOrder::make(F, e.delta);
    KElem x(e.m, QInt(1));
    return O.totally_positive(x) && !f_representable(O, x).representable();
}

}  // namespace uqlift
