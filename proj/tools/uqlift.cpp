#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uqlift/classify.hpp"
#include "uqlift/sqrtext.hpp"

using namespace uqlift;

namespace {

enum Exit { kOk = 0, kMismatch = 1, kInput = 2, kNeedsUnits = 3 };

struct Options {
    std::string command;
    long D = 0;
    std::string delta, alpha;
    long e = 0;
    int m_count = 50;
    long probe_trace = 160;
    long max_trace = 0;
    std::string units;
    unsigned workers = 1;
    std::string format = "json";
    std::string checkpoint;
    bool allow_large_D = false;
    bool allow_unproved = false;
    bool record_filters = false;
    bool include_193 = false;
    std::vector<long> skip, only;
    long from = 0;
    int count = 0;
    bool verbose = false;
};

struct CliError {
    int code;
    json body;
};

[[noreturn]] void input_error(const std::string& what, const std::string& name = "InvalidArgument") {
    throw CliError{kInput, json{{"error", name}, {"message", what}}};
}

std::vector<Integer> parse_ints(const std::string& s, std::size_t n, const char* flag) {
    std::vector<Integer> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        Integer z;
        if (tok.empty() || z.set_str(tok, 10) != 0) input_error(std::string(flag) + ": not an integer list: " + s);
        out.push_back(z);
    }
    if (out.size() != n) input_error(std::string(flag) + " expects " + std::to_string(n) + " comma-separated integers");
    return out;
}

QInt parse_qint(const std::string& s, const char* flag) {
    auto v = parse_ints(s, 2, flag);
    return {v[0], v[1]};
}

KElem parse_kelem(const std::string& s) {
    auto v = parse_ints(s, 4, "--alpha");
    return {QInt(v[0], v[1]), QInt(v[2], v[3])};
}

// everything that determines the output; worker count and checkpoint path do not
json run_config(const Options& o) {
    json j{{"command", o.command}, {"format", o.format}, {"version", kLibraryVersion}};
    auto put_if = [&](const char* k, bool cond, json v) {
        if (cond) j[k] = std::move(v);
    };
    put_if("D", o.D != 0, o.D);
    put_if("delta", !o.delta.empty(), o.delta);
    put_if("alpha", !o.alpha.empty(), o.alpha);
    put_if("e", o.e != 0, o.e);
    if (o.command == "classify" || o.command == "check-delta" || o.command == "table1") {
        j["m_count"] = o.m_count;
        j["probe_trace"] = o.probe_trace;
        j["allow_large_D"] = o.allow_large_D;
        j["record_filters"] = o.record_filters;
    }
    put_if("max_trace", o.max_trace != 0, o.max_trace);
    put_if("units_file", !o.units.empty(), o.units);
    if (o.command == "sqrt5-witness") {
        j["allow_unproved"] = o.allow_unproved;
        put_if("from", o.from != 0, o.from);
        put_if("count", o.count != 0, o.count);
    }
    if (o.command == "table1") {
        j["skip"] = o.skip;
        j["only"] = o.only;
        j["include_193"] = o.include_193;
    }
    return j;
}

// units: explicit file, else the bundled file
struct UnitsSource {
    std::vector<UnitData> data;
    std::string path;
};

UnitsSource load_units(const Options& o) {
    UnitsSource u;
    u.path = o.units.empty() ? default_data_dir() + "/units.json" : o.units;
    if (!std::filesystem::exists(u.path)) {
        if (!o.units.empty()) input_error("units file not found: " + u.path, "IoError");
        u.path.clear();
        return u;
    }
    u.data = load_unit_file(u.path);
    return u;
}

void check_checkpoint_path(const std::string& p) {
    if (p.empty()) return;
    auto parent = std::filesystem::path(p).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        input_error("checkpoint directory does not exist: " + parent.string(), "IoError");
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) r += c == '"' ? std::string("\"\"") : std::string(1, c);
    return r + "\"";
}

const char* kCsvHeader = "D_F,delta_m,delta_n,abs_disc,label,verdict\n";

std::string csv_row(long D, const QInt& delta, const Integer& disc, const std::optional<std::string>& label,
                    const std::string& verdict) {
    return std::to_string(D) + "," + delta.m.get_str() + "," + delta.n.get_str() + "," + disc.get_str() + "," +
           csv_escape(label.value_or("")) + "," + verdict + "\n";
}

Integer disc_of(const QuadField& F, const QInt& delta) { return Integer(F.D()) * F.D() * F.norm(delta); }

// one row per S1 candidate, in S1 order
std::string classify_csv(const ClassificationReport& r) {
    QuadField F = make_field(r.D);
    std::map<QInt, std::string> verdict;
    std::map<QInt, std::optional<std::string>> labels;
    for (const auto& e : r.eliminations) verdict[e.delta] = e.reason;
    for (const auto& v : r.verified) {
        verdict[v.delta] = "verified";
        labels[v.delta] = v.label;
    }
    for (const auto& n : r.needs_units) verdict[n.delta] = "needsUnits";
    std::string out;
    for (const auto& s : r.S1) {
        Integer d = disc_of(F, s.delta);
        out += csv_row(r.D, s.delta, d, labels.count(s.delta) ? labels[s.delta] : label_match(d), verdict[s.delta]);
    }
    return out;
}

std::string join(const std::vector<Integer>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].get_str();
    return s;
}

std::string classify_human(const ClassificationReport& r) {
    std::ostringstream os;
    os << "D_F = " << r.D << "\n";
    os << "  S1: " << r.S1.size() << " candidates (scan visited " << r.counts.visited << ")\n";
    os << "  S2: " << r.S2.size() << " after m-tests\n";
    os << "  verified: {" << join(r.verified_discriminants) << "}\n";
    for (const auto& v : r.verified)
        os << "    delta " << v.delta.str() << "  |disc| " << v.abs_disc.get_str() << "  " << v.label.value_or("-")
           << "  indecomposables " << v.indec_count << " (" << v.indec_classes << " classes), M = "
           << v.max_trace_bound.get_str() << "\n";
    if (!r.needs_units.empty()) {
        os << "  needs units:\n";
        for (const auto& n : r.needs_units) os << "    delta " << n.delta.str() << "  |disc| " << n.abs_disc.get_str() << "\n";
    }
    return os.str();
}

// ---- commands ----

int expected_exit(const ClassificationReport& r) {
    if (!r.needs_units.empty()) return kNeedsUnits;
    if (r.D <= 200 && r.D != 193 && has_class_number_one(r.D)) {
        auto want = table1_discs(r.D);
        std::vector<Integer> w(want.begin(), want.end());
        if (w != r.verified_discriminants) return kMismatch;
    }
    return kOk;
}

ClassifyParams classify_params(const Options& o, const UnitsSource& U) {
    ClassifyParams p;
    p.m_count = o.m_count;
    p.probe_trace = o.probe_trace;
    p.record_filters = o.record_filters;
    p.allow_large_D = o.allow_large_D;
    p.workers = o.workers;
    p.units = U.path.empty() ? nullptr : &U.data;
    p.units_file = o.units;  // empty means the bundled file
    return p;
}

int cmd_classify(const Options& o, std::string& out) {
    check_checkpoint_path(o.checkpoint);
    UnitsSource U = load_units(o);
    ClassifyParams p = classify_params(o, U);
    p.checkpoint = o.checkpoint;
    ClassificationReport r = classify(o.D, p);
    if (o.format == "csv")
        out = std::string(kCsvHeader) + classify_csv(r);
    else if (o.format == "human")
        out = classify_human(r);
    else {
        json j = to_json(r);
        j["run_config"] = run_config(o);
        out = j.dump(2) + "\n";
    }
    return expected_exit(r);
}

int cmd_check_delta(const Options& o, json& j) {
    QuadField F = classify_field(o.D, o.allow_large_D);
    QInt delta = parse_qint(o.delta, "--delta");
    RelOrder O = RelOrder::make(F, delta);
    UnitsSource U = load_units(o);
    j["D"] = o.D;
    j["delta"] = to_json(delta);
    j["t"] = to_json(O.t());
    j["abs_disc"] = int_to_json(O.abs_disc());
    auto label = label_match(O.abs_disc());
    j["label"] = label ? json(*label) : json(nullptr);
    j["in_fundamental_domain"] = F.in_fundamental_domain(delta);
    j["condDelta"] = cond_delta_holds(F, delta);
    j["addBound"] = add_bound_holds(F, delta);
    auto elim = [&](const char* reason, const QInt& m) {
        j["status"] = "eliminated";
        j["reason"] = reason;
        j["m"] = to_json(m);
        return kOk;
    };
    if (j["condDelta"].get<bool>()) return elim("condDelta", witness_m(O));
    if (j["addBound"].get<bool>()) return elim("addBound", witness_m_rounding(O));
    if (auto m = m_test(O, o.m_count)) return elim("mTest", *m);
    VerifyOptions vo;
    vo.probe_trace = o.probe_trace;
    vo.workers = o.workers;
    vo.keep_certificate = false;
    const UnitData* ud = U.path.empty() ? nullptr : find_units(U.data, o.D, delta);
    VerifyResult v = verify_field(O, ud, vo);
    j["verdict"] = verdict_name(v.verdict);
    j["indec_count"] = v.indec_count;
    j["scanned_trace"] = v.scanned_trace;
    if (v.verdict == Verdict::Fails) {
        j["status"] = "eliminated";
        j["reason"] = "indecFail";
        j["alpha"] = to_json(*v.failing);
        j["trace"] = v.failing_trace;
        return kOk;
    }
    if (v.verdict == Verdict::UniversalLiftExists) {
        j["status"] = "verified";
        j["trace_bound"] = int_to_json(v.trace_bound);
        j["units_source"] = v.units_source;
        j["indec_classes"] = count_up_to_units(O, v.indecomposables);
        return kOk;
    }
    j["status"] = "needsUnits";
    return kNeedsUnits;
}

int cmd_represent(const Options& o, json& j) {
    QuadField F = classify_field(o.D, true);
    RelOrder O = RelOrder::make(F, parse_qint(o.delta, "--delta"));
    KElem a = parse_kelem(o.alpha);
    if (!O.totally_positive(a)) input_error("alpha " + a.str() + " is not totally positive", "NotTotallyPositive");
    RepResult r = f_representable(O, a);
    j["D"] = o.D;
    j["delta"] = to_json(O.Delta());
    j["t"] = to_json(O.t());
    j["alpha"] = to_json(a);
    j["representable"] = r.representable();
    j["witness"] = r.witness ? to_json(*r.witness) : json(nullptr);
    j["searched_r_count"] = r.searched_r_count;
    return kOk;
}

int cmd_indecomposables(const Options& o, json& j) {
    QuadField F = classify_field(o.D, true);
    QInt delta = parse_qint(o.delta, "--delta");
    RelOrder O = RelOrder::make(F, delta);
    std::vector<KElem> xs;
    j["D"] = o.D;
    j["delta"] = to_json(delta);
    if (o.max_trace > 0) {
        xs = indecomposables_up_to(O, o.max_trace);
        j["bound"] = o.max_trace;
        j["bound_kind"] = "max_trace";
    } else {
        UnitsSource U = load_units(o);
        const UnitData* ud = U.path.empty() ? nullptr : find_units(U.data, o.D, delta);
        if (!ud) {
            j["status"] = "needsUnits";
            return kNeedsUnits;
        }
        ConeData C = make_cone(O, *ud);
        xs = indecomposables_under_bound(O, C);
        j["bound"] = int_to_json(C.M);
        j["bound_kind"] = "M";
        j["units_source"] = ud->source;
    }
    json list = json::array();
    for (const KElem& x : xs) list.push_back(json{{"alpha", to_json(x)}, {"trace", int_to_json(O.trace_Q(x))}});
    j["count"] = xs.size();
    j["classes_up_to_units"] = count_up_to_units(O, xs);
    j["indecomposables"] = list;
    return kOk;
}

int cmd_sqrt_e(const Options& o, json& j) {
    QuadField F = classify_field(o.D, true);
    SqrtEContext c = compositum_check(F, o.e);
    j["D"] = o.D;
    j["e"] = o.e;
    j["delta_e"] = c.delta_e;
    j["omega"] = to_json(c.omega);
    j["t"] = to_json(c.order.t());
    if (o.e == 5) {
        RepResult r = f_representable(c.order, one_plus_omega(c));
        throw CliError{kInput, json{{"error", "ESpecialFive"},
                                    {"message", "the construction does not apply to e = 5"},
                                    {"one_plus_omega", to_json(one_plus_omega(c))},
                                    {"representable", r.representable()},
                                    {"witness", r.witness ? to_json(*r.witness) : json(nullptr)}}};
    }
    SqrtEWitness w = sqrt_e_witness(c);
    j["n_e"] = int_to_json(w.n_e);
    j["alpha"] = to_json(w.alpha);
    j["verdict"] = witness_verdict_name(w.verdict);
    j["witness"] = w.rep.witness ? to_json(*w.rep.witness) : json(nullptr);
    j["searched_r_count"] = w.rep.searched_r_count;
    return w.verdict == WitnessVerdict::NotRepresentable ? kOk : kMismatch;
}

json sqrt5_json(const Sqrt5Witness& w) {
    return json{{"D", w.D},
                {"regime", w.proved_regime ? "proved" : "empirical"},
                {"a", to_json(w.a)},
                {"b", to_json(w.b)},
                {"a_index", int_to_json(w.a_index)},
                {"b_index", int_to_json(w.b_index)},
                {"b_choices", w.b_choices},
                {"alpha", to_json(w.alpha)},
                {"verdict", witness_verdict_name(w.verdict)},
                {"witness", w.rep.witness ? to_json(*w.rep.witness) : json(nullptr)},
                {"searched_r_count", w.rep.searched_r_count}};
}

int cmd_sqrt5(const Options& o, json& j) {
    std::vector<long> Ds;
    if (o.count > 0)
        Ds = sqrt5_candidates(o.from > 0 ? o.from : kSqrt5Threshold, o.count);
    else if (o.D != 0)
        Ds = {o.D};
    else
        input_error("sqrt5-witness needs --D or --count");
    json list = json::array();
    int code = kOk;
    for (long D : Ds) {
        Sqrt5Witness w = sqrt5_witness(D, o.allow_unproved);
        if (w.proved_regime && w.verdict == WitnessVerdict::Representable) code = kMismatch;
        list.push_back(sqrt5_json(w));
    }
    j["results"] = list;
    return code;
}

int cmd_verify_units(const Options& o, json& j) {
    std::string path = o.units.empty() ? default_data_dir() + "/units.json" : o.units;
    auto all = load_unit_file(path);
    json list = json::array();
    int code = kOk;
    for (const UnitData& U : all) {
        json f{{"D", U.D}, {"delta", to_json(U.delta)}, {"source", U.source}};
        try {
            RelOrder O = RelOrder::make(make_field(U.D), U.delta);
            PlusSquareBasis B = derive_plus_square_basis(O, U);
            ConeData C = make_cone(O, B.u);
            f["ok"] = true;
            f["index"] = B.index;
            f["trace_bound"] = int_to_json(C.M);
        } catch (const Error& e) {
            f["ok"] = false;
            f["error"] = error_name(e.code());
            f["message"] = e.what();
            code = kMismatch;
        }
        list.push_back(f);
    }
    j["units_file"] = path;
    j["fields"] = list;
    return code;
}

int cmd_table1(const Options& o, std::string& out) {
    if (!o.checkpoint.empty() && !std::filesystem::is_directory(o.checkpoint))
        input_error("checkpoint directory does not exist: " + o.checkpoint, "IoError");
    UnitsSource U = load_units(o);
    std::set<long> skip(o.skip.begin(), o.skip.end());
    if (!o.include_193) skip.insert(193);
    std::set<long> only(o.only.begin(), o.only.end());
    json rows = json::array(), skipped = json::array();
    std::string csv = kCsvHeader;
    std::ostringstream human;
    bool mismatch = false, needs = false;
    for (long D : class_number_one_list()) {
        if (!only.empty() && !only.count(D)) continue;
        if (skip.count(D)) {
            skipped.push_back(D);
            continue;
        }
        ClassifyParams p = classify_params(o, U);
        if (!o.checkpoint.empty()) p.checkpoint = o.checkpoint + "/D" + std::to_string(D) + ".json";
        auto t0 = std::chrono::steady_clock::now();
        ClassificationReport r = classify(D, p);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.verbose) std::cerr << "D=" << D << " done in " << secs << " s\n";
        json row{{"D", D}, {"verified", list_to_json(r.verified_discriminants, int_to_json)}};
        json labels = json::array();
        for (const auto& v : r.verified) {
            labels.push_back(v.label ? json(*v.label) : json(nullptr));
            csv += csv_row(D, v.delta, v.abs_disc, v.label, "verified");
        }
        row["labels"] = labels;
        row["needs_units"] = r.needs_units.size();
        if (!r.needs_units.empty()) needs = true;
        if (D == 193) {
            row["expected"] = nullptr;
            row["match"] = nullptr;
        } else {
            auto want = table1_discs(D);
            std::vector<Integer> w(want.begin(), want.end());
            row["expected"] = list_to_json(w, int_to_json);
            bool ok = w == r.verified_discriminants;
            row["match"] = ok;
            if (!ok) mismatch = true;
        }
        human << "D_F = " << D << ": {" << join(r.verified_discriminants) << "}"
              << (row["match"].is_boolean() ? (row["match"].get<bool>() ? "  match" : "  MISMATCH") : "")
              << (r.needs_units.empty() ? "" : "  needs units") << "\n";
        rows.push_back(row);
    }
    if (o.format == "csv")
        out = csv;
    else if (o.format == "human") {
        out = human.str();
        if (!skipped.empty()) out += "skipped: " + skipped.dump() + "\n";
    } else {
        json j{{"run_config", run_config(o)}, {"rows", rows}, {"skipped", skipped}, {"all_match", !mismatch}};
        out = j.dump(2) + "\n";
    }
    if (mismatch) return kMismatch;
    return needs ? kNeedsUnits : kOk;
}

int exit_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::NotAUnit:
        case ErrorCode::RankDeficient:
        case ErrorCode::ExponentRecoveryFailed:
        case ErrorCode::PreconditionFailed:
            return kMismatch;
        default:
            return kInput;
    }
}

std::string human_of(const json& j) {
    std::ostringstream os;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "run_config") os << it.key() << ": " << it.value().dump() << "\n";
    return os.str();
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Universal lifts of quadratic lattices to totally real quadratic extensions"};
    app.require_subcommand(1);
    Options o;

    auto add_D = [&](CLI::App* s, bool required = true) {
        auto* opt = s->add_option("--D", o.D, "fundamental discriminant of the base field F");
        if (required) opt->required();
    };
    auto add_format = [&](CLI::App* s) {
        s->add_option("--format", o.format, "json | csv | human")->check(CLI::IsMember({"json", "csv", "human"}));
    };
    auto add_units = [&](CLI::App* s) { s->add_option("--units", o.units, "unit data file (default: bundled)"); };
    auto add_search = [&](CLI::App* s) {
        s->add_option("--m-count", o.m_count, "m-tests per candidate")->check(CLI::PositiveNumber);
        s->add_option("--probe-trace", o.probe_trace, "indecomposable scan depth without units")->check(CLI::PositiveNumber);
        s->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
        s->add_flag("--allow-large-D", o.allow_large_D, "allow D > 200 (class number not checked)");
        s->add_flag("--record-filters", o.record_filters, "record witnesses for filter eliminations");
    };

    auto* classify_cmd = app.add_subcommand("classify", "classify all quartic K over F admitting a universal lift");
    add_D(classify_cmd);
    add_search(classify_cmd);
    add_units(classify_cmd);
    add_format(classify_cmd);
    classify_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint file; resumes if present");

    auto* check = app.add_subcommand("check-delta", "run the pipeline on a single Delta");
    add_D(check);
    check->add_option("--delta", o.delta, "Delta as m,n (m + n tau)")->required();
    add_search(check);
    add_units(check);
    add_format(check);

    auto* rep = app.add_subcommand("represent", "decide F-representability of alpha = a + b w");
    add_D(rep);
    rep->add_option("--delta", o.delta, "Delta as m,n")->required();
    rep->add_option("--alpha", o.alpha, "alpha as a_m,a_n,b_m,b_n")->required();
    add_format(rep);

    auto* ind = app.add_subcommand("indecomposables", "list indecomposables of O_F[w]");
    add_D(ind);
    ind->add_option("--delta", o.delta, "Delta as m,n")->required();
    ind->add_option("--max-trace", o.max_trace, "list up to this trace instead of the unit bound M");
    add_units(ind);
    add_format(ind);

    auto* se = app.add_subcommand("sqrt-e", "non-representable element of F(sqrt e)");
    add_D(se);
    se->add_option("--e", o.e, "square-free e > 1")->required();
    add_format(se);

    auto* s5 = app.add_subcommand("sqrt5-witness", "non-representable a + b eps in F(sqrt 5)");
    add_D(s5, false);
    s5->add_option("--from", o.from, "batch: first D to scan");
    s5->add_option("--count", o.count, "batch: number of D to scan");
    s5->add_flag("--allow-unproved", o.allow_unproved, "run for D < 4077 (empirical verdict)");
    add_format(s5);

    auto* vu = app.add_subcommand("verify-units", "re-check a unit data file");
    add_units(vu);
    add_format(vu);

    auto* t1 = app.add_subcommand("table1", "classify every bundled D and compare with the known table");
    add_search(t1);
    add_units(t1);
    add_format(t1);
    t1->add_option("--skip", o.skip, "D values to skip")->delimiter(',');
    t1->add_option("--only", o.only, "restrict to these D values")->delimiter(',');
    t1->add_flag("--include-193", o.include_193, "do not skip D = 193");
    t1->add_option("--checkpoint", o.checkpoint, "directory for per-D checkpoints");
    t1->add_flag("--verbose", o.verbose, "progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return kInput;
    }
    o.command = app.get_subcommands().front()->get_name();

    try {
        std::string text;
        int code = kOk;
        if (o.command == "classify") {
            code = cmd_classify(o, text);
        } else if (o.command == "table1") {
            code = cmd_table1(o, text);
        } else {
            json j;
            if (o.command == "check-delta") code = cmd_check_delta(o, j);
            if (o.command == "represent") code = cmd_represent(o, j);
            if (o.command == "indecomposables") code = cmd_indecomposables(o, j);
            if (o.command == "sqrt-e") code = cmd_sqrt_e(o, j);
            if (o.command == "sqrt5-witness") code = cmd_sqrt5(o, j);
            if (o.command == "verify-units") code = cmd_verify_units(o, j);
            j["run_config"] = run_config(o);
            if (o.format == "human")
                text = human_of(j);
            else if (o.format == "csv")
                input_error("csv output is only available for classify and table1");
            else
                text = j.dump(2) + "\n";
        }
        std::cout << text;
        return code;
    } catch (const CliError& e) {
        std::cerr << e.body.dump() << "\n";
        return e.code;
    } catch (const Error& e) {
        std::cerr << json{{"error", error_name(e.code())}, {"message", e.what()}}.dump() << "\n";
        return exit_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
        return kMismatch;
    }
}

int main(int argc, char** argv) { return run(argc, argv); }
