#pragma once

#include <fstream>
#include "json.hpp"
#include <string>
#include <vector>

#include "errors.hpp"
#include "indecomp.hpp"
#include "reptest.hpp"

namespace uqlift {

using json = nlohmann::json;

// integers are plain JSON numbers when they fit in 64 bits, decimal strings otherwise
inline json int_to_json(const Integer& z) {
    if (fits_i64(z)) return json(to_i64(z));
    return json(z.get_str());
}

inline Integer int_from_json(const json& j) {
    if (j.is_number_integer()) return Integer(j.get<long>());
    if (j.is_string()) {
        Integer z;
        if (z.set_str(j.get<std::string>(), 10) != 0)
            throw Error(ErrorCode::InvalidArgument, "not an integer: " + j.dump());
        return z;
    }
    throw Error(ErrorCode::InvalidArgument, "not an integer: " + j.dump());
}

inline json to_json(const QInt& a) { return json::array({int_to_json(a.m), int_to_json(a.n)}); }
inline QInt qint_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidArgument, "expected [m, n]: " + j.dump());
    return QInt(int_from_json(j[0]), int_from_json(j[1]));
}

inline json to_json(const KElem& x) { return json::array({to_json(x.a), to_json(x.b)}); }
inline KElem kelem_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidArgument, "expected [a, b]: " + j.dump());
    return KElem(qint_from_json(j[0]), qint_from_json(j[1]));
}

inline json to_json(const RepWitness& w) { return json{{"p", to_json(w.p)}, {"q", to_json(w.q)}, {"r", to_json(w.r)}}; }
inline RepWitness witness_from_json(const json& j) {
    return {qint_from_json(j.at("p")), qint_from_json(j.at("q")), qint_from_json(j.at("r"))};
}

inline json to_json(const UnitData& U) {
    json units = json::array();
    for (const KElem& u : U.units) units.push_back(to_json(u));
    return json{{"D", U.D}, {"delta", to_json(U.delta)}, {"units", units}, {"source", U.source}};
}

inline UnitData unit_data_from_json(const json& j) {
    UnitData U;
    U.D = j.at("D").get<long>();
    U.delta = qint_from_json(j.at("delta"));
    for (const json& u : j.at("units")) U.units.push_back(kelem_from_json(u));
    U.source = j.value("source", "");
    return U;
}

inline std::vector<UnitData> load_unit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open unit file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "malformed unit file " + path + ": " + e.what());
    }
    std::vector<UnitData> out;
    try {
        for (const json& f : j.at("fields")) out.push_back(unit_data_from_json(f));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "malformed unit file " + path + ": " + e.what());
    }
    return out;
}

inline std::string default_data_dir() {
    if (const char* env = std::getenv("UQLIFT_DATA_DIR")) return env;
#ifdef UQLIFT_DEFAULT_DATA_DIR
    return UQLIFT_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

inline std::vector<UnitData> load_bundled_units() { return load_unit_file(default_data_dir() + "/units.json"); }

}  // namespace uqlift
