#pragma once
// JSON market and matching formats.
//
// Market files look like:
//   {
//     "doctors": ["d1", "d2"],
//     "hospitals": [{"id": "h1", "budget": 10, "utility_kind": "general"}],
//     "contracts": [{"doctor": "d1", "hospital": "h1", "wage": 9, "utility": 9}],
//     "prefs": {"d1": [0], "d2": [1]}
//   }
// Contract ids are array positions. Rationals are integers or "p/q" strings;
// output is canonical (integer when the denominator is 1). Hospitals may carry
// "gamma" (required for proportional/uniform utilities; contracts may then omit
// "utility") and an optional "mechanism" name.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"

namespace budget_match {

using nlohmann::json;

inline json rat_json(const Rat& r, bool decimal = false) {
    if (decimal) return r.to_double();
    if (r.den() == 1) return r.num();
    return r.str();
}

inline Rat rat_from_json(const json& j) {
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_number_unsigned()) {
        unsigned long long v = j.get<unsigned long long>();
        if (v > (unsigned long long)INT64_MAX) throw std::overflow_error("rational overflow");
        return Rat((long long)v);
    }
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    throw std::invalid_argument("expected a rational (integer or \"p/q\"), got " + j.dump());
}

// Builds a Market from JSON, collecting every structural and semantic
// violation. Returns the market only when errors stays empty.
inline std::optional<Market> load_market(const json& j, std::vector<std::string>& errors) {
    auto err = [&](const std::string& msg) { errors.push_back(msg); };
    if (!j.is_object()) {
        err("market: top level must be an object");
        return std::nullopt;
    }
    for (const char* key : {"doctors", "hospitals", "contracts"})
        if (!j.contains(key) || !j[key].is_array()) {
            err(std::string("market: missing array field '") + key + "'");
            return std::nullopt;
        }

    Market m;
    std::map<std::string, int> did, hid;
    for (const json& d : j["doctors"]) {
        if (!d.is_string()) {
            err("doctors: entries must be strings");
            continue;
        }
        std::string name = d.get<std::string>();
        if (did.count(name)) err("doctors: duplicate name " + name);
        did.emplace(name, (int)m.doctors.size());
        m.doctors.push_back(name);
    }
    for (const json& h : j["hospitals"]) {
        HospitalSpec hs;
        if (!h.is_object() || !h.contains("id") || !h["id"].is_string()) {
            err("hospitals: entries must be objects with a string 'id'");
            continue;
        }
        hs.name = h["id"].get<std::string>();
        if (hid.count(hs.name)) err("hospitals: duplicate id " + hs.name);
        try {
            hs.budget = h.contains("budget") ? rat_from_json(h["budget"]) : Rat(0);
            if (!h.contains("budget")) err("hospital " + hs.name + ": missing budget");
        } catch (const std::exception& e) {
            err("hospital " + hs.name + ": " + e.what());
        }
        std::string kind = h.value("utility_kind", std::string("general"));
        if (auto k = parse_utility_kind(kind))
            hs.kind = *k;
        else
            err("hospital " + hs.name + ": unknown utility_kind '" + kind + "'");
        if (h.contains("gamma")) {
            try {
                hs.gamma = rat_from_json(h["gamma"]);
            } catch (const std::exception& e) {
                err("hospital " + hs.name + ": " + e.what());
            }
        }
        hs.mechanism = h.value("mechanism", std::string());
        hid.emplace(hs.name, (int)m.hospitals.size());
        m.hospitals.push_back(std::move(hs));
    }
    for (const json& c : j["contracts"]) {
        Contract x;
        x.id = (int)m.contracts.size();
        if (!c.is_object()) {
            err("contracts: entries must be objects");
            m.contracts.push_back(x);
            m.utility.push_back(Rat(1));
            continue;
        }
        std::string dn = c.value("doctor", std::string()), hn = c.value("hospital", std::string());
        auto di = did.find(dn);
        auto hi = hid.find(hn);
        if (di == did.end()) {
            err("contract " + std::to_string(x.id) + ": unknown doctor '" + dn + "'");
            m.contracts.push_back(x);
            m.utility.push_back(Rat(1));
            continue;
        }
        if (hi == hid.end()) {
            err("contract " + std::to_string(x.id) + ": unknown hospital '" + hn + "'");
            m.contracts.push_back(x);
            m.utility.push_back(Rat(1));
            continue;
        }
        x.doctor = di->second;
        x.hospital = hi->second;
        Rat f(1);
        try {
            if (c.contains("wage")) x.wage = rat_from_json(c["wage"]);
            else err("contract " + std::to_string(x.id) + ": missing wage");
            const HospitalSpec& hs = m.hospitals[x.hospital];
            if (c.contains("utility"))
                f = rat_from_json(c["utility"]);
            else if (hs.kind == UtilityKind::Proportional && hs.gamma)
                f = *hs.gamma * x.wage;
            else if (hs.kind == UtilityKind::Uniform && hs.gamma)
                f = *hs.gamma;
            else
                err("contract " + std::to_string(x.id) + ": missing utility");
        } catch (const std::exception& e) {
            err("contract " + std::to_string(x.id) + ": " + e.what());
        }
        m.contracts.push_back(x);
        m.utility.push_back(f);
    }
    m.prefs.resize(m.doctors.size());
    for (int d = 0; d < m.n_doctors(); ++d) m.prefs[d].doctor = d;
    if (j.contains("prefs")) {
        if (!j["prefs"].is_object()) {
            err("prefs: must be an object keyed by doctor");
        } else {
            for (auto it = j["prefs"].begin(); it != j["prefs"].end(); ++it) {
                auto di = did.find(it.key());
                if (di == did.end()) {
                    err("prefs: unknown doctor '" + it.key() + "'");
                    continue;
                }
                if (!it.value().is_array()) {
                    err("prefs of " + it.key() + ": must be an array of contract ids");
                    continue;
                }
                for (const json& v : it.value()) {
                    if (!v.is_number_integer()) {
                        err("prefs of " + it.key() + ": ids must be integers");
                        continue;
                    }
                    m.prefs[di->second].ranking.push_back(v.get<int>());
                }
            }
        }
    }
    if (!errors.empty()) return std::nullopt;

    // Range-check rankings before finalize indexes them.
    bool ranges_ok = true;
    for (const DoctorPrefs& p : m.prefs)
        for (int c : p.ranking)
            if (c < 0 || c >= m.n_contracts()) {
                err("prefs of " + m.doctors[p.doctor] + ": contract id " + std::to_string(c) +
                    " out of range");
                ranges_ok = false;
            }
    if (!ranges_ok) return std::nullopt;

    m.finalize();
    for (std::string& e : validate_market(m)) errors.push_back(std::move(e));
    if (!errors.empty()) return std::nullopt;
    return m;
}

inline Market market_from_json(const json& j) {
    std::vector<std::string> errors;
    auto m = load_market(j, errors);
    if (!m) {
        std::string msg = "invalid market:";
        for (const std::string& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    return *m;
}

inline json market_to_json(const Market& m) {
    json j;
    j["doctors"] = m.doctors;
    j["hospitals"] = json::array();
    for (const HospitalSpec& hs : m.hospitals) {
        json h;
        h["id"] = hs.name;
        h["budget"] = rat_json(hs.budget);
        h["utility_kind"] = utility_kind_name(hs.kind);
        if (hs.gamma) h["gamma"] = rat_json(*hs.gamma);
        if (!hs.mechanism.empty()) h["mechanism"] = hs.mechanism;
        j["hospitals"].push_back(std::move(h));
    }
    j["contracts"] = json::array();
    for (const Contract& x : m.contracts) {
        json c;
        c["doctor"] = m.doctors[x.doctor];
        c["hospital"] = m.hospitals[x.hospital].name;
        c["wage"] = rat_json(x.wage);
        c["utility"] = rat_json(m.utility[x.id]);
        j["contracts"].push_back(std::move(c));
    }
    j["prefs"] = json::object();
    for (const DoctorPrefs& p : m.prefs) j["prefs"][m.doctors[p.doctor]] = p.ranking;
    return j;
}

inline json matching_json(const Market& m, const Matching& mt, bool decimal = false) {
    json j;
    j["contracts"] = mt.contracts;
    json w = json::object();
    for (int h = 0; h < m.n_hospitals(); ++h)
        w[m.hospitals[h].name] = rat_json(mt.hospital_wage[h], decimal);
    j["hospital_wage"] = std::move(w);
    json detail = json::array();
    for (int c : mt.contracts) {
        const Contract& x = m.contracts[c];
        detail.push_back({{"id", c},
                          {"doctor", m.doctors[x.doctor]},
                          {"hospital", m.hospitals[x.hospital].name},
                          {"wage", rat_json(x.wage, decimal)}});
    }
    j["assignments"] = std::move(detail);
    return j;
}

}  // namespace budget_match
