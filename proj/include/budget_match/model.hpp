#pragma once
// Core data model for two-sided matching with per-hospital budgets.
//
// A market holds doctors, hospitals, and contracts x = (doctor, hospital, wage)
// with a strictly positive additive utility per contract on the hospital side
// and a strict preference ranking over own contracts on the doctor side.
// A doctor may leave any suffix of her contracts off the ranking; those are
// unacceptable (worse than staying unmatched).

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rational.hpp"

namespace budget_match {

// Enumeration or oracle input exceeded its configured size cap.
struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// The matching engine ran past its round bound; only a choice function that
// violates its contract (returns contracts outside its input) can cause this.
struct EngineGuard : std::runtime_error {
    explicit EngineGuard(const std::string& what) : std::runtime_error(what) {}
};

enum class UtilityKind { General, Proportional, Uniform };

inline const char* utility_kind_name(UtilityKind k) {
    switch (k) {
        case UtilityKind::General: return "general";
        case UtilityKind::Proportional: return "proportional";
        case UtilityKind::Uniform: return "uniform";
    }
    return "?";
}

inline std::optional<UtilityKind> parse_utility_kind(const std::string& s) {
    if (s == "general") return UtilityKind::General;
    if (s == "proportional") return UtilityKind::Proportional;
    if (s == "uniform") return UtilityKind::Uniform;
    return std::nullopt;
}

struct Contract {
    int id = -1;
    int doctor = -1;
    int hospital = -1;
    Rat wage;
};

// Contract ids in strictly descending preference; ids not listed are unacceptable.
struct DoctorPrefs {
    int doctor = -1;
    std::vector<int> ranking;
};

struct HospitalSpec {
    std::string name;
    Rat budget;
    UtilityKind kind = UtilityKind::General;
    std::optional<Rat> gamma;  // proportional: f = gamma * wage; uniform: f = gamma
    std::string mechanism;     // optional per-hospital mechanism name, "" if unset
};

struct Market {
    std::vector<std::string> doctors;
    std::vector<HospitalSpec> hospitals;
    std::vector<Contract> contracts;
    std::vector<Rat> utility;       // indexed by contract id
    std::vector<DoctorPrefs> prefs; // indexed by doctor

    // Derived by finalize().
    std::vector<std::vector<int>> by_doctor;
    std::vector<std::vector<int>> by_hospital;
    std::vector<int> rank_of;       // rank in the owner's ranking, -1 = unacceptable
    std::vector<Rat> w_min, w_max;  // over the hospital's full contract set, 0 if empty
    std::vector<long long> cap_k;   // ceil(budget / w_min), 0 for hospitals without contracts

    int n_doctors() const { return (int)doctors.size(); }
    int n_hospitals() const { return (int)hospitals.size(); }
    int n_contracts() const { return (int)contracts.size(); }

    const Rat& wage(int c) const { return contracts[c].wage; }
    const Rat& util(int c) const { return utility[c]; }

    bool acceptable(int c) const { return rank_of[c] >= 0; }

    // Strictly-prefers on {contract id, -1 = unmatched} for the owning doctor.
    // Unlisted contracts sit below unmatched; two unlisted ones are incomparable
    // and compare as equal here.
    bool prefers(int d, int a, int b) const {
        auto key = [&](int c) {
            int len = (int)prefs[d].ranking.size();
            if (c < 0) return len;
            return rank_of[c] >= 0 ? rank_of[c] : len + 1;
        };
        return key(a) < key(b);
    }

    void finalize() {
        by_doctor.assign(doctors.size(), {});
        by_hospital.assign(hospitals.size(), {});
        for (const Contract& c : contracts) {
            by_doctor[c.doctor].push_back(c.id);
            by_hospital[c.hospital].push_back(c.id);
        }
        rank_of.assign(contracts.size(), -1);
        for (const DoctorPrefs& p : prefs)
            for (int i = 0; i < (int)p.ranking.size(); ++i) rank_of[p.ranking[i]] = i;
        w_min.assign(hospitals.size(), Rat(0));
        w_max.assign(hospitals.size(), Rat(0));
        cap_k.assign(hospitals.size(), 0);
        for (int h = 0; h < n_hospitals(); ++h) {
            if (by_hospital[h].empty()) continue;
            Rat lo = wage(by_hospital[h][0]), hi = lo;
            for (int c : by_hospital[h]) {
                lo = std::min(lo, wage(c));
                hi = std::max(hi, wage(c));
            }
            w_min[h] = lo;
            w_max[h] = hi;
            // Invalid wages or budgets are caught by validate_market; leave
            // the cap unset rather than dividing by garbage here.
            if (lo.sign() > 0 && hospitals[h].budget.sign() > 0)
                cap_k[h] = ceil_div(hospitals[h].budget, lo);
        }
    }
};

// Semantic validation; assumes indices are structurally in range (the JSON
// loader resolves names and range-checks before calling this). Returns every
// violation found, empty means valid. Call finalize() first.
inline std::vector<std::string> validate_market(const Market& m) {
    std::vector<std::string> errs;
    auto cname = [&](int c) {
        const Contract& x = m.contracts[c];
        return "(" + m.doctors[x.doctor] + "," + m.hospitals[x.hospital].name + "," +
               x.wage.str() + ")";
    };
    for (int h = 0; h < m.n_hospitals(); ++h) {
        const HospitalSpec& hs = m.hospitals[h];
        if (hs.budget.sign() <= 0)
            errs.push_back("hospital " + hs.name + ": budget must be positive");
        if (hs.kind == UtilityKind::General && hs.gamma)
            errs.push_back("hospital " + hs.name + ": gamma given but utility_kind is general");
        if (hs.kind != UtilityKind::General) {
            if (!hs.gamma)
                errs.push_back("hospital " + hs.name + ": utility_kind " +
                               utility_kind_name(hs.kind) + " requires gamma");
            else if (hs.gamma->sign() <= 0)
                errs.push_back("hospital " + hs.name + ": gamma must be positive");
        }
    }
    for (const Contract& c : m.contracts) {
        const HospitalSpec& hs = m.hospitals[c.hospital];
        if (c.wage.sign() <= 0)
            errs.push_back("contract " + cname(c.id) + ": wage must be positive");
        else if (c.wage > hs.budget)
            errs.push_back("contract " + cname(c.id) + ": wage exceeds budget of " + hs.name);
        if (m.utility[c.id].sign() <= 0)
            errs.push_back("contract " + cname(c.id) + ": utility must be positive");
        if (hs.kind == UtilityKind::Proportional && hs.gamma &&
            m.utility[c.id] != *hs.gamma * c.wage)
            errs.push_back("contract " + cname(c.id) + ": utility != gamma * wage at " + hs.name);
        if (hs.kind == UtilityKind::Uniform && hs.gamma && m.utility[c.id] != *hs.gamma)
            errs.push_back("contract " + cname(c.id) + ": utility != gamma at " + hs.name);
    }
    for (int c = 0; c < m.n_contracts(); ++c)
        for (int c2 = c + 1; c2 < m.n_contracts(); ++c2)
            if (m.contracts[c].doctor == m.contracts[c2].doctor &&
                m.contracts[c].hospital == m.contracts[c2].hospital &&
                m.contracts[c].wage == m.contracts[c2].wage)
                errs.push_back("duplicate contract " + cname(c));
    for (const DoctorPrefs& p : m.prefs) {
        std::vector<char> seen(m.n_contracts(), 0);
        for (int c : p.ranking) {
            if (c < 0 || c >= m.n_contracts()) {
                errs.push_back("prefs of " + m.doctors[p.doctor] + ": unknown contract id " +
                               std::to_string(c));
                continue;
            }
            if (m.contracts[c].doctor != p.doctor)
                errs.push_back("prefs of " + m.doctors[p.doctor] + ": contract " + cname(c) +
                               " belongs to another doctor");
            if (seen[c])
                errs.push_back("prefs of " + m.doctors[p.doctor] + ": contract id " +
                               std::to_string(c) + " listed twice");
            seen[c] = 1;
        }
    }
    return errs;
}

// Total wage of the given contracts at hospital h.
inline Rat wage_total(const Market& m, const std::vector<int>& contracts, int h) {
    Rat s;
    for (int c : contracts)
        if (m.contracts[c].hospital == h) s += m.wage(c);
    return s;
}

// A matching: at most one contract per doctor. Contract ids kept sorted.
struct Matching {
    std::vector<int> contracts;
    std::vector<Rat> hospital_wage;
    std::vector<int> of_doctor;  // contract id or -1

    bool has(int c) const {
        return std::binary_search(contracts.begin(), contracts.end(), c);
    }
    friend bool operator==(const Matching& a, const Matching& b) {
        return a.contracts == b.contracts;
    }
};

inline Matching make_matching(const Market& m, std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    Matching mt;
    mt.of_doctor.assign(m.n_doctors(), -1);
    mt.hospital_wage.assign(m.n_hospitals(), Rat(0));
    for (int c : ids) {
        if (c < 0 || c >= m.n_contracts())
            throw std::invalid_argument("matching: unknown contract id " + std::to_string(c));
        const Contract& x = m.contracts[c];
        if (mt.of_doctor[x.doctor] != -1)
            throw std::invalid_argument("matching: doctor " + m.doctors[x.doctor] +
                                        " holds two contracts");
        mt.of_doctor[x.doctor] = c;
        mt.hospital_wage[x.hospital] += x.wage;
    }
    mt.contracts = std::move(ids);
    return mt;
}

}  // namespace budget_match
