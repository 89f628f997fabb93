#pragma once
// Built-in fixture markets with frozen expected outcomes, plus seeded
// generator families used by the sweeps:
//
//   gen_nonexistence_family  markets with no stable matching even when every
//                            budget is relaxed by a factor up to 1 + alpha,
//                            while every wage stays at most beta * budget
//   gen_overspend_family     single-hospital markets where the capped greedy
//                            choice overspends an optimal budget-feasible set
//   gen_random               seeded random markets, optionally with distinct
//                            utility-per-wage ratios (or distinct wages for
//                            proportional / uniform utilities)

#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "model.hpp"

namespace budget_match {

namespace detail {

struct MarketBuilder {
    Market m;
    std::vector<std::pair<std::string, std::vector<int>>> pending_prefs;

    int doctor(const std::string& name) {
        for (int i = 0; i < m.n_doctors(); ++i)
            if (m.doctors[i] == name) return i;
        m.doctors.push_back(name);
        return m.n_doctors() - 1;
    }
    int hospital(const std::string& name, const Rat& budget,
                 UtilityKind kind = UtilityKind::General, std::optional<Rat> gamma = {},
                 std::string mechanism = {}) {
        HospitalSpec hs;
        hs.name = name;
        hs.budget = budget;
        hs.kind = kind;
        hs.gamma = std::move(gamma);
        hs.mechanism = std::move(mechanism);
        m.hospitals.push_back(std::move(hs));
        return m.n_hospitals() - 1;
    }
    int contract(const std::string& d, const std::string& h, const Rat& wage, const Rat& util) {
        Contract c;
        c.id = m.n_contracts();
        c.doctor = doctor(d);
        for (int i = 0; i < m.n_hospitals(); ++i)
            if (m.hospitals[i].name == h) c.hospital = i;
        if (c.hospital < 0) throw std::logic_error("builder: unknown hospital " + h);
        c.wage = wage;
        m.contracts.push_back(c);
        m.utility.push_back(util);
        return c.id;
    }
    void prefs(const std::string& d, std::vector<int> ranking) {
        pending_prefs.push_back({d, std::move(ranking)});
    }
    Market build() {
        // Prefs may name a doctor with no contracts; settle the doctor table
        // before sizing the prefs array so find-or-create cannot outgrow it.
        for (auto& pr : pending_prefs) doctor(pr.first);
        m.prefs.resize(m.doctors.size());
        for (int d = 0; d < m.n_doctors(); ++d) m.prefs[d].doctor = d;
        for (auto& [name, ranking] : pending_prefs) m.prefs[doctor(name)].ranking = ranking;
        m.finalize();
        std::vector<std::string> errs = validate_market(m);
        if (!errs.empty()) throw std::logic_error("builder produced an invalid market: " + errs[0]);
        return m;
    }
};

}  // namespace detail

struct Fixture {
    std::string name;
    Market market;
    // mechanism name -> frozen matching reached by deferred acceptance
    std::vector<std::pair<std::string, std::vector<int>>> expected;
};

// Three doctors, two hospitals, utilities equal to wages. No matching is
// stable at the posted budgets (10, 6): whoever h1 keeps, some affordable
// better-paid coalition is left wanting.
inline Fixture fixture_example1_nonexistence() {
    detail::MarketBuilder b;
    b.hospital("h1", Rat(10), UtilityKind::Proportional, Rat(1), "exact");
    b.hospital("h2", Rat(6), UtilityKind::Proportional, Rat(1), "exact");
    int c0 = b.contract("d1", "h1", Rat(9), Rat(9));
    int c1 = b.contract("d2", "h1", Rat(6), Rat(6));
    int c2 = b.contract("d3", "h1", Rat(4), Rat(4));
    int c3 = b.contract("d2", "h2", Rat(6), Rat(6));
    int c4 = b.contract("d3", "h2", Rat(4), Rat(4));
    b.prefs("d1", {c0});
    b.prefs("d2", {c1, c3});
    b.prefs("d3", {c4, c2});
    return {"example1-nonexistence", b.build(), {{"exact", {c0, c3}}}};
}

namespace detail {

// Five doctors, two hospitals; d1..d4 prefer h1, d5 prefers h2; h1's budget
// forces a choice among wage profiles 57/50/42/55/50.
inline MarketBuilder wage_competition_market(const std::string& mechanism) {
    MarketBuilder b;
    b.hospital("h1", Rat(100), UtilityKind::General, {}, mechanism);
    b.hospital("h2", Rat(100), UtilityKind::General, {}, mechanism);
    long long w1[] = {57, 50, 42, 55, 50};
    long long f1[] = {111, 98, 83, 110, 101};
    long long f2[] = {50, 30, 20, 10, 40};
    for (int i = 0; i < 5; ++i)
        b.contract("d" + std::to_string(i + 1), "h1", Rat(w1[i]), Rat(f1[i]));
    for (int i = 0; i < 5; ++i)
        b.contract("d" + std::to_string(i + 1), "h2", Rat(100), Rat(f2[i]));
    for (int i = 0; i < 4; ++i)
        b.prefs("d" + std::to_string(i + 1), {i, i + 5});
    b.prefs("d5", {9, 4});
    return b;
}

}  // namespace detail

inline Fixture fixture_example2_mech1() {
    detail::MarketBuilder b = detail::wage_competition_market("sp-greedy");
    return {"example2-mech1", b.build(), {{"sp-greedy", {2, 3, 4, 5}}}};
}

inline Fixture fixture_example3_mech2() {
    detail::MarketBuilder b = detail::wage_competition_market("budget-greedy");
    return {"example3-mech2", b.build(), {{"budget-greedy", {3, 4, 5}}}};
}

// Under budget-greedy, d3 gains by reversing her true ranking: truthfully she
// ends unmatched, misreporting h1 first gets her hired there.
inline Fixture fixture_nonsp_budget_greedy() {
    detail::MarketBuilder b;
    b.hospital("h1", Rat(2), UtilityKind::General, {}, "budget-greedy");
    b.hospital("h2", Rat(1), UtilityKind::General, {}, "budget-greedy");
    int c0 = b.contract("d1", "h1", Rat(1), Rat(1));
    int c1 = b.contract("d1", "h2", Rat(1), Rat(3));
    int c2 = b.contract("d2", "h1", Rat(2), Rat(10));
    int c3 = b.contract("d2", "h2", Rat(1), Rat(1));
    int c4 = b.contract("d3", "h1", Rat(1), Rat(1));
    int c5 = b.contract("d3", "h2", Rat(1), Rat(2));
    b.prefs("d1", {c0, c1});
    b.prefs("d2", {c3, c2});
    b.prefs("d3", {c5, c4});
    return {"nonsp-budget-greedy", b.build(), {{"budget-greedy", {c1, c2}}}};
}

// Both greedy mechanisms settle on the same matching here, yet d3 and d4
// would each rather swap hospitals with the other: the outcome is not
// doctor-optimal among stable ones.
inline Fixture fixture_doctoropt_greedy() {
    detail::MarketBuilder b;
    b.hospital("h1", Rat(2), UtilityKind::General, {}, "sp-greedy");
    b.hospital("h2", Rat(1), UtilityKind::General, {}, "sp-greedy");
    int c0 = b.contract("d1", "h1", Rat(1), Rat(7));
    int c1 = b.contract("d2", "h1", Rat(2), Rat(6));
    int c2 = b.contract("d3", "h1", Rat(1), Rat(1));
    int c3 = b.contract("d4", "h1", Rat(1), Rat(4));
    int c4 = b.contract("d3", "h2", Rat(1), Rat(2));
    int c5 = b.contract("d4", "h2", Rat(1), Rat(1));
    b.prefs("d1", {c0});
    b.prefs("d2", {c1});
    b.prefs("d3", {c2, c4});
    b.prefs("d4", {c5, c3});
    return {"doctoropt-greedy", b.build(),
            {{"sp-greedy", {c0, c3, c4}}, {"budget-greedy", {c0, c3, c4}}}};
}

// The wage profile of the competition market with utilities equal to wages:
// budget-greedy then violates the law of aggregate demand. Offering d1's
// expensive contract on top of {d2, d3, d4} shrinks the chosen set from
// three contracts to two.
inline Fixture fixture_lad_failure_budget_greedy() {
    detail::MarketBuilder b;
    b.hospital("h1", Rat(100), UtilityKind::Proportional, Rat(1), "budget-greedy");
    long long w[] = {57, 50, 42, 55, 50};
    for (int i = 0; i < 5; ++i) {
        std::string d = "d" + std::to_string(i + 1);
        b.contract(d, "h1", Rat(w[i]), Rat(w[i]));
        b.prefs(d, {i});
    }
    return {"lad-failure-budget-greedy", b.build(), {}};
}

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {
        "example1-nonexistence",  "example2-mech1",   "example3-mech2",
        "nonsp-budget-greedy",    "doctoropt-greedy", "lad-failure-budget-greedy",
    };
    return names;
}

inline Fixture get_fixture(const std::string& name) {
    if (name == "example1-nonexistence") return fixture_example1_nonexistence();
    if (name == "example2-mech1") return fixture_example2_mech1();
    if (name == "example3-mech2") return fixture_example3_mech2();
    if (name == "nonsp-budget-greedy") return fixture_nonsp_budget_greedy();
    if (name == "doctoropt-greedy") return fixture_doctoropt_greedy();
    if (name == "lad-failure-budget-greedy") return fixture_lad_failure_budget_greedy();
    std::string msg = "unknown fixture '" + name + "'; available:";
    for (const std::string& n : fixture_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

// Market family on m hospitals and m^2 doctors, every budget 1 and every wage
// at most beta, with no stable matching at any budget vector between the
// posted budgets and their (1 + alpha)-fold relaxation. Requires
// 0 < alpha < beta < 1 and m > 1/(beta - alpha) + 1/(1 - beta).
inline Market gen_nonexistence_family(int m, const Rat& alpha, const Rat& beta) {
    if (m < 2 || m > 30) throw std::invalid_argument("nonexistence family: need 2 <= m <= 30");
    if (!(alpha.sign() > 0 && alpha < beta && beta < Rat(1)))
        throw std::invalid_argument("nonexistence family: need 0 < alpha < beta < 1");
    if (!(Rat(m) > Rat(1) / (beta - alpha) + Rat(1) / (Rat(1) - beta)))
        throw std::invalid_argument(
            "nonexistence family: need m > 1/(beta-alpha) + 1/(1-beta)");
    detail::MarketBuilder b;
    std::string hm = "h" + std::to_string(m);
    for (int i = 1; i <= m; ++i) b.hospital("h" + std::to_string(i), Rat(1));
    auto dname = [](int i, int j) { return "d" + std::to_string(i) + "_" + std::to_string(j); };
    const Rat wm(1, m);
    const Rat spread = (Rat(1) - beta) / Rat(m - 1);
    auto pow2 = [](int e) { return Rat(1ll << e); };

    int star = b.contract("dstar", hm, beta, Rat(1));
    b.prefs("dstar", {star});
    for (int i = 1; i < m; ++i) {
        std::string hi = "h" + std::to_string(i);
        int away = b.contract(dname(i, 0), hm, wm, Rat(1, 1ll << i));
        int home = b.contract(dname(i, 0), hi, beta, pow2(m));
        b.prefs(dname(i, 0), {away, home});
    }
    for (int i = 1; i < m; ++i)
        for (int j = 1; j < m; ++j) {
            int c = b.contract(dname(i, j), "h" + std::to_string(i), spread, pow2(m - j));
            b.prefs(dname(i, j), {c});
        }
    for (int i = 1; i < m; ++i) {
        int home = b.contract(dname(i, m), "h" + std::to_string(i), beta, Rat(1));
        int away = b.contract(dname(i, m), hm, wm, pow2(m - i));
        b.prefs(dname(i, m), {home, away});
    }
    return b.build();
}

// Single hospital, k = floor(budget / w_low) cheap contracts worth their wage
// and k expensive ones worth twice theirs; the ratio scan then fills up on
// expensive contracts and overspends. Requires 0 < w_low <= w_high <= budget.
inline Market gen_overspend_family(const Rat& w_low, const Rat& w_high, const Rat& budget) {
    if (!(w_low.sign() > 0 && w_low <= w_high && w_high <= budget))
        throw std::invalid_argument("overspend family: need 0 < w_low <= w_high <= budget");
    long long k = floor_div(budget, w_low);
    detail::MarketBuilder b;
    b.hospital("h1", budget);
    for (long long i = 1; i <= 2 * k; ++i) {
        std::string d = "d" + std::to_string(i);
        int c = i <= k ? b.contract(d, "h1", w_low, w_low)
                       : b.contract(d, "h1", w_high, Rat(2) * w_high);
        b.prefs(d, {c});
    }
    return b.build();
}

struct GenParams {
    int doctors = 8;
    int hospitals = 3;
    int max_contracts_per_doctor = 3;
    long long wage_lo = 1, wage_hi = 20;     // numerators over wage_den
    long long budget_lo = 20, budget_hi = 60;
    long long wage_den = 1;
    UtilityKind kind = UtilityKind::General;
    bool distinct = true;  // distinct ratios (general) / distinct wages (prop, uniform)
    int per_hospital_cap = 10;
    int truncate_percent = 25;  // chance a doctor drops a suffix of her ranking
};

// Seeded random market. Uses only the raw engine stream (no distribution
// objects), so one seed yields one market on every platform.
inline Market gen_random(const GenParams& p, unsigned long long seed) {
    if (p.doctors < 1 || p.hospitals < 1 || p.max_contracts_per_doctor < 1 ||
        p.wage_lo < 1 || p.wage_lo > p.wage_hi || p.budget_lo > p.budget_hi ||
        p.budget_lo < p.wage_lo || p.wage_den < 1)
        throw std::invalid_argument("gen_random: inconsistent parameters");
    std::mt19937_64 rng(seed);
    auto draw = [&](long long lo, long long hi) {
        return lo + (long long)(rng() % (unsigned long long)(hi - lo + 1));
    };
    detail::MarketBuilder b;
    std::vector<long long> budget_num(p.hospitals);
    for (int h = 0; h < p.hospitals; ++h) {
        budget_num[h] = draw(p.budget_lo, p.budget_hi);
        std::optional<Rat> gamma;
        if (p.kind == UtilityKind::Proportional) gamma = Rat(draw(1, 4), draw(1, 2));
        if (p.kind == UtilityKind::Uniform) gamma = Rat(draw(1, 9));
        b.hospital("h" + std::to_string(h + 1), Rat(budget_num[h], p.wage_den), p.kind, gamma);
    }
    std::vector<int> load(p.hospitals, 0);
    std::vector<std::set<std::pair<long long, long long>>> ratios(p.hospitals);
    std::vector<std::set<long long>> wages(p.hospitals);
    std::set<std::tuple<int, int, long long>> triples;
    for (int d = 0; d < p.doctors; ++d) {
        std::string dn = "d" + std::to_string(d + 1);
        int want = (int)draw(1, p.max_contracts_per_doctor);
        std::vector<int> own;
        for (int t = 0; t < want; ++t) {
            int h = (int)draw(0, p.hospitals - 1);
            bool free = false;
            for (int probe = 0; probe < p.hospitals; ++probe, h = (h + 1) % p.hospitals)
                if (load[h] < p.per_hospital_cap) {
                    free = true;
                    break;
                }
            if (!free) break;
            long long wage_cap = std::min(p.wage_hi, budget_num[h]);
            long long w = 0;
            bool placed = false;
            for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
                w = draw(p.wage_lo, wage_cap);
                if (triples.count({d, h, w})) continue;
                if (p.distinct && p.kind != UtilityKind::General && wages[h].count(w)) continue;
                placed = true;
            }
            if (!placed) continue;
            triples.insert({d, h, w});
            wages[h].insert(w);
            Rat wage(w, p.wage_den);
            Rat util;
            const HospitalSpec& hs = b.m.hospitals[h];
            if (p.kind == UtilityKind::Proportional) {
                util = *hs.gamma * wage;
            } else if (p.kind == UtilityKind::Uniform) {
                util = *hs.gamma;
            } else {
                long long f = draw(1, 60);
                if (p.distinct) {
                    Rat r = Rat(f) / wage;
                    while (ratios[h].count({r.num(), r.den()})) {
                        ++f;
                        r = Rat(f) / wage;
                    }
                    ratios[h].insert({r.num(), r.den()});
                }
                util = Rat(f);
            }
            own.push_back(b.contract(dn, hs.name, wage, util));
            ++load[h];
        }
        // Preference order: a seeded shuffle, sometimes truncated.
        for (int i = (int)own.size() - 1; i > 0; --i)
            std::swap(own[i], own[draw(0, i)]);
        if (!own.empty() && draw(1, 100) <= p.truncate_percent)
            own.resize((size_t)draw(1, (long long)own.size()));
        b.prefs(dn, own);
    }
    return b.build();
}

}  // namespace budget_match
