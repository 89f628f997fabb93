#pragma once
// Verification oracles: blocking-coalition search, stability reports,
// chosen-set model checks (substitutability, irrelevance of rejected
// contracts, law of aggregate demand, budget-capped dominance), existence
// search over all matchings, misreport probing, and wage-bound checks.
//
// Everything here is exhaustive and exact over explicitly capped spaces;
// exceeding a cap throws CapExceeded rather than degrading to a heuristic.

#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>

#include "engine.hpp"

namespace budget_match {

struct BlockingWitness {
    int hospital = -1;
    std::vector<int> coalition;  // contract ids ascending
};

inline std::vector<Rat> market_budgets(const Market& m) {
    std::vector<Rat> b;
    for (const HospitalSpec& h : m.hospitals) b.push_back(h.budget);
    return b;
}

inline std::vector<Rat> inflated_budgets(const Market& m, const Rat& factor) {
    std::vector<Rat> b;
    for (const HospitalSpec& h : m.hospitals) b.push_back(h.budget * factor);
    return b;
}

// max(posted budget, wage actually spent): the smallest budget relaxation
// under which the given matching is feasible.
inline std::vector<Rat> implied_budgets(const Market& m, const Matching& mt) {
    std::vector<Rat> b;
    for (int h = 0; h < m.n_hospitals(); ++h)
        b.push_back(std::max(m.hospitals[h].budget, mt.hospital_wage[h]));
    return b;
}

namespace detail {

// First coalition from pool (scanned in ascending-id sequence order, one
// contract per doctor) whose wage fits the budget and whose utility strictly
// exceeds level. DFS preorder equals lexicographic order on id sequences, so
// the first hit is the lexicographically smallest witness.
inline std::optional<std::vector<int>> first_blocking_coalition(const Market& m,
                                                                const std::vector<int>& pool,
                                                                const Rat& level,
                                                                const Rat& budget) {
    const int n = (int)pool.size();
    std::vector<Rat> suffix(n + 1);
    for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + m.util(pool[i]);
    std::vector<char> used(m.n_doctors(), 0);
    std::vector<int> cur;
    std::optional<std::vector<int>> found;
    auto dfs = [&](auto&& self, int from, Rat w, Rat f) -> void {
        for (int j = from; j < n && !found; ++j) {
            if (f + suffix[j] <= level) return;  // no extension can exceed the level
            int c = pool[j];
            int d = m.contracts[c].doctor;
            if (used[d]) continue;
            if (w + m.wage(c) > budget) continue;
            cur.push_back(c);
            used[d] = 1;
            if (f + m.util(c) > level) {
                found = cur;
            } else {
                self(self, j + 1, w + m.wage(c), f + m.util(c));
            }
            used[d] = 0;
            cur.pop_back();
        }
    };
    dfs(dfs, 0, Rat(0), Rat(0));
    return found;
}

// Contracts at h a coalition could use against the current assignment:
// everything h currently holds plus contracts whose doctor strictly prefers
// them to her own assignment. assignment maps doctor -> contract id or -1.
inline std::vector<int> willing_pool(const Market& m, int h, const std::vector<int>& assignment) {
    std::vector<int> pool;
    for (int c : m.by_hospital[h]) {
        int d = m.contracts[c].doctor;
        if (assignment[d] == c || m.prefers(d, c, assignment[d])) pool.push_back(c);
    }
    return pool;
}

}  // namespace detail

// First blocking coalition against the matching at the given budgets, scanning
// hospitals in ascending order and coalitions in lexicographic id order.
inline std::optional<BlockingWitness> find_blocking(const Market& m, const Matching& mt,
                                                    const std::vector<Rat>& budgets,
                                                    int pool_cap = 20) {
    for (int h = 0; h < m.n_hospitals(); ++h) {
        std::vector<int> pool = detail::willing_pool(m, h, mt.of_doctor);
        if ((int)pool.size() > pool_cap)
            throw CapExceeded("blocking search: pool of " + std::to_string(pool.size()) +
                              " at " + m.hospitals[h].name + " exceeds cap " +
                              std::to_string(pool_cap));
        Rat level;
        for (int c : mt.contracts)
            if (m.contracts[c].hospital == h) level += m.util(c);
        if (auto coal = detail::first_blocking_coalition(m, pool, level, budgets[h]))
            return BlockingWitness{h, std::move(*coal)};
    }
    return std::nullopt;
}

struct HospitalStability {
    bool feasible = true;
    Rat implied_budget;
    Rat violation_ratio;  // spent wage / posted budget
};

struct StabilityReport {
    bool feasible = true;
    bool stable = false;
    std::optional<BlockingWitness> blocking;
    std::vector<HospitalStability> hospitals;
};

// Feasibility at the given budgets plus blocking-coalition absence.
inline StabilityReport check_stable(const Market& m, const Matching& mt,
                                    const std::vector<Rat>& budgets, int pool_cap = 20) {
    StabilityReport rep;
    for (int h = 0; h < m.n_hospitals(); ++h) {
        HospitalStability hs;
        hs.feasible = mt.hospital_wage[h] <= budgets[h];
        hs.implied_budget = std::max(m.hospitals[h].budget, mt.hospital_wage[h]);
        hs.violation_ratio = mt.hospital_wage[h] / m.hospitals[h].budget;
        rep.feasible = rep.feasible && hs.feasible;
        rep.hospitals.push_back(std::move(hs));
    }
    rep.blocking = find_blocking(m, mt, budgets, pool_cap);
    rep.stable = rep.feasible && !rep.blocking;
    return rep;
}

struct HmReport {
    bool stable = false;
    std::string failure;  // empty when stable
    int hospital = -1;
    std::vector<int> witness;  // recontracting set for a condition-(ii) failure
};

// Two-part stability on chosen sets: (i) the matching is a fixed point of both
// sides' choices; (ii) no hospital has an alternative set it would pick from
// its holdings plus that set, every contract of which its doctor (weakly, and
// the new ones strictly) wants. Enumerates subsets of each hospital's full
// contract list; first failure in (hospital, subset-mask) order is reported.
inline HmReport check_hm_stable(const Market& m, const std::vector<ChoiceKind>& kinds,
                                const Matching& mt, int pool_cap = 16,
                                int oracle_cap = kDefaultOracleCap) {
    HmReport rep;
    for (int c : mt.contracts)
        if (!m.acceptable(c)) {
            rep.failure = "doctor side: " + m.doctors[m.contracts[c].doctor] +
                          " holds an unacceptable contract";
            rep.witness = {c};
            return rep;
        }
    for (int h = 0; h < m.n_hospitals(); ++h) {
        std::vector<int> held;
        for (int c : mt.contracts)
            if (m.contracts[c].hospital == h) held.push_back(c);
        if (ch_hospital(m, h, held, kinds[h], oracle_cap) != held) {
            rep.failure = "hospital side: " + m.hospitals[h].name + " would drop contracts";
            rep.hospital = h;
            rep.witness = held;
            return rep;
        }
    }
    for (int h = 0; h < m.n_hospitals(); ++h) {
        const std::vector<int>& xh = m.by_hospital[h];
        const int n = (int)xh.size();
        if (n > pool_cap)
            throw CapExceeded("recontract search: pool of " + std::to_string(n) + " at " +
                              m.hospitals[h].name + " exceeds cap " + std::to_string(pool_cap));
        std::vector<int> held;
        for (int c : mt.contracts)
            if (m.contracts[c].hospital == h) held.push_back(c);
        for (uint32_t mask = 1; mask < (1u << n); ++mask) {
            std::vector<int> alt;
            for (int i = 0; i < n; ++i)
                if (mask >> i & 1) alt.push_back(xh[i]);
            if (alt == held) continue;
            std::vector<int> pool = held;
            for (int c : alt)
                if (std::find(pool.begin(), pool.end(), c) == pool.end()) pool.push_back(c);
            std::sort(pool.begin(), pool.end());
            if (ch_hospital(m, h, pool, kinds[h], oracle_cap) != alt) continue;
            // alt must also be what each of its doctors picks from her
            // matched contract plus her contracts in alt.
            bool doctors_agree = true;
            for (int c : alt) {
                int d = m.contracts[c].doctor;
                int best = mt.of_doctor[d];
                for (int c2 : alt)
                    if (m.contracts[c2].doctor == d && (best < 0 || m.prefers(d, c2, best)))
                        best = c2;
                if (best != c) {
                    doctors_agree = false;
                    break;
                }
            }
            if (!doctors_agree) continue;
            rep.failure = "recontract: " + m.hospitals[h].name +
                          " and willing doctors prefer an alternative set";
            rep.hospital = h;
            rep.witness = alt;
            return rep;
        }
    }
    rep.stable = true;
    return rep;
}

// ---- existence of stable matchings ----

// Every doctor takes one of her acceptable contracts (in preference order) or
// stays unmatched; wage-infeasible branches are cut; leaves are screened by
// the blocking search. Returns the first stable matching in this enumeration
// order or nothing when the whole space is unstable.
inline std::optional<Matching> exists_stable_exhaustive(const Market& m,
                                                        const std::vector<Rat>& budgets,
                                                        unsigned long long enum_cap = 10'000'000,
                                                        int pool_cap = 20) {
    unsigned long long product = 1;
    for (const DoctorPrefs& p : m.prefs) {
        product *= (unsigned long long)p.ranking.size() + 1;
        if (product > enum_cap)
            throw CapExceeded("existence search: assignment space exceeds cap " +
                              std::to_string(enum_cap));
    }
    std::vector<int> assign(m.n_doctors(), -1);
    std::vector<Rat> spent(m.n_hospitals());
    std::optional<Matching> found;
    auto dfs = [&](auto&& self, int d) -> void {
        if (found) return;
        if (d == m.n_doctors()) {
            std::vector<int> ids;
            for (int c : assign)
                if (c >= 0) ids.push_back(c);
            Matching mt = make_matching(m, ids);
            if (!find_blocking(m, mt, budgets, pool_cap)) found = std::move(mt);
            return;
        }
        for (int c : m.prefs[d].ranking) {
            int h = m.contracts[c].hospital;
            if (spent[h] + m.wage(c) > budgets[h]) continue;
            assign[d] = c;
            spent[h] += m.wage(c);
            self(self, d + 1);
            spent[h] -= m.wage(c);
            assign[d] = -1;
            if (found) return;
        }
        self(self, d + 1);
    };
    dfs(dfs, 0);
    return found;
}

enum class SearchVerdict { FoundStable, NoneExists, Inconclusive };

inline const char* verdict_name(SearchVerdict v) {
    switch (v) {
        case SearchVerdict::FoundStable: return "found";
        case SearchVerdict::NoneExists: return "none";
        case SearchVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct PrunedSearchResult {
    SearchVerdict verdict = SearchVerdict::Inconclusive;
    std::optional<Matching> matching;
    unsigned long long nodes = 0;
};

// Branch-and-prune existence search built to close larger instances: doctors
// are visited so that hospitals' contract pools complete as early as possible
// (hospitals ordered by pool size); when a pool completes, that hospital's
// blocking check runs immediately with every relevant assignment already
// fixed, and a hit kills the whole subtree. Wage-infeasible options are cut
// at assignment time. Runs until the space is exhausted or the deadline
// passes.
inline PrunedSearchResult exists_stable_pruned(const Market& m, const std::vector<Rat>& budgets,
                                               std::chrono::milliseconds time_budget,
                                               int pool_cap = 20) {
    const int nd = m.n_doctors(), nh = m.n_hospitals();
    std::vector<std::pair<int, int>> by_size;
    for (int h = 0; h < nh; ++h)
        if (!m.by_hospital[h].empty()) by_size.push_back({(int)m.by_hospital[h].size(), h});
    std::sort(by_size.begin(), by_size.end());
    std::vector<int> order;
    std::vector<char> placed(nd, 0);
    for (auto [sz, h] : by_size)
        for (int c : m.by_hospital[h]) {
            int d = m.contracts[c].doctor;
            if (!placed[d]) {
                placed[d] = 1;
                order.push_back(d);
            }
        }
    for (int d = 0; d < nd; ++d)
        if (!placed[d]) order.push_back(d);
    std::vector<int> pos(nd);
    for (int i = 0; i < nd; ++i) pos[order[i]] = i;
    // Position after which a hospital's pool is fully assigned; hospitals
    // without contracts can never be blocked and are skipped outright.
    std::vector<std::vector<int>> completes_at(nd);
    for (int h = 0; h < nh; ++h) {
        if (m.by_hospital[h].empty()) continue;
        int last = 0;
        for (int c : m.by_hospital[h]) last = std::max(last, pos[m.contracts[c].doctor]);
        completes_at[last].push_back(h);
    }

    std::vector<int> assign(nd, -1);
    std::vector<Rat> spent(nh), level(nh);
    PrunedSearchResult res;
    auto deadline = std::chrono::steady_clock::now() + time_budget;

    bool timed_out = false;
    auto walk = [&](auto&& self, int k) -> bool {
        if (++res.nodes % 1024 == 0 && std::chrono::steady_clock::now() > deadline) {
            timed_out = true;
            return false;
        }
        if (k == nd) {
            std::vector<int> ids;
            for (int c : assign)
                if (c >= 0) ids.push_back(c);
            res.matching = make_matching(m, ids);
            return true;
        }
        int d = order[k];
        auto try_option = [&](int c) -> bool {
            if (c >= 0) {
                int h = m.contracts[c].hospital;
                if (spent[h] + m.wage(c) > budgets[h]) return false;
                assign[d] = c;
                spent[h] += m.wage(c);
                level[h] += m.util(c);
            }
            bool dead = false;
            for (int h : completes_at[k]) {
                if (dead || timed_out) break;
                std::vector<int> pool = detail::willing_pool(m, h, assign);
                if ((int)pool.size() > pool_cap)
                    throw CapExceeded("existence search: pool at " + m.hospitals[h].name +
                                      " exceeds cap " + std::to_string(pool_cap));
                if (detail::first_blocking_coalition(m, pool, level[h], budgets[h])) dead = true;
            }
            bool ok = !dead && !timed_out && self(self, k + 1);
            if (c >= 0) {
                int h = m.contracts[c].hospital;
                spent[h] -= m.wage(c);
                level[h] -= m.util(c);
            }
            assign[d] = -1;
            return ok;
        };
        for (int c : m.prefs[d].ranking) {
            if (try_option(c)) return true;
            if (timed_out) return false;
        }
        return try_option(-1);
    };

    if (walk(walk, 0)) {
        res.verdict = SearchVerdict::FoundStable;
    } else if (timed_out) {
        res.verdict = SearchVerdict::Inconclusive;
    } else {
        res.verdict = SearchVerdict::NoneExists;
    }
    return res;
}

// ---- chosen-set model checks ----

enum class ChoiceProperty { Sub, Irc, Lad, Com };

inline const char* property_name(ChoiceProperty p) {
    switch (p) {
        case ChoiceProperty::Sub: return "sub";
        case ChoiceProperty::Irc: return "irc";
        case ChoiceProperty::Lad: return "lad";
        case ChoiceProperty::Com: return "com";
    }
    return "?";
}

inline std::optional<ChoiceProperty> parse_property(const std::string& s) {
    for (ChoiceProperty p : {ChoiceProperty::Sub, ChoiceProperty::Irc, ChoiceProperty::Lad,
                             ChoiceProperty::Com})
        if (s == property_name(p)) return p;
    return std::nullopt;
}

struct PropertyReport {
    ChoiceProperty property = ChoiceProperty::Sub;
    bool holds = true;
    unsigned long long cases = 0;
    // (larger set, smaller/added set) of the first violation found
    std::optional<std::pair<std::vector<int>, std::vector<int>>> witness;
};

// Exhaustive check of one structural property of a hospital's choice function
// over every subset pair of its full contract list.
//   sub: a contract rejected from a set stays rejected in every superset
//   irc: removing never-chosen contracts leaves the choice unchanged
//   lad: a larger offer set never yields a smaller chosen set
//   com: the chosen set's utility weakly beats every alternative subset whose
//        wage fits max(budget, chosen wage)
inline PropertyReport check_property(const Market& m, int h, ChoiceKind kind, ChoiceProperty prop,
                                     int size_cap = 12, int oracle_cap = kDefaultOracleCap) {
    PropertyReport rep;
    rep.property = prop;
    const std::vector<int>& xh = m.by_hospital[h];
    const int n = (int)xh.size();
    if (n > size_cap)
        throw CapExceeded("property check: pool of " + std::to_string(n) + " at " +
                          m.hospitals[h].name + " exceeds cap " + std::to_string(size_cap));
    const uint32_t full = n == 32 ? ~0u : (1u << n) - 1;
    std::vector<int> idx_of(m.n_contracts(), -1);
    for (int i = 0; i < n; ++i) idx_of[xh[i]] = i;
    auto to_ids = [&](uint32_t mask) {
        std::vector<int> ids;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1) ids.push_back(xh[i]);
        return ids;
    };
    std::vector<uint32_t> ch(full + 1u, 0);
    std::vector<Rat> wsum(full + 1u), fsum(full + 1u);
    std::vector<int> chn(full + 1u, 0);
    for (uint32_t mask = 1; mask <= full; ++mask) {
        uint32_t low = mask & (~mask + 1);
        int i = std::countr_zero(low);
        wsum[mask] = wsum[mask ^ low] + m.wage(xh[i]);
        fsum[mask] = fsum[mask ^ low] + m.util(xh[i]);
        uint32_t cmask = 0;
        for (int c : ch_hospital(m, h, to_ids(mask), kind, oracle_cap)) cmask |= 1u << idx_of[c];
        ch[mask] = cmask;
        chn[mask] = std::popcount(cmask);
    }
    auto fail = [&](uint32_t big, uint32_t small) {
        rep.holds = false;
        rep.witness = {to_ids(big), to_ids(small)};
    };
    const Rat& B = m.hospitals[h].budget;
    for (uint32_t big = 0; big <= full && rep.holds; ++big) {
        if (prop == ChoiceProperty::Irc) {
            uint32_t rest = full & ~big;
            for (uint32_t add = rest;; add = (add - 1) & rest) {
                ++rep.cases;
                uint32_t u = big | add;
                if ((ch[u] & ~big) == 0 && ch[u] != ch[big]) {
                    fail(big, add);
                    break;
                }
                if (add == 0) break;
            }
        } else {
            for (uint32_t sub = big;; sub = (sub - 1) & big) {
                ++rep.cases;
                bool bad = false;
                switch (prop) {
                    case ChoiceProperty::Sub:
                        bad = ((sub & ~ch[sub]) & ~(big & ~ch[big])) != 0;
                        break;
                    case ChoiceProperty::Lad:
                        bad = chn[sub] > chn[big];
                        break;
                    case ChoiceProperty::Com:
                        bad = wsum[sub] <= std::max(B, wsum[ch[big]]) &&
                              fsum[ch[big]] < fsum[sub];
                        break;
                    case ChoiceProperty::Irc: break;
                }
                if (bad) {
                    fail(big, sub);
                    break;
                }
                if (sub == 0) break;
            }
        }
    }
    return rep;
}

// ---- strategy-proofness probing ----

struct SpWitness {
    int doctor = -1;
    std::vector<int> misreport;      // the ranking submitted instead
    int truthful_outcome = -1;       // contract id or -1
    int manipulated_outcome = -1;
};

// Tries every strict order over every nonempty subset of the doctor's
// contracts as a misreport and looks for an outcome she strictly prefers
// under her true ranking. Returns the first improving misreport (subsets in
// ascending mask order, orders in lexicographic permutation order).
inline std::optional<SpWitness> probe_strategyproof(const Market& m,
                                                    const std::vector<ChoiceKind>& kinds, int d,
                                                    int contract_cap = 5,
                                                    int oracle_cap = kDefaultOracleCap) {
    const std::vector<int>& own = m.by_doctor[d];
    const int n = (int)own.size();
    if (n > contract_cap)
        throw CapExceeded("misreport probe: doctor " + m.doctors[d] + " has " +
                          std::to_string(n) + " contracts, cap " + std::to_string(contract_cap));
    int truthful = run_da(m, kinds, false, oracle_cap).matching.of_doctor[d];
    Market alt = m;
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> base;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1) base.push_back(own[i]);
        std::sort(base.begin(), base.end());
        do {
            alt.prefs[d].ranking = base;
            alt.finalize();
            int got = run_da(alt, kinds, false, oracle_cap).matching.of_doctor[d];
            if (m.prefers(d, got, truthful))
                return SpWitness{d, base, truthful, got};
        } while (std::next_permutation(base.begin(), base.end()));
    }
    return std::nullopt;
}

// ---- wage-bound compliance ----

struct BoundRow {
    int hospital = -1;
    Rat bound;
    Rat actual;
    bool strict = false;  // actual < bound required instead of <=
    bool ok = true;
};

struct BoundsReport {
    bool all_ok = true;
    std::vector<BoundRow> rows;
};

// Per-hospital spending against the mechanism's proven worst case:
//   sp-greedy      <= w_max * ceil(B / w_min)
//   budget-greedy  <  B + w_max
//   prop-sp        <  B + w_max
//   prop-15        <= 1.5 * B
//   equal-util     <= B
//   exact          <= B
inline BoundsReport check_bounds(const Market& m, ChoiceKind kind, const Matching& mt) {
    BoundsReport rep;
    for (int h = 0; h < m.n_hospitals(); ++h) {
        BoundRow row;
        row.hospital = h;
        row.actual = mt.hospital_wage[h];
        const Rat& B = m.hospitals[h].budget;
        switch (kind) {
            case ChoiceKind::GreedyCapped:
                row.bound = m.w_max[h] * Rat(m.cap_k[h]);
                break;
            case ChoiceKind::GreedyBudget:
            case ChoiceKind::PropSp:
                row.bound = B + m.w_max[h];
                row.strict = true;
                break;
            case ChoiceKind::Prop15:
                row.bound = Rat(3, 2) * B;
                break;
            case ChoiceKind::EqualUtil:
            case ChoiceKind::Exact:
                row.bound = B;
                break;
        }
        if (m.by_hospital[h].empty()) row.bound = std::max(row.bound, B);
        row.ok = row.strict ? row.actual < row.bound : row.actual <= row.bound;
        rep.all_ok = rep.all_ok && row.ok;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace budget_match
