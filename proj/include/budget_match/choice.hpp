#pragma once
// Hospital-side choice functions over contract sets, and the doctor-side
// best-available choice.
//
// Every function is a pure function of (market, hospital, xs): each internal
// order breaks ties by ascending contract id, so equal ratios or wages never
// make the result depend on input order. Results come back sorted by id.
//
//   exact          argmax of total utility under the budget (knapsack oracle)
//   sp-greedy      top ceil(B/w_min) contracts by utility per wage
//   budget-greedy  descending utility per wage while total stays below B
//   prop-sp        ascending wage, keep while strictly under B, plus the max
//   prop-15        the max first, then ascending wage while under 1.5 * B
//   equal-util     ascending wage while the total stays at most B
//
// prop-sp / prop-15 require proportional utilities, equal-util uniform ones;
// violations throw std::invalid_argument.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace budget_match {

enum class ChoiceKind { Exact, GreedyCapped, GreedyBudget, PropSp, Prop15, EqualUtil };

inline constexpr int kDefaultOracleCap = 22;

inline const char* choice_kind_name(ChoiceKind k) {
    switch (k) {
        case ChoiceKind::Exact: return "exact";
        case ChoiceKind::GreedyCapped: return "sp-greedy";
        case ChoiceKind::GreedyBudget: return "budget-greedy";
        case ChoiceKind::PropSp: return "prop-sp";
        case ChoiceKind::Prop15: return "prop-15";
        case ChoiceKind::EqualUtil: return "equal-util";
    }
    return "?";
}

inline std::optional<ChoiceKind> parse_choice_kind(const std::string& s) {
    for (ChoiceKind k : {ChoiceKind::Exact, ChoiceKind::GreedyCapped, ChoiceKind::GreedyBudget,
                         ChoiceKind::PropSp, ChoiceKind::Prop15, ChoiceKind::EqualUtil})
        if (s == choice_kind_name(k)) return k;
    return std::nullopt;
}

inline bool kind_applicable(ChoiceKind k, UtilityKind u) {
    switch (k) {
        case ChoiceKind::PropSp:
        case ChoiceKind::Prop15: return u == UtilityKind::Proportional;
        case ChoiceKind::EqualUtil: return u == UtilityKind::Uniform;
        default: return true;
    }
}

inline void require_applicable(const Market& m, int h, ChoiceKind k) {
    if (!kind_applicable(k, m.hospitals[h].kind))
        throw std::invalid_argument(std::string("mechanism ") + choice_kind_name(k) +
                                    " is not applicable to " +
                                    utility_kind_name(m.hospitals[h].kind) + " utilities at " +
                                    m.hospitals[h].name);
}

// The doctor's most preferred contract among those still available, if any.
inline std::optional<int> ch_doctor(const Market& m, int d, const std::vector<char>& available) {
    for (int c : m.prefs[d].ranking)
        if (available[c]) return c;
    return std::nullopt;
}

inline std::optional<int> ch_doctor(const Market& m, int d, const std::vector<int>& xs) {
    std::vector<char> avail(m.n_contracts(), 0);
    for (int c : xs) avail[c] = 1;
    return ch_doctor(m, d, avail);
}

namespace detail {

inline void check_pool(const Market& m, int h, const std::vector<int>& xs) {
    for (int c : xs)
        if (m.contracts[c].hospital != h)
            throw std::invalid_argument("choice: contract " + std::to_string(c) +
                                        " does not belong to hospital " + m.hospitals[h].name);
}

// f_a / w_a > f_b / w_b via cross multiplication; ties by ascending id.
inline std::vector<int> ratio_desc(const Market& m, std::vector<int> xs) {
    std::sort(xs.begin(), xs.end(), [&](int a, int b) {
        Rat l = m.util(a) * m.wage(b), r = m.util(b) * m.wage(a);
        if (l != r) return l > r;
        return a < b;
    });
    return xs;
}

inline std::vector<int> wage_asc(const Market& m, std::vector<int> xs) {
    std::sort(xs.begin(), xs.end(), [&](int a, int b) {
        if (m.wage(a) != m.wage(b)) return m.wage(a) < m.wage(b);
        return a < b;
    });
    return xs;
}

inline std::vector<int> by_id(std::vector<int> xs) {
    std::sort(xs.begin(), xs.end());
    return xs;
}

}  // namespace detail

// Budget-feasible utility maximizer; among maximizers, the one whose sorted id
// sequence is lexicographically smallest. Branch and bound over descending
// ratio order with an exact fractional-relaxation bound; subtrees are cut only
// when the bound is strictly below the incumbent, so lexicographic ties are
// never lost.
inline std::vector<int> ch_exact(const Market& m, int h, const std::vector<int>& xs,
                                 int cap = kDefaultOracleCap) {
    detail::check_pool(m, h, xs);
    if ((int)xs.size() > cap)
        throw CapExceeded("exact choice: pool of " + std::to_string(xs.size()) +
                          " exceeds cap " + std::to_string(cap));
    const Rat B = m.hospitals[h].budget;
    std::vector<int> order = detail::ratio_desc(m, xs);
    const int n = (int)order.size();

    Rat best_f;
    std::vector<int> best;  // sorted ids
    std::vector<int> cur;

    auto consider = [&](const Rat& f) {
        if (f < best_f) return;
        std::vector<int> ids = detail::by_id(cur);
        if (f > best_f ||
            std::lexicographical_compare(ids.begin(), ids.end(), best.begin(), best.end())) {
            best_f = f;
            best = std::move(ids);
        }
    };

    auto dfs = [&](auto&& self, int i, Rat w, Rat f) -> void {
        if (i == n) {
            consider(f);
            return;
        }
        // Fractional bound on what the remaining items can still add.
        Rat bound = f, room = B - w;
        for (int j = i; j < n; ++j) {
            const Rat& wj = m.wage(order[j]);
            if (wj <= room) {
                bound += m.util(order[j]);
                room -= wj;
            } else {
                if (room.sign() > 0) bound += m.util(order[j]) / wj * room;
                break;
            }
        }
        if (bound < best_f) return;
        int c = order[i];
        if (w + m.wage(c) <= B) {
            cur.push_back(c);
            self(self, i + 1, w + m.wage(c), f + m.util(c));
            cur.pop_back();
        }
        self(self, i + 1, w, f);
    };
    dfs(dfs, 0, Rat(0), Rat(0));
    return best;
}

// Top min(k, |xs|) contracts by descending utility per wage, where
// k = ceil(budget / w_min) is fixed by the hospital's full contract set.
inline std::vector<int> ch_greedy_capped(const Market& m, int h, const std::vector<int>& xs) {
    detail::check_pool(m, h, xs);
    std::vector<int> order = detail::ratio_desc(m, xs);
    size_t k = std::min<size_t>(order.size(), (size_t)std::max<long long>(m.cap_k[h], 0));
    order.resize(k);
    return detail::by_id(order);
}

// Scan descending utility per wage, adding while the running total is still
// strictly below the budget; the last accepted contract may overshoot.
inline std::vector<int> ch_greedy_budget(const Market& m, int h, const std::vector<int>& xs) {
    detail::check_pool(m, h, xs);
    std::vector<int> picked;
    Rat w;
    for (int c : detail::ratio_desc(m, xs)) {
        if (w < m.hospitals[h].budget) {
            picked.push_back(c);
            w += m.wage(c);
        }
    }
    return detail::by_id(picked);
}

// Ascending wage over all but the most expensive contract, adding while the
// total including the candidate stays strictly below the budget; the most
// expensive contract is always taken.
inline std::vector<int> ch_prop_sp(const Market& m, int h, const std::vector<int>& xs) {
    require_applicable(m, h, ChoiceKind::PropSp);
    detail::check_pool(m, h, xs);
    if (xs.empty()) return {};
    std::vector<int> order = detail::wage_asc(m, xs);
    std::vector<int> picked;
    Rat w;
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        if (w + m.wage(order[i]) < m.hospitals[h].budget) {
            picked.push_back(order[i]);
            w += m.wage(order[i]);
        }
    }
    picked.push_back(order.back());
    return detail::by_id(picked);
}

// The most expensive contract first, then ascending wage while the total
// including the candidate stays strictly below 1.5 * budget.
inline std::vector<int> ch_prop_15(const Market& m, int h, const std::vector<int>& xs) {
    require_applicable(m, h, ChoiceKind::Prop15);
    detail::check_pool(m, h, xs);
    if (xs.empty()) return {};
    std::vector<int> order = detail::wage_asc(m, xs);
    std::vector<int> picked{order.back()};
    Rat w = m.wage(order.back());
    const Rat line = Rat(3, 2) * m.hospitals[h].budget;
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        if (w + m.wage(order[i]) < line) {
            picked.push_back(order[i]);
            w += m.wage(order[i]);
        }
    }
    return detail::by_id(picked);
}

// Ascending wage, adding while the total including the candidate stays within
// the budget; never exceeds it.
inline std::vector<int> ch_equal_util(const Market& m, int h, const std::vector<int>& xs) {
    require_applicable(m, h, ChoiceKind::EqualUtil);
    detail::check_pool(m, h, xs);
    std::vector<int> picked;
    Rat w;
    for (int c : detail::wage_asc(m, xs)) {
        if (w + m.wage(c) <= m.hospitals[h].budget) {
            picked.push_back(c);
            w += m.wage(c);
        }
    }
    return detail::by_id(picked);
}

inline std::vector<int> ch_hospital(const Market& m, int h, const std::vector<int>& xs,
                                    ChoiceKind kind, int oracle_cap = kDefaultOracleCap) {
    switch (kind) {
        case ChoiceKind::Exact: return ch_exact(m, h, xs, oracle_cap);
        case ChoiceKind::GreedyCapped: return ch_greedy_capped(m, h, xs);
        case ChoiceKind::GreedyBudget: return ch_greedy_budget(m, h, xs);
        case ChoiceKind::PropSp: return ch_prop_sp(m, h, xs);
        case ChoiceKind::Prop15: return ch_prop_15(m, h, xs);
        case ChoiceKind::EqualUtil: return ch_equal_util(m, h, xs);
    }
    throw std::invalid_argument("unknown choice kind");
}

// Union of per-hospital choices from ys; kinds is indexed by hospital.
inline std::vector<int> ch_hospitals(const Market& m, const std::vector<ChoiceKind>& kinds,
                                     const std::vector<int>& ys,
                                     int oracle_cap = kDefaultOracleCap) {
    std::vector<std::vector<int>> pool(m.n_hospitals());
    for (int c : ys) pool[m.contracts[c].hospital].push_back(c);
    std::vector<int> out;
    for (int h = 0; h < m.n_hospitals(); ++h) {
        if (pool[h].empty()) continue;
        for (int c : ch_hospital(m, h, pool[h], kinds[h], oracle_cap)) out.push_back(c);
    }
    return detail::by_id(out);
}

}  // namespace budget_match
