#pragma once
// Doctor-proposing deferred acceptance over contracts.
//
// run_da is the reference loop: each round every unrejected doctor proposes
// her best remaining contract, each hospital applies its choice function to
// the offers it holds, and rejections accumulate until a round rejects
// nothing. Any choice-function mix is accepted, including the exact oracle.
//
// run_da_incremental replays the same rounds without recomputing choices from
// scratch. Each hospital keeps its full contract list pre-sorted in its
// mechanism's scan order with a Fenwick tree over active (currently offered)
// entries; the chosen set of the five greedy mechanisms is always a prefix of
// that order (plus the max-wage entry for the two mechanisms that pin it), so
// one logarithmic descent finds the cut and everything past it is rejected
// for good. Each contract is inserted at most once and evicted at most once,
// which gives O(|X| log |X|) tree work overall. Both engines produce
// identical matchings and round counts; the incremental one rejects the exact
// mechanism, whose choice is not a scan prefix.

#include <bit>
#include <set>
#include <utility>
#include <vector>

#include "choice.hpp"

namespace budget_match {

struct DaRound {
    std::vector<int> proposed;  // offers on the table this round
    std::vector<int> chosen;    // held after hospital choices
    std::vector<int> rejected;  // newly rejected this round
};

struct DaTrace {
    int rounds = 0;
    std::vector<DaRound> log;  // filled only when trace retention is on
};

struct DaResult {
    Matching matching;
    DaTrace trace;
};

struct EngineStats {
    unsigned long long comparisons = 0;  // key comparisons plus tree node visits
};

inline DaResult run_da(const Market& m, const std::vector<ChoiceKind>& kinds,
                       bool keep_trace = true, int oracle_cap = kDefaultOracleCap) {
    if ((int)kinds.size() != m.n_hospitals())
        throw std::invalid_argument("run_da: one mechanism per hospital required");
    for (int h = 0; h < m.n_hospitals(); ++h) require_applicable(m, h, kinds[h]);
    std::vector<char> available(m.n_contracts(), 1);
    DaResult res;
    for (int round = 1;; ++round) {
        if (round > m.n_contracts() + 1)
            throw EngineGuard("proposal rounds exceeded the contract-count bound");
        std::vector<int> y;
        for (int d = 0; d < m.n_doctors(); ++d)
            if (auto c = ch_doctor(m, d, available)) y.push_back(*c);
        std::sort(y.begin(), y.end());
        std::vector<int> z = ch_hospitals(m, kinds, y, oracle_cap);
        for (int c : z)
            if (!std::binary_search(y.begin(), y.end(), c))
                throw EngineGuard("choice function returned a contract it was not offered");
        std::vector<int> rejected;
        std::set_difference(y.begin(), y.end(), z.begin(), z.end(), std::back_inserter(rejected));
        res.trace.rounds = round;
        if (keep_trace) res.trace.log.push_back({std::move(y), z, rejected});
        if (rejected.empty()) {
            res.matching = make_matching(m, z);
            return res;
        }
        for (int c : rejected) available[c] = 0;
    }
}

namespace detail {

// Fenwick tree over fixed slots; an active slot contributes its wage and a
// count of one. Positions are 0-based outside, 1-based internally.
struct Fenwick {
    int n = 0;
    std::vector<Rat> wsum;
    std::vector<int> csum;
    EngineStats* stats = nullptr;

    void init(int size, EngineStats* s) {
        n = size;
        stats = s;
        wsum.assign(n + 1, Rat(0));
        csum.assign(n + 1, 0);
    }
    void add(int pos, const Rat& w, int c) {
        for (int i = pos + 1; i <= n; i += i & -i) {
            wsum[i] += w;
            csum[i] += c;
            ++stats->comparisons;
        }
    }
    // Longest slot prefix whose active wage total stays below (strict) or at
    // (non-strict) target; returns {prefix length, actives inside it}.
    std::pair<int, int> wage_prefix(const Rat& target, bool strict) {
        int pos = 0, cnt = 0;
        Rat acc;
        for (int bit = n ? (int)std::bit_floor((unsigned)n) : 0; bit; bit >>= 1) {
            int next = pos + bit;
            if (next <= n) {
                Rat cand = acc + wsum[next];
                if (strict ? cand < target : cand <= target) {
                    pos = next;
                    cnt += csum[next];
                    acc = std::move(cand);
                }
            }
            ++stats->comparisons;
        }
        return {pos, cnt};
    }
    // Longest slot prefix containing at most k active entries.
    int count_prefix(long long k) {
        int pos = 0;
        long long cnt = 0;
        for (int bit = n ? (int)std::bit_floor((unsigned)n) : 0; bit; bit >>= 1) {
            int next = pos + bit;
            if (next <= n && cnt + csum[next] <= k) {
                pos = next;
                cnt += csum[next];
            }
            ++stats->comparisons;
        }
        return pos;
    }
};

struct IncHospital {
    std::vector<int> slot;  // slot -> contract id, in the mechanism's scan order
    Fenwick fw;
    std::set<int> active;
};

}  // namespace detail

inline DaResult run_da_incremental(const Market& m, const std::vector<ChoiceKind>& kinds,
                                   bool keep_trace = false, EngineStats* stats = nullptr) {
    if ((int)kinds.size() != m.n_hospitals())
        throw std::invalid_argument("run_da_incremental: one mechanism per hospital required");
    EngineStats local;
    if (!stats) stats = &local;
    for (int h = 0; h < m.n_hospitals(); ++h) {
        require_applicable(m, h, kinds[h]);
        if (kinds[h] == ChoiceKind::Exact)
            throw std::invalid_argument(
                "run_da_incremental: the exact mechanism has no scan order; use run_da");
    }

    std::vector<detail::IncHospital> st(m.n_hospitals());
    std::vector<int> pos_of(m.n_contracts(), -1);
    for (int h = 0; h < m.n_hospitals(); ++h) {
        std::vector<int> order = m.by_hospital[h];
        bool by_ratio = kinds[h] == ChoiceKind::GreedyCapped || kinds[h] == ChoiceKind::GreedyBudget;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            ++stats->comparisons;
            if (by_ratio) {
                Rat l = m.util(a) * m.wage(b), r = m.util(b) * m.wage(a);
                if (l != r) return l > r;
            } else if (m.wage(a) != m.wage(b)) {
                return m.wage(a) < m.wage(b);
            }
            return a < b;
        });
        for (int i = 0; i < (int)order.size(); ++i) pos_of[order[i]] = i;
        st[h].slot = std::move(order);
        st[h].fw.init((int)st[h].slot.size(), stats);
    }

    std::vector<int> cursor(m.n_doctors(), 0);
    std::vector<int> proposal(m.n_doctors(), -1);
    std::vector<char> rejected(m.n_contracts(), 0);
    std::vector<char> touched_flag(m.n_hospitals(), 0);
    std::vector<int> pending(m.n_doctors());
    for (int d = 0; d < m.n_doctors(); ++d) pending[d] = d;

    DaResult res;
    for (int round = 1;; ++round) {
        if (round > m.n_contracts() + 1)
            throw EngineGuard("proposal rounds exceeded the contract-count bound");
        std::vector<int> touched;
        for (int d : pending) {
            const std::vector<int>& rk = m.prefs[d].ranking;
            while (cursor[d] < (int)rk.size() && rejected[rk[cursor[d]]]) {
                ++cursor[d];
                ++stats->comparisons;
            }
            if (cursor[d] == (int)rk.size()) continue;
            int c = rk[cursor[d]];
            proposal[d] = c;
            int h = m.contracts[c].hospital;
            st[h].fw.add(pos_of[c], m.wage(c), +1);
            st[h].active.insert(pos_of[c]);
            if (!touched_flag[h]) {
                touched_flag[h] = 1;
                touched.push_back(h);
            }
        }
        pending.clear();

        std::vector<int> y;
        if (keep_trace) {
            for (int d = 0; d < m.n_doctors(); ++d)
                if (proposal[d] >= 0) y.push_back(proposal[d]);
            std::sort(y.begin(), y.end());
        }

        std::vector<int> evicted;
        for (int h : touched) {
            touched_flag[h] = 0;
            detail::IncHospital& S = st[h];
            const Rat& B = m.hospitals[h].budget;
            std::vector<int> out;  // slots to clear
            auto collect_from = [&](std::set<int>::iterator it, int skip) {
                for (; it != S.active.end(); ++it)
                    if (*it != skip) out.push_back(*it);
            };
            switch (kinds[h]) {
                case ChoiceKind::GreedyCapped: {
                    if ((long long)S.active.size() <= m.cap_k[h]) break;
                    int p = S.fw.count_prefix(m.cap_k[h]);
                    collect_from(S.active.lower_bound(p), -1);
                    break;
                }
                case ChoiceKind::GreedyBudget: {
                    auto [p, cnt] = S.fw.wage_prefix(B, true);
                    auto it = S.active.lower_bound(p);
                    if (it != S.active.end()) ++it;  // first entry at the cut overshoots but is kept
                    collect_from(it, -1);
                    break;
                }
                case ChoiceKind::PropSp: {
                    auto [p, cnt] = S.fw.wage_prefix(B, true);
                    collect_from(S.active.lower_bound(p), *S.active.rbegin());
                    break;
                }
                case ChoiceKind::Prop15: {
                    int pmax = *S.active.rbegin();
                    Rat target = Rat(3, 2) * B - m.wage(S.slot[pmax]);
                    auto [p, cnt] = S.fw.wage_prefix(target, true);
                    collect_from(S.active.lower_bound(p), pmax);
                    break;
                }
                case ChoiceKind::EqualUtil: {
                    auto [p, cnt] = S.fw.wage_prefix(B, false);
                    collect_from(S.active.lower_bound(p), -1);
                    break;
                }
                case ChoiceKind::Exact: break;  // rejected above
            }
            for (int p : out) {
                int c = S.slot[p];
                S.fw.add(p, -m.wage(c), -1);
                S.active.erase(p);
                rejected[c] = 1;
                proposal[m.contracts[c].doctor] = -1;
                pending.push_back(m.contracts[c].doctor);
                evicted.push_back(c);
            }
        }

        res.trace.rounds = round;
        bool settled = evicted.empty();
        if (keep_trace) {
            std::sort(evicted.begin(), evicted.end());
            std::vector<int> z;
            std::set_difference(y.begin(), y.end(), evicted.begin(), evicted.end(),
                                std::back_inserter(z));
            res.trace.log.push_back({std::move(y), std::move(z), std::move(evicted)});
        }
        if (settled) break;
    }

    std::vector<int> z;
    for (int d = 0; d < m.n_doctors(); ++d)
        if (proposal[d] >= 0) z.push_back(proposal[d]);
    res.matching = make_matching(m, z);
    return res;
}

}  // namespace budget_match
