#include <doctest.h>

#include <chrono>
#include <random>

#include <budget_match/engine.hpp>
#include <budget_match/instances.hpp>
#include <budget_match/verify.hpp>

using namespace budget_match;

namespace {

std::vector<ChoiceKind> all_kinds(const Market& m, ChoiceKind k) {
    return std::vector<ChoiceKind>(m.n_hospitals(), k);
}

Market one_hospital(const Rat& budget, const std::vector<std::pair<Rat, Rat>>& wage_util,
                    UtilityKind kind = UtilityKind::General, std::optional<Rat> gamma = {}) {
    detail::MarketBuilder b;
    b.hospital("h1", budget, kind, gamma);
    for (size_t i = 0; i < wage_util.size(); ++i) {
        std::string d = "d" + std::to_string(i + 1);
        int c = b.contract(d, "h1", wage_util[i].first, wage_util[i].second);
        b.prefs(d, {c});
    }
    return b.build();
}

}  // namespace

TEST_CASE("budget vectors: posted, inflated, implied") {
    Market m = fixture_example2_mech1().market;
    CHECK(market_budgets(m) == std::vector<Rat>{Rat(100), Rat(100)});
    CHECK(inflated_budgets(m, Rat(11, 10)) == std::vector<Rat>{Rat(110), Rat(110)});
    Matching mt = run_da(m, all_kinds(m, ChoiceKind::GreedyCapped)).matching;
    CHECK(implied_budgets(m, mt) == std::vector<Rat>{Rat(147), Rat(100)});
}

TEST_CASE("blocking search on the no-stable-matching market") {
    Market m = fixture_example1_nonexistence().market;
    Matching mt = run_da(m, all_kinds(m, ChoiceKind::Exact)).matching;
    CHECK(mt.contracts == std::vector<int>{0, 3});

    StabilityReport rep = check_stable(m, mt, market_budgets(m));
    CHECK(rep.feasible);
    CHECK(!rep.stable);
    REQUIRE(rep.blocking.has_value());
    CHECK(rep.blocking->hospital == 0);  // d2 and d3 under-bid d1 at h1: 6+4 <= 10, 10 > 9
    CHECK(rep.blocking->coalition == std::vector<int>{1, 2});
    CHECK(rep.hospitals[0].violation_ratio == Rat(9, 10));
    CHECK(rep.hospitals[1].violation_ratio == Rat(1));
    CHECK(rep.hospitals[0].implied_budget == Rat(10));

    CHECK_THROWS_AS(find_blocking(m, mt, market_budgets(m), 1), CapExceeded);
}

TEST_CASE("chosen-set stability splits into fixed point and recontracting") {
    Market m = fixture_example1_nonexistence().market;
    Matching mt = run_da(m, all_kinds(m, ChoiceKind::Exact)).matching;
    HmReport hm = check_hm_stable(m, all_kinds(m, ChoiceKind::Exact), mt);
    CHECK(!hm.stable);
    CHECK(hm.hospital == 0);
    CHECK(hm.witness == std::vector<int>{1, 2});
    CHECK(hm.failure.substr(0, 10) == "recontract");

    Market m2 = fixture_example2_mech1().market;
    Matching mt2 = run_da(m2, all_kinds(m2, ChoiceKind::GreedyCapped)).matching;
    HmReport hm2 = check_hm_stable(m2, all_kinds(m2, ChoiceKind::GreedyCapped), mt2);
    CHECK(hm2.stable);
    CHECK(hm2.failure.empty());

    // A matching the hospital itself would shrink fails the fixed-point part.
    Matching fat = make_matching(m2, {0, 1, 2, 3});
    HmReport hm3 = check_hm_stable(m2, all_kinds(m2, ChoiceKind::GreedyCapped), fat);
    CHECK(!hm3.stable);
    CHECK(hm3.failure.substr(0, 13) == "hospital side");
    CHECK(hm3.witness == std::vector<int>{0, 1, 2, 3});

    // A contract outside its doctor's ranking fails on the doctor side.
    detail::MarketBuilder b;
    b.hospital("h1", Rat(5));
    b.hospital("h2", Rat(5));
    int c0 = b.contract("d1", "h1", Rat(1), Rat(1));
    int c1 = b.contract("d1", "h2", Rat(1), Rat(2));
    b.prefs("d1", {c0});
    Market mm = b.build();
    HmReport hm4 = check_hm_stable(mm, all_kinds(mm, ChoiceKind::Exact), make_matching(mm, {c1}));
    CHECK(!hm4.stable);
    CHECK(hm4.failure.substr(0, 11) == "doctor side");
    CHECK(hm4.witness == std::vector<int>{c1});
}

TEST_CASE("existence flips between posted and relaxed budgets") {
    Market m = fixture_example1_nonexistence().market;
    CHECK(!exists_stable_exhaustive(m, market_budgets(m)).has_value());

    std::vector<Rat> relaxed{Rat(16), Rat(6)};
    std::optional<Matching> found = exists_stable_exhaustive(m, relaxed);
    REQUIRE(found.has_value());
    CHECK(found->contracts == std::vector<int>{0, 1, 4});  // first in preference-order DFS
    CHECK(check_stable(m, *found, relaxed).stable);

    CHECK_THROWS_AS(exists_stable_exhaustive(m, relaxed, 3), CapExceeded);

    PrunedSearchResult none = exists_stable_pruned(m, market_budgets(m),
                                                   std::chrono::milliseconds(10000));
    CHECK(none.verdict == SearchVerdict::NoneExists);
    CHECK(!none.matching.has_value());
    PrunedSearchResult ok = exists_stable_pruned(m, relaxed, std::chrono::milliseconds(10000));
    CHECK(ok.verdict == SearchVerdict::FoundStable);
    REQUIRE(ok.matching.has_value());
    CHECK(check_stable(m, *ok.matching, relaxed).stable);
    CHECK(verdict_name(SearchVerdict::Inconclusive) == std::string("inconclusive"));
}

TEST_CASE("pruned search agrees with exhaustive enumeration on random markets") {
    std::mt19937_64 rng(41);
    int found = 0, none = 0;
    for (int trial = 0; trial < 60; ++trial) {
        GenParams p;
        p.doctors = 4 + (int)(rng() % 4);
        p.hospitals = 2;
        p.max_contracts_per_doctor = 2;
        p.distinct = trial % 2 == 0;
        Market m = gen_random(p, rng());
        std::vector<Rat> budgets =
            trial % 3 == 0 ? inflated_budgets(m, Rat(6, 5)) : market_budgets(m);
        std::optional<Matching> ex = exists_stable_exhaustive(m, budgets);
        PrunedSearchResult pr = exists_stable_pruned(m, budgets, std::chrono::milliseconds(10000));
        if (ex) {
            ++found;
            CHECK(pr.verdict == SearchVerdict::FoundStable);
            REQUIRE(pr.matching.has_value());
            CHECK(check_stable(m, *pr.matching, budgets).stable);
            CHECK(check_stable(m, *ex, budgets).stable);
        } else {
            ++none;
            CHECK(pr.verdict == SearchVerdict::NoneExists);
        }
    }
    CHECK(found > 0);
    INFO("markets without a stable matching in this sample: ", none);
}

TEST_CASE("aggregate demand can shrink under the budget greedy scan") {
    Market m = fixture_lad_failure_budget_greedy().market;
    PropertyReport lad = check_property(m, 0, ChoiceKind::GreedyBudget, ChoiceProperty::Lad);
    CHECK(!lad.holds);
    REQUIRE(lad.witness.has_value());
    // Whatever pair the scan reports first must genuinely violate monotonicity.
    auto [big, sub] = *lad.witness;
    CHECK(ch_greedy_budget(m, 0, sub).size() > ch_greedy_budget(m, 0, big).size());
    // The canonical shrinking pair: one extra expensive offer drops the count.
    CHECK(ch_greedy_budget(m, 0, {0, 1, 2, 3}) == std::vector<int>{0, 1});
    CHECK(ch_greedy_budget(m, 0, {1, 2, 3}) == std::vector<int>{1, 2, 3});

    PropertyReport ok = check_property(m, 0, ChoiceKind::GreedyCapped, ChoiceProperty::Lad);
    CHECK(ok.holds);
    CHECK(ok.cases > 0);
    CHECK(!ok.witness.has_value());
}

TEST_CASE("aggregate demand can shrink when the top wage is pinned") {
    Market m = one_hospital(Rat(2), {{Rat(1), Rat(1)}, {Rat(1), Rat(1)}, {Rat(2), Rat(2)}},
                            UtilityKind::Proportional, Rat(1));
    CHECK(ch_prop_15(m, 0, {0, 1}) == std::vector<int>{0, 1});
    CHECK(ch_prop_15(m, 0, {0, 1, 2}) == std::vector<int>{2});
    PropertyReport lad = check_property(m, 0, ChoiceKind::Prop15, ChoiceProperty::Lad);
    CHECK(!lad.holds);
    CHECK(check_property(m, 0, ChoiceKind::PropSp, ChoiceProperty::Lad).holds);
}

TEST_CASE("the exact choice is not substitutable") {
    // Adding a third contract revives one that was rejected from the pair.
    Market m = one_hospital(Rat(10), {{Rat(6), Rat(9)}, {Rat(5), Rat(5)}, {Rat(5), Rat(5)}});
    CHECK(ch_exact(m, 0, {0, 1}) == std::vector<int>{0});
    CHECK(ch_exact(m, 0, {0, 1, 2}) == std::vector<int>{1, 2});
    PropertyReport sub = check_property(m, 0, ChoiceKind::Exact, ChoiceProperty::Sub);
    CHECK(!sub.holds);
    // Optimality still gives budget-capped dominance and rejection irrelevance.
    CHECK(check_property(m, 0, ChoiceKind::Exact, ChoiceProperty::Com).holds);
    CHECK(check_property(m, 0, ChoiceKind::Exact, ChoiceProperty::Irc).holds);
}

TEST_CASE("structural properties hold for the scan mechanisms on random markets") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        GenParams p;
        p.doctors = 8;
        p.hospitals = 2;
        p.max_contracts_per_doctor = 1;
        p.distinct = true;
        p.kind = trial % 3 == 0 ? UtilityKind::General
                 : trial % 3 == 1 ? UtilityKind::Proportional
                                  : UtilityKind::Uniform;
        Market m = gen_random(p, rng());
        for (int h = 0; h < m.n_hospitals(); ++h) {
            for (ChoiceKind k : {ChoiceKind::GreedyCapped, ChoiceKind::GreedyBudget,
                                 ChoiceKind::PropSp, ChoiceKind::Prop15, ChoiceKind::EqualUtil}) {
                if (!kind_applicable(k, p.kind)) continue;
                for (ChoiceProperty prop : {ChoiceProperty::Sub, ChoiceProperty::Irc,
                                            ChoiceProperty::Com}) {
                    PropertyReport rep = check_property(m, h, k, prop);
                    INFO("trial ", trial, " h ", h, " ", choice_kind_name(k), " ",
                         property_name(prop));
                    CHECK(rep.holds);
                }
            }
            // Monotone demand for the three mechanisms that promise it.
            for (ChoiceKind k : {ChoiceKind::GreedyCapped, ChoiceKind::PropSp,
                                 ChoiceKind::EqualUtil}) {
                if (!kind_applicable(k, p.kind)) continue;
                CHECK(check_property(m, h, k, ChoiceProperty::Lad).holds);
            }
        }
    }
}

TEST_CASE("property check pool cap") {
    std::vector<std::pair<Rat, Rat>> wu(13, {Rat(1), Rat(1)});
    Market m = one_hospital(Rat(5), wu);
    CHECK_THROWS_AS(check_property(m, 0, ChoiceKind::GreedyBudget, ChoiceProperty::Sub),
                    CapExceeded);
    CHECK(parse_property("lad") == ChoiceProperty::Lad);
    CHECK(parse_property("?") == std::nullopt);
}

TEST_CASE("a doctor can game the budget greedy scan but not the capped one") {
    Market m = fixture_nonsp_budget_greedy().market;
    std::vector<ChoiceKind> greedy = all_kinds(m, ChoiceKind::GreedyBudget);
    CHECK(run_da(m, greedy).matching.contracts == std::vector<int>{1, 2});

    std::optional<SpWitness> w = probe_strategyproof(m, greedy, 2);
    REQUIRE(w.has_value());
    CHECK(w->doctor == 2);
    CHECK(w->misreport == std::vector<int>{4});  // drop h2, claim h1 is acceptable only
    CHECK(w->truthful_outcome == -1);            // truthfully d3 ends unmatched
    CHECK(w->manipulated_outcome == 4);
    CHECK(m.prefers(2, w->manipulated_outcome, w->truthful_outcome));

    CHECK(!probe_strategyproof(m, greedy, 0).has_value());
    CHECK(!probe_strategyproof(m, greedy, 1).has_value());

    std::vector<ChoiceKind> capped = all_kinds(m, ChoiceKind::GreedyCapped);
    for (int d = 0; d < m.n_doctors(); ++d)
        CHECK(!probe_strategyproof(m, capped, d).has_value());

    CHECK_THROWS_AS(probe_strategyproof(m, greedy, 2, 1), CapExceeded);
}

TEST_CASE("spending stays within each mechanism's worst-case bound") {
    Market m2 = fixture_example2_mech1().market;
    Matching mt2 = run_da(m2, all_kinds(m2, ChoiceKind::GreedyCapped)).matching;
    BoundsReport rep2 = check_bounds(m2, ChoiceKind::GreedyCapped, mt2);
    CHECK(rep2.all_ok);
    CHECK(rep2.rows[0].bound == Rat(171));  // 57 * 3
    CHECK(rep2.rows[0].actual == Rat(147));
    CHECK(!rep2.rows[0].strict);
    CHECK(rep2.rows[1].bound == Rat(100));

    Market m3 = fixture_example3_mech2().market;
    Matching mt3 = run_da(m3, all_kinds(m3, ChoiceKind::GreedyBudget)).matching;
    BoundsReport rep3 = check_bounds(m3, ChoiceKind::GreedyBudget, mt3);
    CHECK(rep3.all_ok);
    CHECK(rep3.rows[0].bound == Rat(157));  // 100 + 57
    CHECK(rep3.rows[0].actual == Rat(105));
    CHECK(rep3.rows[0].strict);

    // An infeasible hand-made matching is flagged.
    Matching bad = make_matching(m3, {0, 1, 2, 3});
    CHECK(!check_bounds(m3, ChoiceKind::EqualUtil, bad).all_ok);
}

TEST_CASE("random mechanism runs stay stable at their implied budgets") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 40; ++trial) {
        GenParams p;
        p.doctors = 6;
        p.hospitals = 2;
        p.max_contracts_per_doctor = 2;
        p.distinct = true;
        p.kind = trial % 3 == 0 ? UtilityKind::General
                 : trial % 3 == 1 ? UtilityKind::Proportional
                                  : UtilityKind::Uniform;
        Market m = gen_random(p, rng());
        // The exact oracle is deliberately absent: without substitutability its
        // deferred-acceptance outcome can be blocked even at implied budgets.
        for (ChoiceKind k : {ChoiceKind::GreedyCapped, ChoiceKind::GreedyBudget,
                             ChoiceKind::PropSp, ChoiceKind::Prop15, ChoiceKind::EqualUtil}) {
            if (!kind_applicable(k, p.kind)) continue;
            Matching mt = run_da(m, all_kinds(m, k)).matching;
            StabilityReport rep = check_stable(m, mt, implied_budgets(m, mt));
            INFO("trial ", trial, " ", choice_kind_name(k));
            CHECK(rep.stable);
            CHECK(check_bounds(m, k, mt).all_ok);
        }
    }
}
