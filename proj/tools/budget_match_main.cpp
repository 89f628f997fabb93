// budget-match: solve, verify, and probe two-sided matching markets where
// hospitals hire doctors under wage budgets.
//
// Exit codes: 0 success (or property holds), 1 witness found (blocking
// coalition, property violation, profitable misreport, or no stable matching),
// 2 invalid input or a cap exceeded, 3 internal engine guard tripped.

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <budget_match/engine.hpp>
#include <budget_match/instances.hpp>
#include <budget_match/io.hpp>
#include <budget_match/verify.hpp>

namespace bm = budget_match;
using bm::Rat;
using nlohmann::json;

namespace {

struct GlobalOpts {
    int oracle_cap = bm::kDefaultOracleCap;
    long long enum_cap = 10'000'000;
    unsigned long long seed = 1;
    bool decimal = false;
    std::string trace_path;
    std::string config_path;
};

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return json::parse(in);
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

bm::Market load_input(const std::string& path, const std::string& fixture) {
    if (!fixture.empty() && !path.empty())
        throw std::invalid_argument("give either a market file or --fixture, not both");
    if (!fixture.empty()) return bm::get_fixture(fixture).market;
    if (path.empty()) throw std::invalid_argument("a market file or --fixture is required");
    return bm::market_from_json(parse_file(path));
}

bm::ChoiceKind parse_kind_or_throw(const std::string& s) {
    if (auto k = bm::parse_choice_kind(s)) return *k;
    throw std::invalid_argument("unknown mechanism '" + s +
                                "'; expected exact, sp-greedy, budget-greedy, prop-sp, prop-15, "
                                "or equal-util");
}

// Uniform --mechanism wins; otherwise every hospital must carry one in the
// market file.
std::vector<bm::ChoiceKind> resolve_kinds(const bm::Market& m, const std::string& flag) {
    std::vector<bm::ChoiceKind> kinds;
    if (!flag.empty()) {
        kinds.assign(m.n_hospitals(), parse_kind_or_throw(flag));
    } else {
        for (const bm::HospitalSpec& h : m.hospitals) {
            if (h.mechanism.empty())
                throw std::invalid_argument("no mechanism for " + h.name +
                                            ": pass --mechanism or set one per hospital");
            kinds.push_back(parse_kind_or_throw(h.mechanism));
        }
    }
    for (int h = 0; h < m.n_hospitals(); ++h) bm::require_applicable(m, h, kinds[h]);
    return kinds;
}

bm::Matching load_matching(const bm::Market& m, const std::string& path) {
    json j = parse_file(path);
    if (j.is_object() && j.contains("matching")) j = j["matching"];
    std::vector<int> ids;
    if (j.is_array())
        ids = j.get<std::vector<int>>();
    else if (j.is_object() && j.contains("contracts"))
        ids = j["contracts"].get<std::vector<int>>();
    else
        throw std::invalid_argument("matching file needs a contracts array");
    return bm::make_matching(m, ids);
}

json round_json(const bm::DaRound& r) {
    return json{{"proposed", r.proposed}, {"chosen", r.chosen}, {"rejected", r.rejected}};
}

json bounds_json(const bm::Market& m, const std::vector<bm::ChoiceKind>& kinds,
                 const bm::Matching& mt, bool decimal, bool* all_ok) {
    json rows = json::array();
    *all_ok = true;
    for (int h = 0; h < m.n_hospitals(); ++h) {
        bm::BoundRow row = bm::check_bounds(m, kinds[h], mt).rows[h];
        *all_ok = *all_ok && row.ok;
        rows.push_back(json{{"hospital", m.hospitals[h].name},
                            {"mechanism", bm::choice_kind_name(kinds[h])},
                            {"bound", bm::rat_json(row.bound, decimal)},
                            {"actual", bm::rat_json(row.actual, decimal)},
                            {"strict", row.strict},
                            {"ok", row.ok}});
    }
    return rows;
}

int cmd_solve(const bm::Market& m, const std::vector<bm::ChoiceKind>& kinds,
              const std::string& engine, const GlobalOpts& g, const std::string& out_path) {
    bool keep_trace = !g.trace_path.empty();
    bm::DaResult r = engine == "heap" ? bm::run_da_incremental(m, kinds, keep_trace)
                                      : bm::run_da(m, kinds, keep_trace, g.oracle_cap);
    json out;
    out["matching"] = bm::matching_json(m, r.matching, g.decimal);
    out["rounds"] = r.trace.rounds;
    out["engine"] = engine;
    json implied = json::object(), ratio = json::object();
    for (int h = 0; h < m.n_hospitals(); ++h) {
        const std::string& name = m.hospitals[h].name;
        implied[name] = bm::rat_json(
            std::max(m.hospitals[h].budget, r.matching.hospital_wage[h]), g.decimal);
        ratio[name] =
            bm::rat_json(r.matching.hospital_wage[h] / m.hospitals[h].budget, g.decimal);
    }
    out["implied_budgets"] = implied;
    out["violation_ratios"] = ratio;
    bool bounds_ok = true;
    out["bounds"] = bounds_json(m, kinds, r.matching, g.decimal, &bounds_ok);
    out["bounds_ok"] = bounds_ok;
    write_output(out_path, out.dump(2) + "\n");
    if (keep_trace) {
        json tr;
        tr["rounds"] = r.trace.rounds;
        tr["log"] = json::array();
        for (const bm::DaRound& round : r.trace.log) tr["log"].push_back(round_json(round));
        write_output(g.trace_path, tr.dump(2) + "\n");
    }
    return 0;
}

std::vector<Rat> resolve_budgets(const bm::Market& m, const bm::Matching& mt,
                                 const std::string& mode) {
    if (mode.empty() || mode == "implied") return bm::implied_budgets(m, mt);
    if (mode == "given") return bm::market_budgets(m);
    json j = parse_file(mode);
    if (!j.is_array() || (int)j.size() != m.n_hospitals())
        throw std::invalid_argument("budget file must be an array with one entry per hospital");
    std::vector<Rat> b;
    for (const json& el : j) b.push_back(bm::rat_from_json(el));
    return b;
}

int cmd_verify(const bm::Market& m, const bm::Matching& mt, const std::string& budget_mode,
               const GlobalOpts& g, const std::string& out_path) {
    std::vector<Rat> budgets = resolve_budgets(m, mt, budget_mode);
    bm::StabilityReport rep = bm::check_stable(m, mt, budgets);
    json out;
    out["feasible"] = rep.feasible;
    out["stable"] = rep.stable;
    json budgets_j = json::array(), hosp = json::array();
    for (int h = 0; h < m.n_hospitals(); ++h) {
        budgets_j.push_back(bm::rat_json(budgets[h], g.decimal));
        hosp.push_back(json{{"hospital", m.hospitals[h].name},
                            {"feasible", rep.hospitals[h].feasible},
                            {"implied_budget", bm::rat_json(rep.hospitals[h].implied_budget,
                                                            g.decimal)},
                            {"violation_ratio", bm::rat_json(rep.hospitals[h].violation_ratio,
                                                             g.decimal)}});
    }
    out["budgets"] = budgets_j;
    out["hospitals"] = hosp;
    if (rep.blocking)
        out["blocking"] = json{{"hospital", m.hospitals[rep.blocking->hospital].name},
                               {"coalition", rep.blocking->coalition}};
    write_output(out_path, out.dump(2) + "\n");
    return rep.stable ? 0 : 1;
}

int cmd_props(const bm::Market& m, const std::string& hospital_sel,
              const std::string& mech_flag, const std::string& prop_sel, const GlobalOpts& g,
              const std::string& out_path) {
    std::vector<int> targets;
    if (hospital_sel.empty()) {
        for (int h = 0; h < m.n_hospitals(); ++h) targets.push_back(h);
    } else {
        int found = -1;
        for (int h = 0; h < m.n_hospitals(); ++h)
            if (m.hospitals[h].name == hospital_sel) found = h;
        if (found < 0) throw std::invalid_argument("unknown hospital '" + hospital_sel + "'");
        targets.push_back(found);
    }
    std::vector<bm::ChoiceKind> kinds = resolve_kinds(m, mech_flag);
    std::vector<bm::ChoiceProperty> props{bm::ChoiceProperty::Sub, bm::ChoiceProperty::Irc,
                                          bm::ChoiceProperty::Lad, bm::ChoiceProperty::Com};
    if (!prop_sel.empty()) {
        auto p = bm::parse_property(prop_sel);
        if (!p)
            throw std::invalid_argument("unknown property '" + prop_sel +
                                        "'; expected sub, irc, lad, or com");
        props = {*p};
    }
    json rows = json::array();
    bool any_witness = false;
    for (int h : targets) {
        for (bm::ChoiceProperty prop : props) {
            bm::PropertyReport rep = bm::check_property(m, h, kinds[h], prop, 12, g.oracle_cap);
            json row{{"hospital", m.hospitals[h].name},
                     {"mechanism", bm::choice_kind_name(kinds[h])},
                     {"property", bm::property_name(prop)},
                     {"holds", rep.holds},
                     {"cases", rep.cases}};
            if (rep.witness) {
                row["witness"] = json{{"set", rep.witness->first}, {"subset", rep.witness->second}};
                any_witness = true;
            }
            rows.push_back(std::move(row));
        }
    }
    write_output(out_path, json{{"properties", rows}}.dump(2) + "\n");
    return any_witness ? 1 : 0;
}

int cmd_probe_sp(const bm::Market& m, const std::vector<bm::ChoiceKind>& kinds,
                 const std::string& doctor_sel, int misreport_cap, const GlobalOpts& g,
                 const std::string& out_path) {
    std::vector<int> targets;
    if (doctor_sel.empty()) {
        for (int d = 0; d < m.n_doctors(); ++d) targets.push_back(d);
    } else {
        int found = -1;
        for (int d = 0; d < m.n_doctors(); ++d)
            if (m.doctors[d] == doctor_sel) found = d;
        if (found < 0) throw std::invalid_argument("unknown doctor '" + doctor_sel + "'");
        targets.push_back(found);
    }
    json witnesses = json::array(), skipped = json::array();
    for (int d : targets) {
        if (doctor_sel.empty() && (int)m.by_doctor[d].size() > misreport_cap) {
            skipped.push_back(m.doctors[d]);  // over the misreport cap; noted, not fatal
            continue;
        }
        std::optional<bm::SpWitness> w =
            bm::probe_strategyproof(m, kinds, d, misreport_cap, g.oracle_cap);
        if (w)
            witnesses.push_back(json{{"doctor", m.doctors[d]},
                                     {"misreport", w->misreport},
                                     {"truthful_outcome", w->truthful_outcome},
                                     {"manipulated_outcome", w->manipulated_outcome}});
    }
    json out{{"witnesses", witnesses},
             {"skipped", skipped},
             {"probed", (int)targets.size() - (int)skipped.size()}};
    write_output(out_path, out.dump(2) + "\n");
    return witnesses.empty() ? 0 : 1;
}

int cmd_exists(const bm::Market& m, const std::string& inflate, long long time_ms,
               const GlobalOpts& g, const std::string& out_path) {
    std::vector<Rat> budgets = bm::inflated_budgets(m, Rat::parse(inflate));
    json out;
    json budgets_j = json::array();
    for (const Rat& b : budgets) budgets_j.push_back(bm::rat_json(b, g.decimal));
    out["budgets"] = budgets_j;

    unsigned long long product = 1;
    bool small_enough = true;
    for (const bm::DoctorPrefs& p : m.prefs) {
        product *= (unsigned long long)p.ranking.size() + 1;
        if (product > (unsigned long long)g.enum_cap) {
            small_enough = false;
            break;
        }
    }
    std::optional<bm::Matching> found;
    bm::SearchVerdict verdict;
    if (small_enough) {
        found = bm::exists_stable_exhaustive(m, budgets, (unsigned long long)g.enum_cap);
        verdict = found ? bm::SearchVerdict::FoundStable : bm::SearchVerdict::NoneExists;
        out["search"] = "exhaustive";
    } else {
        bm::PrunedSearchResult r =
            bm::exists_stable_pruned(m, budgets, std::chrono::milliseconds(time_ms));
        verdict = r.verdict;
        found = r.matching;
        out["search"] = "pruned";
        out["nodes"] = r.nodes;
    }
    out["verdict"] = bm::verdict_name(verdict);
    if (found) out["matching"] = bm::matching_json(m, *found, g.decimal);
    write_output(out_path, out.dump(2) + "\n");
    if (verdict == bm::SearchVerdict::FoundStable) return 0;
    return verdict == bm::SearchVerdict::NoneExists ? 1 : 2;
}

struct SweepParams {
    bm::GenParams gen;
    std::string kind = "general";
    long long seeds = 10;
    std::string mechanism;
    int jobs = 1;
};

std::string csv_row(const bm::Market& m, unsigned long long seed, bm::ChoiceKind kind,
                    int oracle_cap, bool decimal) {
    auto t0 = std::chrono::steady_clock::now();
    bm::DaResult r = bm::run_da(m, std::vector<bm::ChoiceKind>(m.n_hospitals(), kind), false,
                                oracle_cap);
    long long wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    Rat worst;
    for (int h = 0; h < m.n_hospitals(); ++h)
        worst = std::max(worst, r.matching.hospital_wage[h] / m.hospitals[h].budget);
    std::string stable;
    try {
        stable = bm::check_stable(m, r.matching, bm::implied_budgets(m, r.matching)).stable
                     ? "yes"
                     : "no";
    } catch (const bm::CapExceeded&) {
        stable = "cap-exceeded";  // partial row, marked
    }
    bool bound_ok = bm::check_bounds(m, kind, r.matching).all_ok;
    std::ostringstream os;
    os << seed << ',' << bm::choice_kind_name(kind) << ',' << m.n_contracts() << ','
       << (decimal ? bm::rat_json(worst, true).dump() : worst.str()) << ',' << stable << ','
       << r.trace.rounds << ',' << wall << ',' << (bound_ok ? "yes" : "no") << '\n';
    return os.str();
}

int cmd_sweep(const SweepParams& sp, const GlobalOpts& g, const std::string& out_path) {
    bm::GenParams p = sp.gen;
    if (sp.kind == "proportional")
        p.kind = bm::UtilityKind::Proportional;
    else if (sp.kind == "uniform")
        p.kind = bm::UtilityKind::Uniform;
    else if (sp.kind == "general")
        p.kind = bm::UtilityKind::General;
    else
        throw std::invalid_argument("unknown utility kind '" + sp.kind + "'");
    if (sp.seeds < 0) throw std::invalid_argument("--seeds must be nonnegative");
    bm::ChoiceKind kind = parse_kind_or_throw(sp.mechanism);
    if (!bm::kind_applicable(kind, p.kind))
        throw std::invalid_argument("mechanism " + sp.mechanism + " needs " +
                                    (kind == bm::ChoiceKind::EqualUtil ? "uniform"
                                                                       : "proportional") +
                                    std::string(" utilities"));
    std::vector<std::string> rows((size_t)sp.seeds);
    int jobs = std::max(1, sp.jobs);
    std::atomic<long long> next{0};
    std::vector<std::string> errors((size_t)jobs);
    auto worker = [&](int slot) {
        try {
            for (long long i = next.fetch_add(1); i < sp.seeds; i = next.fetch_add(1)) {
                unsigned long long seed = g.seed + (unsigned long long)i;
                bm::Market m = bm::gen_random(p, seed);
                rows[(size_t)i] = csv_row(m, seed, kind, g.oracle_cap, g.decimal);
            }
        } catch (const std::exception& e) {
            errors[(size_t)slot] = e.what();
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, t);
        for (std::thread& t : pool) t.join();
    }
    for (const std::string& e : errors)
        if (!e.empty()) throw std::invalid_argument(e);
    std::string csv = "seed,mechanism,n_contracts,max_violation_ratio,stable,rounds,wall_ms,"
                      "bound_ok\n";
    for (const std::string& r : rows) csv += r;  // seed order, deterministic
    write_output(out_path, csv);
    return 0;
}

// The config file wins over command-line flags.
void apply_config(GlobalOpts& g, std::string& mechanism, std::string& engine) {
    if (g.config_path.empty()) return;
    json j = parse_file(g.config_path);
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    if (j.contains("oracle_cap")) g.oracle_cap = j["oracle_cap"].get<int>();
    if (j.contains("enum_cap")) g.enum_cap = j["enum_cap"].get<long long>();
    if (j.contains("seed")) g.seed = j["seed"].get<unsigned long long>();
    if (j.contains("decimal")) g.decimal = j["decimal"].get<bool>();
    if (j.contains("trace")) g.trace_path = j["trace"].get<std::string>();
    if (j.contains("mechanism")) mechanism = j["mechanism"].get<std::string>();
    if (j.contains("engine")) engine = j["engine"].get<std::string>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-sided matching with budget-constrained hospitals"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--oracle-cap", g.oracle_cap, "exact-choice pool cap");
    app.add_option("--enum-cap", g.enum_cap, "exhaustive-search node cap");
    app.add_option("--seed", g.seed, "base random seed");
    app.add_flag("--decimal", g.decimal, "print rationals as decimals");
    app.add_option("--trace", g.trace_path, "write round-by-round trace JSON here");
    app.add_option("--config", g.config_path, "JSON config; overrides flags");

    std::string market_path, fixture, mechanism, engine = "naive", out_path;
    std::string matching_path, budget_mode, hospital_sel, doctor_sel, property_sel;
    std::string inflate = "1";
    int misreport_cap = 5;
    long long time_ms = 60000;

    CLI::App* solve = app.add_subcommand("solve", "run deferred acceptance");
    solve->add_option("market", market_path, "market JSON file");
    solve->add_option("--fixture", fixture, "built-in market name");
    solve->add_option("--mechanism", mechanism, "uniform hospital mechanism");
    solve->add_option("--engine", engine, "naive|heap")
        ->check(CLI::IsMember({"naive", "heap"}));
    solve->add_option("-o,--out", out_path, "output file (default stdout)");

    CLI::App* verify = app.add_subcommand("verify", "check a matching for stability");
    verify->add_option("market", market_path, "market JSON file");
    verify->add_option("matching", matching_path,
                       "matching JSON file (default: solve the market first)");
    verify->add_option("--fixture", fixture, "built-in market name");
    verify->add_option("--mechanism", mechanism, "mechanism when solving for the matching");
    verify->add_option("--budgets", budget_mode, "implied|given|<file> (default implied)");
    verify->add_option("-o,--out", out_path, "output file (default stdout)");

    CLI::App* props = app.add_subcommand("props", "check choice-function properties");
    props->add_option("market", market_path, "market JSON file");
    props->add_option("--fixture", fixture, "built-in market name");
    props->add_option("--hospital", hospital_sel, "restrict to one hospital");
    props->add_option("--mechanism", mechanism, "uniform hospital mechanism");
    props->add_option("--property", property_sel, "restrict to sub|irc|lad|com");
    props->add_option("-o,--out", out_path, "output file (default stdout)");

    CLI::App* probe = app.add_subcommand("probe-sp", "search for profitable misreports");
    probe->add_option("market", market_path, "market JSON file");
    probe->add_option("--fixture", fixture, "built-in market name");
    probe->add_option("--doctor", doctor_sel, "restrict to one doctor");
    probe->add_option("--mechanism", mechanism, "uniform hospital mechanism");
    probe->add_option("--misreport-cap", misreport_cap, "max contracts per probed doctor");
    probe->add_option("-o,--out", out_path, "output file (default stdout)");

    CLI::App* exists = app.add_subcommand("exists", "search for any stable matching");
    exists->add_option("market", market_path, "market JSON file");
    exists->add_option("--fixture", fixture, "built-in market name");
    exists->add_option("--inflate", inflate, "budget inflation factor (rational)");
    exists->add_option("--time-ms", time_ms, "deadline for the pruned search");
    exists->add_option("-o,--out", out_path, "output file (default stdout)");

    std::string family, alpha = "1/10", beta = "1/2", w_low = "1", w_high = "3", budget = "4";
    int fam_m = 5;
    SweepParams sp;
    CLI::App* gen = app.add_subcommand("gen", "emit a market JSON");
    gen->add_option("--family", family, "random|nonexistence|overspend");
    gen->add_option("--fixture", fixture, "dump a built-in market instead");
    gen->add_option("--m", fam_m, "nonexistence: hospital count");
    gen->add_option("--alpha", alpha, "nonexistence: relaxation margin");
    gen->add_option("--beta", beta, "nonexistence: wage ceiling");
    gen->add_option("--w-low", w_low, "overspend: cheap wage");
    gen->add_option("--w-high", w_high, "overspend: expensive wage");
    gen->add_option("--budget", budget, "overspend: hospital budget");
    gen->add_option("--doctors", sp.gen.doctors, "random: doctor count");
    gen->add_option("--hospitals", sp.gen.hospitals, "random: hospital count");
    gen->add_option("--max-per-doctor", sp.gen.max_contracts_per_doctor,
                    "random: contracts per doctor");
    gen->add_option("--wage-lo", sp.gen.wage_lo, "random: smallest wage");
    gen->add_option("--wage-hi", sp.gen.wage_hi, "random: largest wage");
    gen->add_option("--budget-lo", sp.gen.budget_lo, "random: smallest budget");
    gen->add_option("--budget-hi", sp.gen.budget_hi, "random: largest budget");
    gen->add_option("--kind", sp.kind, "random: general|proportional|uniform");
    gen->add_flag("--distinct,!--no-distinct", sp.gen.distinct,
                  "random: force distinct ratios / wages");
    gen->add_option("--per-hospital-cap", sp.gen.per_hospital_cap, "random: pool cap");
    gen->add_option("--truncate-percent", sp.gen.truncate_percent,
                    "random: preference truncation chance");
    gen->add_option("-o,--out", out_path, "output file (default stdout)");

    CLI::App* sweep = app.add_subcommand("sweep", "run a seeded batch and emit CSV");
    sweep->add_option("--family", family, "instance family (only random sweeps)");
    sweep->add_option("--seeds", sp.seeds, "number of consecutive seeds");
    sweep->add_option("--mechanism", sp.mechanism, "mechanism to run")->required();
    sweep->add_option("--jobs", sp.jobs, "worker threads");
    sweep->add_option("--doctors", sp.gen.doctors, "doctor count");
    sweep->add_option("--hospitals", sp.gen.hospitals, "hospital count");
    sweep->add_option("--max-per-doctor", sp.gen.max_contracts_per_doctor,
                      "contracts per doctor");
    sweep->add_option("--wage-lo", sp.gen.wage_lo, "smallest wage");
    sweep->add_option("--wage-hi", sp.gen.wage_hi, "largest wage");
    sweep->add_option("--budget-lo", sp.gen.budget_lo, "smallest budget");
    sweep->add_option("--budget-hi", sp.gen.budget_hi, "largest budget");
    sweep->add_option("--kind", sp.kind, "general|proportional|uniform");
    sweep->add_flag("--distinct,!--no-distinct", sp.gen.distinct,
                    "force distinct ratios / wages");
    sweep->add_option("--per-hospital-cap", sp.gen.per_hospital_cap, "pool cap");
    sweep->add_option("--truncate-percent", sp.gen.truncate_percent,
                      "preference truncation chance");
    sweep->add_option("-o,--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_config(g, mechanism, engine);
        if (*solve) {
            bm::Market m = load_input(market_path, fixture);
            return cmd_solve(m, resolve_kinds(m, mechanism), engine, g, out_path);
        }
        if (*verify) {
            bm::Market m = load_input(market_path, fixture);
            bm::Matching mt =
                matching_path.empty()
                    ? bm::run_da(m, resolve_kinds(m, mechanism), false, g.oracle_cap).matching
                    : load_matching(m, matching_path);
            return cmd_verify(m, mt, budget_mode, g, out_path);
        }
        if (*props) {
            bm::Market m = load_input(market_path, fixture);
            return cmd_props(m, hospital_sel, mechanism, property_sel, g, out_path);
        }
        if (*probe) {
            bm::Market m = load_input(market_path, fixture);
            return cmd_probe_sp(m, resolve_kinds(m, mechanism), doctor_sel, misreport_cap, g,
                                out_path);
        }
        if (*exists) {
            bm::Market m = load_input(market_path, fixture);
            return cmd_exists(m, inflate, time_ms, g, out_path);
        }
        if (*gen) {
            bm::Market m;
            if (!fixture.empty()) {
                m = bm::get_fixture(fixture).market;
            } else if (family == "random") {
                bm::GenParams p = sp.gen;
                p.kind = sp.kind == "proportional" ? bm::UtilityKind::Proportional
                         : sp.kind == "uniform"   ? bm::UtilityKind::Uniform
                                                  : bm::UtilityKind::General;
                m = bm::gen_random(p, g.seed);
            } else if (family == "nonexistence") {
                m = bm::gen_nonexistence_family(fam_m, Rat::parse(alpha), Rat::parse(beta));
            } else if (family == "overspend") {
                m = bm::gen_overspend_family(Rat::parse(w_low), Rat::parse(w_high),
                                             Rat::parse(budget));
            } else {
                throw std::invalid_argument(
                    "gen needs --fixture or --family random|nonexistence|overspend");
            }
            write_output(out_path, bm::market_to_json(m).dump(2) + "\n");
            return 0;
        }
        if (*sweep) {
            if (!family.empty() && family != "random")
                throw std::invalid_argument("sweep only supports --family random");
            return cmd_sweep(sp, g, out_path);
        }
    } catch (const bm::EngineGuard& e) {
        std::cerr << "engine guard: " << e.what() << "\n";
        return 3;
    } catch (const bm::CapExceeded& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "bad JSON: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
