// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Optional arguments select criteria by number, e.g. `acceptance 1 4 8`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "abba/advisor/features.hpp"
#include "abba/advisor/fusion.hpp"
#include "abba/advisor/supervisory.hpp"
#include "abba/link/codec.hpp"
#include "abba/link/demo.hpp"
#include "abba/metrics/glycaemic.hpp"
#include "abba/metrics/wilcoxon.hpp"
#include "abba/report/report.hpp"
#include "abba/rl/actor_critic.hpp"
#include "abba/scenario/trial.hpp"
#include "abba/sim/cohort.hpp"
#include "generators.hpp"
#include "link_gen.hpp"
#include "link_net.hpp"
#include "oracles.hpp"

using namespace abba;
namespace fs = std::filesystem;

namespace {

// Collects failed checks; keeps the first few messages for the report line.
struct Tally {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        ++failures;
        if (notes.size() < 5) notes.push_back(what);
    }
    bool ok() const { return failures == 0; }
    std::string summary() const {
        std::string s = fmt::format("{} checks, {} failed", cases, failures);
        for (const auto& n : notes) s += "; " + n;
        return s;
    }
};

struct Outcome {
    bool ok = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> run;
};

// ---------------------------------------------------------------- 1

Outcome algebraic_core() {
    constexpr int kCases = 100000;
    std::vector<std::string> parts;
    bool all = true;
    auto suite = [&](const char* name, auto body) {
        Tally t;
        Rng rng(std::hash<std::string>{}(name));
        for (int i = 0; i < kCases; ++i) body(rng, t);
        parts.push_back(fmt::format("{}: {}", name, t.summary()));
        all = all && t.ok();
    };

    suite("fusion identity", [](Rng& rng, Tally& t) {
        const double old = rng.uniform(0.01, 100.0);
        const double p_e = rng.normal(0.0, 0.5);
        const double two_step = 0.5 * old + 0.5 * (old + p_e * old);
        const double f = advisor::fuse(old, p_e);
        const double tol = 1e-12 * old * (1.0 + std::fabs(p_e));
        t.check(std::fabs(f - (old + 0.5 * p_e * old)) <= tol, fmt::format("fuse({}, {}) = {}", old, p_e, f));
        t.check(std::fabs(f - two_step) <= tol, "two-step form");
    });

    suite("guard truth table", [](Rng& rng, Tally& t) {
        const double br_old = rng.uniform(0.1, 5.0);
        const double cir_old = rng.uniform(2.0, 40.0);
        const int sb = static_cast<int>(rng.below(3)) - 1;
        const int sc = static_cast<int>(rng.below(3)) - 1;
        const double br = br_old * (1.0 + sb * rng.uniform(1e-6, 0.05));
        const double cir = cir_old * (1.0 + sc * rng.uniform(1e-6, 0.05));
        const bool expected = (sb > 0 && sc < 0) || (sb < 0 && sc > 0);
        t.check(advisor::opposition_guard(br, br_old, cir, cir_old) == expected,
                fmt::format("guard signs ({}, {})", sb, sc));
        // through the full update: a guarded CIR keeps its old value exactly
        const double p_e = (cir / cir_old - 1.0) * 2.0;
        const auto u = advisor::update_cir(cir_old, p_e, br, br_old);
        t.check(u.guarded == expected, "guard flag in update_cir");
        t.check(expected ? u.value == cir_old : std::fabs(u.value - cir) <= 1e-12 * cir_old, "guarded CIR value");
    });

    suite("clamp bound", [](Rng& rng, Tally& t) {
        const double old = rng.uniform(0.06, 50.0);
        const double p_e = rng.normal(0.0, 1.0);
        const auto b = advisor::update_basal(old, p_e);
        t.check(std::fabs(b.value - old) <= 0.05 * old * (1 + 1e-12), fmt::format("basal {} -> {}", old, b.value));
        const double cir_old = rng.uniform(1.1, 60.0);
        const auto c = advisor::update_cir(cir_old, p_e, old, old);
        t.check(std::fabs(c.value - cir_old) <= 0.05 * cir_old * (1 + 1e-12), "cir clamp");
        t.check(b.clamped == (std::fabs(0.5 * p_e) > 0.05), "clamp flag");
    });

    suite("cost weighting", [](Rng& rng, Tally& t) {
        const rl::FeatureVector f{rng.uniform(), rng.uniform()};
        t.check(advisor::local_cost(f) == 1.0 * f.hyper + 10.0 * f.hypo, "c = f_hyper + 10 f_hypo");
    });

    suite("supervisory branch tables", [](Rng& rng, Tally& t) {
        // features with exact zeros often enough to reach every branch
        auto feature = [&rng] { return rng.below(3) == 0 ? 0.0 : rng.uniform(); };
        const rl::FeatureVector f{feature(), feature()};
        double cir = 0.0;
        if (f.hypo > 0) cir = 0.02 * f.hypo;
        else if (f.hyper > 0) cir = -0.02 * f.hyper;
        t.check(advisor::supervisory_cir_smbg(f) == cir, "CIR SMBG table");

        advisor::SupervisoryInputs in;
        in.hyponumber = static_cast<int>(rng.below(3));
        in.n1 = in.hyponumber + static_cast<int>(rng.below(3));
        in.n2 = static_cast<int>(rng.below(4));
        double br = 0.0;
        if (in.hyponumber > 0) br = -f.hypo / 8.0;
        else if (in.n1 <= 1 && in.n2 >= 2) br = f.hyper / 30.0;
        else if (in.n1 >= 2 && in.n2 <= 1) br = -f.hypo / 30.0;
        t.check(advisor::supervisory_br_smbg(in, f) == br, "BR SMBG table");

        double cgm = 0.0;
        if (f.hypo > 0) cgm = (f.hyper > 0 ? 0.05 : 0.1) * f.hypo;
        t.check(advisor::supervisory_cgm(f, advisor::Target::Basal) == -cgm, "CGM BR table");
        t.check(advisor::supervisory_cgm(f, advisor::Target::Cir) == cgm, "CGM CIR table");
    });

    std::string detail;
    for (const auto& p : parts) detail += (detail.empty() ? "" : " | ") + p;
    return {all, detail};
}

// ---------------------------------------------------------------- 2

Outcome gradient_check() {
    Tally t;
    Rng rng(2);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        rl::ActorState actor;
        actor.theta = {rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)};
        const rl::FeatureVector f{rng.uniform(), rng.uniform()};
        const double p_s = rng.normal(0.0, 0.05);
        auto p_d = [&](const double th[2]) {
            return actor.h * rl::deterministic_action({th[0], th[1]}, f) + (1.0 - actor.h) * p_s;
        };
        double fd[2];
        oracle::central_gradient(p_d, actor.theta.data(), 1e-5, fd);
        const auto g = rl::policy_gradient(actor, f);
        const double norm = std::hypot(fd[0], fd[1]);
        const double err = std::hypot(g[0] - fd[0], g[1] - fd[1]) / std::max(norm, 1e-12);
        worst = std::max(worst, norm > 1e-12 ? err : 0.0);
        t.check(norm <= 1e-12 ? std::hypot(g[0], g[1]) <= 1e-10 : err <= 1e-6, fmt::format("relative error {}", err));
    }
    return {t.ok(), fmt::format("{}; worst relative error {:.2e}", t.summary(), worst)};
}

// ---------------------------------------------------------------- 3

Outcome feature_oracle() {
    Tally t;
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const auto mode = i % 2 ? advisor::Mode::Smbg : advisor::Mode::Cgm;
        const auto rec = gen::day_record(rng, mode);
        const auto f = mode == advisor::Mode::Smbg ? advisor::extract_features_smbg(rec) : advisor::extract_features_cgm(rec);
        const auto readings = gen::readings(rec);
        const auto meals = gen::announcements(rec);
        const auto br = oracle::basal_features(readings);
        t.check(std::fabs(f.br.hyper - br.hyper) <= 1e-12 && std::fabs(f.br.hypo - br.hypo) <= 1e-12,
                fmt::format("record {} basal", i));
        for (int m = 1; m <= 3; ++m) {
            const auto o = oracle::meal_features(readings, meals, m);
            const auto& got = f.cir[static_cast<std::size_t>(m - 1)];
            t.check(std::fabs(got.hyper - o.hyper) <= 1e-12 && std::fabs(got.hypo - o.hypo) <= 1e-12,
                    fmt::format("record {} meal {}", i, m));
        }
    }
    return {t.ok(), fmt::format("10000 records: {}", t.summary())};
}

// ---------------------------------------------------------------- 4

Outcome metrics_oracles() {
    Tally t;
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> g(1 + rng.below(2016));
        for (double& v : g) v = rng.uniform(20.0, 600.0);
        double lbgi = 0.0, hbgi = 0.0;
        oracle::risk_indices(g, lbgi, hbgi);
        const auto r = metrics::bg_risk_indices(g);
        t.check(std::fabs(r.lbgi - lbgi) <= 1e-6 && std::fabs(r.hbgi - hbgi) <= 1e-6, "risk oracle");
    }
    const auto neutral = metrics::bg_risk_indices(std::vector<double>(2016, 112.5));
    t.check(std::fabs(neutral.lbgi) < 0.01 && std::fabs(neutral.hbgi) < 0.01, "constant 112.5 trace");

    std::vector<double> sine;
    for (int i = 0; i < 288 * 7; ++i) sine.push_back(150.0 + 60.0 * std::sin(2.0 * std::numbers::pi * i / 96.0));
    const double m = metrics::mage(sine).value;
    t.check(std::fabs(m - 120.0) <= 1e-6, fmt::format("sinusoid MAGE {}", m));

    for (std::size_t n = 6; n <= 10; ++n) {
        for (int rep = 0; rep < 400; ++rep) {
            std::vector<double> x(n), y(n);
            for (std::size_t k = 0; k < n; ++k) {
                // a mix of continuous values and small integers (ties, zero differences)
                const bool coarse = rep % 2 == 0;
                x[k] = coarse ? static_cast<double>(rng.below(6)) : rng.normal(0.0, 1.0);
                y[k] = coarse ? static_cast<double>(rng.below(6)) : rng.normal(0.3, 1.0);
            }
            const auto w = metrics::wilcoxon_signed_rank(x, y);
            const double p = oracle::signed_rank_p_enumerated(x, y);
            t.check(w.exact && std::fabs(w.p - p) <= 1e-12, fmt::format("Wilcoxon n={} p={} vs {}", n, w.p, p));
        }
    }
    return {t.ok(), t.summary()};
}

// ---------------------------------------------------------------- 5

struct WeekRow {
    std::string label;
    metrics::WeeklySummary s1, s2;
};

double median_of(std::vector<double> v) { return metrics::field_stats(std::move(v)).median; }

Outcome directional() {
    auto cfg = scenario::parse_run_config("scenarios: [S1, S2]\npatients: 20\n");
    const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto results = report::run_all(cfg, threads);
    if (results.failures() > 0) {
        return {false, fmt::format("{} simulator failures", results.failures())};
    }
    const auto weeks = scenario::evaluation_weeks(cfg.base.timeline);
    std::map<scenario::ScenarioId, std::vector<scenario::TrialResult>> trials;
    for (auto id : cfg.scenarios) trials[id] = results.scenario_trials(id);

    std::cout << "  week    S1 <70%  S2 <70%  S1 LBGI  S2 LBGI  S1 HBGI  S2 HBGI  S1 TDI   S2 TDI   (cohort medians)\n";
    std::map<std::string, std::map<scenario::ScenarioId, metrics::WeeklySummary>> table;
    for (const auto& w : weeks) {
        for (auto id : cfg.scenarios) table[w.label][id] = scenario::weekly_summary(trials[id], w);
        auto below = [&](scenario::ScenarioId id) {
            std::vector<double> v;
            for (const auto& p : table[w.label][id].patients) v.push_back(p.bands.below_70());
            return median_of(v);
        };
        const auto& a = table[w.label][scenario::ScenarioId::S1];
        const auto& b = table[w.label][scenario::ScenarioId::S2];
        std::cout << fmt::format("  {:<6} {:8.2f} {:8.2f} {:8.2f} {:8.2f} {:8.2f} {:8.2f} {:8.2f} {:8.2f}\n", w.label,
                                 below(scenario::ScenarioId::S1), below(scenario::ScenarioId::S2), a.lbgi.median,
                                 b.lbgi.median, a.hbgi.median, b.hbgi.median, a.tdi.median, b.tdi.median);
    }

    std::vector<std::string> notes;
    bool ok = true;
    auto verdict = [&](const std::string& tag, bool pass, const std::string& what) {
        notes.push_back(fmt::format("({}) {} {}", tag, pass ? "ok" : "FAIL", what));
        ok = ok && pass;
    };

    for (auto id : cfg.scenarios) {
        const std::string sid(scenario::to_string(id));
        const auto& w1 = table["W1"][id];
        const auto& w13 = table["W13"][id];
        const auto& w14 = table["W14"][id];

        // (a) time below 70 falls from W1 to W13, paired test across patients
        std::vector<double> b1, b13;
        for (std::size_t i = 0; i < w1.patients.size(); ++i) {
            b1.push_back(w1.patients[i].bands.below_70());
            b13.push_back(w13.patients[i].bands.below_70());
        }
        const auto test = metrics::wilcoxon_signed_rank(b1, b13);
        const double m1 = median_of(b1), m13 = median_of(b13);
        verdict("a", m13 < m1 && test.p < 0.05,
                fmt::format("{} median <70%: W1 {:.2f} -> W13 {:.2f}, p = {:.3g}", sid, m1, m13, test.p));

        // (b) LBGI falls, HBGI stays minimal
        verdict("b", w13.lbgi.median < w1.lbgi.median && w13.hbgi.median < 5.0,
                fmt::format("{} median LBGI W1 {:.2f} -> W13 {:.2f}, HBGI W13 {:.2f}", sid, w1.lbgi.median,
                            w13.lbgi.median, w13.hbgi.median));

        // (c) weekly change of the cohort means below 10% after W3
        double worst = 0.0;
        std::string worst_at;
        for (int k = 4; k < 13; ++k) {
            const auto& cur = table[fmt::format("W{}", k)][id];
            const auto& nxt = table[fmt::format("W{}", k + 1)][id];
            for (auto [name, a, b] : {std::tuple{"LBGI", cur.lbgi.mean, nxt.lbgi.mean},
                                      std::tuple{"HBGI", cur.hbgi.mean, nxt.hbgi.mean}}) {
                const double change = std::fabs(b - a) / std::max(std::fabs(a), 1e-12);
                if (change > worst) {
                    worst = change;
                    worst_at = fmt::format("{} W{}->W{}", name, k, k + 1);
                }
            }
        }
        verdict("c", worst < 0.10, fmt::format("{} largest weekly change {:.1f}% ({})", sid, 100.0 * worst, worst_at));

        // (e) fixed-SI week is no worse than the last variable week
        auto outside = [](const metrics::WeeklySummary& s) {
            std::vector<double> v;
            for (const auto& p : s.patients) v.push_back(p.bands.outside_target());
            return median_of(v);
        };
        verdict("e", outside(w14) <= outside(w13),
                fmt::format("{} median outside target W13 {:.2f}% vs W14 {:.2f}%", sid, outside(w13), outside(w14)));
    }

    // (d) SMBG weekly median TDI within 15% of CGM
    double worst_tdi = 0.0;
    std::string worst_week;
    for (const auto& w : weeks) {
        const double a = table[w.label][scenario::ScenarioId::S1].tdi.median;
        const double b = table[w.label][scenario::ScenarioId::S2].tdi.median;
        const double dev = std::fabs(b - a) / a;
        if (dev > worst_tdi) {
            worst_tdi = dev;
            worst_week = w.label;
        }
    }
    verdict("d", worst_tdi <= 0.15, fmt::format("largest S2/S1 median TDI gap {:.1f}% ({})", 100.0 * worst_tdi, worst_week));

    std::string detail = "n = 20, D2-D98, S1 and S2";
    for (const auto& n : notes) detail += "\n    " + n;
    return {ok, detail};
}

// ---------------------------------------------------------------- 6

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / fmt::format("abba-acceptance-{}", ::getpid());
    fs::remove_all(base);
    const std::string common = "run -s S1,S2,S3,S4 -n 6 --seed 11";
    auto run = [&](const std::string& dir, int threads) {
        const std::string cmd = fmt::format("\"{}\" {} -j {} -o \"{}\" > /dev/null 2>&1", ABBA_CLI, common, threads,
                                            (base / dir).string());
        return std::system(cmd.c_str());
    };
    const int n = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    const int ra = run("a", 1), rb = run("b", 1), rc = run("c", n);
    if (ra != 0 || rb != 0 || rc != 0) {
        fs::remove_all(base);
        return {false, fmt::format("CLI exit codes {}, {}, {}", ra, rb, rc)};
    }
    const auto a = read_tree(base / "a");
    const auto b = read_tree(base / "b");
    const auto c = read_tree(base / "c");
    std::size_t bytes = 0;
    for (const auto& [name, content] : a) bytes += content.size();
    fs::remove_all(base);
    const bool ok = !a.empty() && a == b && a == c;
    return {ok, fmt::format("S1-S4, 6 patients, full timeline: {} files, {} bytes; repeat {}, 1 vs {} threads {}",
                            a.size(), bytes, a == b ? "identical" : "DIFFERENT", n, a == c ? "identical" : "DIFFERENT")};
}

// ---------------------------------------------------------------- 7

Outcome protocol() {
    Tally t;
    Rng rng(7);
    // round trip and corruption detection
    for (int i = 0; i < 1000; ++i) {
        const auto m = gen::message(rng);
        const auto wire = link::encode(m);
        const auto r = link::decode(wire);
        t.check(r.status == link::DecodeStatus::Ok && *r.message == m && link::encode(*r.message) == wire, "round trip");
        std::string bad = wire;
        const std::size_t pos = rng.below(bad.size() - 1);
        bad[pos] = static_cast<char>(bad[pos] ^ static_cast<char>(1 + rng.below(255)));
        t.check(link::decode(bad).status == link::DecodeStatus::Corrupt, "flipped byte accepted");
    }
    // loss, duplication and crash-restart patterns
    int worst_rounds = 0;
    for (std::uint64_t pattern = 0; pattern < 2000; ++pattern) {
        const bool crashes = pattern % 2 == 1;
        Rng pr(50000 + pattern);
        net::Net n(pattern, pr.uniform(0.0, 0.6), pr.uniform(0.0, 0.3));
        const int events = static_cast<int>(5 + pr.below(60));
        for (int i = 0; i < events; ++i) {
            const auto roll = pr.below(10);
            if (roll < 6) {
                n.emit(pr.below(2) == 0, gen::data_payload(pr));
            } else if (roll < 8) {
                for (int k = static_cast<int>(pr.below(5)); k > 0 && n.step(); --k) {
                }
            } else if (roll < 9 || !crashes) {
                n.send(pr.below(2) == 0, pr.below(2) == 0 ? n.a.sync_request() : n.b.sync_request());
            } else {
                n.restart(pr.below(2) == 0);
            }
        }
        n.drain();
        int rounds = 0;
        while (!n.converged() && rounds < 500) {
            n.sync_round();
            ++rounds;
        }
        worst_rounds = std::max(worst_rounds, rounds);
        t.check(n.converged() && link::gap_free(n.a.state()) && link::gap_free(n.b.state()),
                fmt::format("pattern {} did not converge", pattern));
    }
    // the end-to-end demo over a socket with heavy loss
    for (std::uint64_t seed : {1, 2}) {
        link::DemoOptions opt;
        opt.drop_rate = 0.5;
        opt.seed = seed;
        opt.address = (fs::temp_directory_path() / fmt::format("abba-accept-{}-{}.sock", ::getpid(), seed)).string();
        const auto r = link::run_pump_link_demo(opt);
        t.check(r.converged && r.pump_history == r.advisor_history, fmt::format("demo seed {}", seed));
    }
    return {t.ok(), fmt::format("1000 records, 1000 loss and 1000 crash-restart patterns (at most {} sync rounds), "
                                "2 socket demos: {}",
                                worst_rounds, t.summary())};
}

// ---------------------------------------------------------------- 8

Outcome simulator_sanity() {
    Tally t;
    const auto cohort = sim::generate_cohort(100, 1);
    double worst_drift = 0.0;
    for (const auto& p : cohort) {
        const auto eq = sim::basal_equilibrium(p, p.si, p.basal_need);
        auto s = eq;
        double drift = 0.0;
        for (int m = 0; m < 1440; ++m) {
            s = sim::step(p, s, p.si, p.basal_need, 1.0);
            drift = std::max(drift, std::fabs(s.glucose - eq.glucose));
        }
        worst_drift = std::max(worst_drift, drift);
        t.check(drift < 0.5, fmt::format("{} drifts {:.3f} mg/dL", p.id, drift));

        auto mean_glucose = [&](double rate) {
            auto x = sim::basal_equilibrium(p, p.si, p.standard_treatment.br);
            double sum = 0.0;
            for (int m = 0; m < 1440; ++m) {
                x = sim::step(p, x, p.si, rate, 1.0);
                sum += x.glucose;
            }
            return sum / 1440.0;
        };
        const double br = p.standard_treatment.br;
        const double lo = mean_glucose(0.9 * br), mid = mean_glucose(br), hi = mean_glucose(1.1 * br);
        t.check(lo > mid && mid > hi, fmt::format("{} not monotone in insulin", p.id));
    }
    return {t.ok(), fmt::format("100 patients, worst 24 h drift {:.2e} mg/dL; {}", worst_drift, t.summary())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "algebraic core (1e5 cases per suite)", 30.0, algebraic_core},
        {2, "policy gradient vs central differences", 5.0, gradient_check},
        {3, "feature extraction vs brute-force evaluator", 10.0, feature_oracle},
        {4, "metrics oracles", 30.0, metrics_oracles},
        {5, "directional reproduction", 300.0, directional},
        {6, "determinism of output trees", 300.0, determinism},
        {7, "pump-link protocol", 60.0, protocol},
        {8, "simulator sanity", 60.0, simulator_sanity},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.ok && in_time;
        if (!pass) ++failed;
        std::cout << fmt::format("criterion {} {}: {} ({:.2f} s, limit {:.0f} s{})\n    {}\n", c.id,
                                 pass ? "PASS" : "FAIL", c.name, secs, c.limit_s, in_time ? "" : ", TOO SLOW", o.detail)
                  << std::flush;
    }
    return failed == 0 ? 0 : 1;
}
