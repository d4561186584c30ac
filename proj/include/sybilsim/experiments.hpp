#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sybilsim/adversary.hpp"
#include "sybilsim/assumptions.hpp"
#include "sybilsim/baselines.hpp"
#include "sybilsim/churn.hpp"
#include "sybilsim/config.hpp"
#include "sybilsim/engine.hpp"
#include "sybilsim/epochs.hpp"
#include "sybilsim/error.hpp"
#include "sybilsim/format.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/trace.hpp"

namespace sybilsim {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker; callers store results by index.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::vector<double> desk_T_grid() {
    std::vector<double> g{0.0};
    for (int k = 0; k <= 30; k += 2) g.push_back(std::ldexp(1.0, k));
    return g;
}

inline std::vector<double> full_T_grid() {
    std::vector<double> g{0.0};
    for (int k = 0; k <= 30; ++k) g.push_back(std::ldexp(1.0, k));
    return g;
}

struct ExperimentSpec {
    std::string kind = "single_run";
    std::string network = "gnutella";
    std::vector<double> T_values = desk_T_grid();
    std::size_t runs = 5;
    std::uint64_t seed = 1;
    double sim_seconds = 2000.0;
    std::string output_dir = ".";
    std::vector<std::string> defenses;
    unsigned threads = 0;
    double alpha = 1.0 / 18.0;
    double sample_interval = 1.0;
    bool emit_plot_data = false;

    GeneratorSpec churn;
    std::string trace_file;
    std::size_t epochs = 1000;  // assumptions experiment

    std::string defense_selector = "togcom";
    DefenseConfig defense;
    AdversaryConfig adversary;

    std::size_t n0 = 0;
    double initial_bad_fraction = 0.0;

    A2Options a2;
    std::vector<double> X_values;  // gmcom_failure

    void check() const {
        static const std::vector<std::string> kinds{"avt_sweep", "heuristic_sweep", "gmcom_failure", "assumptions",
                                                    "single_run"};
        static const std::vector<std::string> networks{"bitcoin_trace", "bittorrent", "ethereum", "gnutella"};
        if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
            throw ConfigError("unknown experiment kind '" + kind + "'");
        if (std::find(networks.begin(), networks.end(), network) == networks.end())
            throw ConfigError("unknown network '" + network + "'");
        if (runs < 1) throw ConfigError("runs must be at least 1");
        if ((kind == "avt_sweep" || kind == "heuristic_sweep") && T_values.empty())
            throw ConfigError("T_values must not be empty for sweeps");
        for (double T : T_values)
            if (!(T >= 0) || !std::isfinite(T)) throw ConfigError("T values must be finite and non-negative");
        if (!(sim_seconds > 0)) throw ConfigError("sim_seconds must be positive");
        if (!(alpha > 0 && alpha < 1.0 / 6.0)) throw ConfigError("alpha must lie in (0, 1/6)");
        if (network == "bitcoin_trace" && trace_file.empty() && kind != "gmcom_failure")
            throw ConfigError("network bitcoin_trace needs churn.trace_file");
        if (!(initial_bad_fraction >= 0 && initial_bad_fraction <= alpha))
            throw ConfigError("initial_bad_fraction must lie in [0, alpha]");
        check_spec(churn);
        adversary.check();
        defense.heuristics.check();
    }
};

inline std::vector<std::string> default_defenses(const std::string& kind) {
    if (kind == "heuristic_sweep") return {"togcom", "tgch", "tgch_sf92", "tgch_sf98"};
    return {"togcom", "gmcom", "ccom", "sybilcontrol", "remp-1e4", "remp-1e7"};
}

inline std::vector<double> default_X_values() {
    std::vector<double> x;
    for (int k = 0; k <= 30; ++k) x.push_back(std::ldexp(1.0, k));
    return x;
}

inline void apply_full_scale(ExperimentSpec& s) {
    s.T_values = full_T_grid();
    s.runs = 20;
    s.sim_seconds = 1e4;
}

// Builds a spec from config keys; kind may come from the CLI subcommand.
inline ExperimentSpec spec_from_config(const ConfigMap& c, const std::string& kind_override = "") {
    ExperimentSpec s;
    s.kind = kind_override.empty() ? c.str("experiment.kind", s.kind) : kind_override;
    if (!kind_override.empty()) c.str("experiment.kind", "");
    s.network = c.str("experiment.network", s.network);
    s.T_values = c.numbers("experiment.T_values", s.T_values);
    s.runs = c.count("experiment.runs", s.runs);
    s.seed = c.count("experiment.seed", s.seed);
    s.sim_seconds = c.num("experiment.sim_seconds", s.sim_seconds);
    s.output_dir = c.str("experiment.output_dir", s.output_dir);
    s.defenses = c.list("experiment.defenses", default_defenses(s.kind));
    s.threads = static_cast<unsigned>(c.count("experiment.threads", 0));
    s.alpha = c.num("experiment.alpha", s.alpha);
    s.sample_interval = c.num("experiment.sample_interval", s.sample_interval);
    s.X_values = c.numbers("experiment.X_values", default_X_values());

    if (s.network != "bitcoin_trace") s.churn = network_preset(s.network);
    auto family = c.str("churn.family", "");
    if (family == "weibull") {
        s.churn.family = Family::WeibullSession;
    } else if (family == "exponential") {
        s.churn.family = Family::ExpSessionPoissonArrival;
    } else if (!family.empty()) {
        throw ConfigError("churn.family must be weibull or exponential");
    }
    auto unit = c.str("churn.scale_unit", "seconds");
    double mult = unit == "seconds" ? 1.0 : unit == "minutes" ? 60.0 : unit == "hours" ? 3600.0 : -1.0;
    if (mult < 0) throw ConfigError("churn.scale_unit must be seconds, minutes or hours");
    if (c.has("churn.scale")) s.churn.scale = c.num("churn.scale", 0) * mult;
    s.churn.shape = c.num("churn.shape", s.churn.shape);
    s.churn.arrival_mean = c.num("churn.arrival_mean", s.churn.arrival_mean);
    s.churn.n_init = c.count("churn.n_init", s.churn.n_init);
    s.trace_file = c.str("churn.trace_file", "");
    s.epochs = c.count("churn.epochs", s.epochs);

    s.adversary.rate_T = c.num("adversary.rate", 0.0);
    auto strat = c.str("adversary.strategy", "greedy_uniform");
    if (strat == "greedy_uniform") {
        s.adversary.strategy = Strategy::GreedyUniform;
    } else if (strat == "burst") {
        s.adversary.strategy = Strategy::Burst;
    } else {
        throw ConfigError("adversary.strategy must be greedy_uniform or burst");
    }
    s.adversary.pays_purge = c.flag("adversary.pays_purge", s.adversary.pays_purge);
    s.adversary.burst_period = c.num("adversary.burst_period", s.adversary.burst_period);

    auto& d = s.defense;
    d.c_comm = c.num("defense.c_comm", d.c_comm);
    d.warmup_seconds = c.num("defense.warmup_seconds", d.warmup_seconds);
    d.jg0 = c.num("defense.jg0", c.num("bootstrap.jg0", d.jg0));
    d.truncate_window = c.flag("defense.truncate_window", d.truncate_window);
    d.failure_factor = c.num("defense.failure_factor", d.failure_factor);
    d.test_period = c.num("defense.test_period", d.test_period);
    d.test_cost = c.count("defense.test_cost", d.test_cost);
    d.heuristics.h2_margin = c.num("defense.h2_margin", d.heuristics.h2_margin);
    d.heuristics.c_je_high = c.num("defense.h2_c_je_high", d.heuristics.c_je_high);
    s.defense_selector = c.str("defense.name", s.defense_selector);
    d = with_defense(d, s.defense_selector);
    d.heuristics.h1_enabled = c.flag("defense.h1", d.heuristics.h1_enabled);
    d.heuristics.h2_enabled = c.flag("defense.h2", d.heuristics.h2_enabled);
    d.heuristics.h3_accuracy = c.num("defense.h3_accuracy", d.heuristics.h3_accuracy);

    s.n0 = c.count("bootstrap.n0", 0);
    s.initial_bad_fraction = c.num("bootstrap.initial_bad_fraction", 0.0);

    s.a2.resolution = c.num("analysis.a2_resolution", s.a2.resolution);
    s.a2.exact_limit = c.count("analysis.a2_exact_limit", s.a2.exact_limit);
    s.a2.random_pairs = c.count("analysis.a2_random_pairs", s.a2.random_pairs);

    auto extra = c.unused();
    if (!extra.empty()) throw ConfigError("unknown config key '" + extra.front() + "'");
    s.check();
    return s;
}

// ---- output helpers --------------------------------------------------------

inline void ensure_writable(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("output directory " + dir + " cannot be created");
    auto probe = fs::path(dir) / ".sybilsim_write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw IoError("output directory " + dir + " is not writable");
    }
    fs::remove(probe, ec);
}

inline std::string write_output(const std::string& dir, const std::string& name, const std::string& body) {
    auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << body;
    if (!out) throw IoError("write failed for " + path);
    return path;
}

struct Summary {
    std::size_t n = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
};

inline Summary summarize(const std::vector<double>& xs) {
    Summary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / double(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / double(xs.size() - 1));
    } else {
        s.sd = 0.0;
    }
    return s;
}

inline double log2_or_nan(double x) { return x > 0 ? std::log2(x) : std::numeric_limits<double>::quiet_NaN(); }

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs two or more paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw DomainError("slope needs distinct x values");
    return sxy / sxx;
}

// ---- traces ---------------------------------------------------------------

inline std::uint64_t trace_seed(std::uint64_t base, std::size_t run) { return derive_seed(base, {0x7472616365, run}); }

// Churn for run r: the loaded trace for bitcoin_trace, otherwise a fresh
// generated trace at least `duration` long and with `min_epochs` epochs.
inline ChurnTrace experiment_trace(const ExperimentSpec& s, std::size_t run, double duration, std::size_t min_epochs = 0) {
    if (!s.trace_file.empty()) return load_trace_file(s.trace_file);
    auto g = s.churn;
    g.duration = duration;
    g.min_epochs = min_epochs;
    return generate_trace(g, trace_seed(s.seed, run));
}

// ---- single run -----------------------------------------------------------

inline SimConfig sim_config(const ExperimentSpec& s, const DefenseConfig& d, std::uint64_t seed) {
    SimConfig cfg;
    cfg.alpha = s.alpha;
    cfg.t_end = s.sim_seconds;
    cfg.seed = seed;
    cfg.defense = d;
    cfg.n0 = s.n0;
    cfg.initial_bad_fraction = s.initial_bad_fraction;
    cfg.sample_interval = s.sample_interval;
    return cfg;
}

struct SingleRunOutput {
    SimResult result;
    std::vector<std::string> files;
};

inline SingleRunOutput single_run(const ExperimentSpec& s) {
    ensure_writable(s.output_dir);
    auto trace = experiment_trace(s, 0, s.sim_seconds);
    SingleRunOutput out;
    if (s.defense.kind == DefenseKind::Remp) throw ConfigError("single_run cannot simulate remp; it is closed form");
    out.result = run(sim_config(s, s.defense, derive_seed(s.seed, {0x72756e})), trace, s.adversary);
    out.files.push_back(write_output(s.output_dir, "single_run_" + s.network + ".csv", timeseries_csv(out.result)));
    out.files.push_back(write_output(s.output_dir, "iterations_" + s.network + ".csv", ledger_csv(out.result)));
    return out;
}

// ---- spend-rate sweeps ----------------------------------------------------

struct RunPoint {
    std::string defense;
    double T = 0;
    std::size_t run = 0;
    double A = 0;
    double adv_rate = 0;
    double max_bad_fraction = 0;
    std::uint64_t population_violations = 0;
    std::uint64_t purges = 0;
    bool valid = true;
};

struct SweepRow {
    std::string defense;
    double T = 0;
    std::size_t runs = 0;
    std::size_t valid_runs = 0;
    Summary A;
    double mean_adv_rate = std::numeric_limits<double>::quiet_NaN();
    double max_bad_fraction = 0;
    std::uint64_t population_violations = 0;
    bool valid = true;
};

struct SweepResult {
    std::vector<RunPoint> points;  // ordered by (defense, T, run)
    std::vector<SweepRow> rows;    // ordered by (defense, T)
    std::vector<std::string> files;

    const SweepRow& row(const std::string& defense, double T) const {
        for (const auto& r : rows)
            if (r.defense == defense && r.T == T) return r;
        throw DomainError("no sweep row for " + defense + " at T=" + fmt_num(T));
    }
};

inline std::uint64_t run_seed(std::uint64_t base, std::size_t run) { return derive_seed(base, {0x73696d, run}); }

// Core of both sweeps; traces are shared across defenses and T for a given
// run index so that comparisons are paired.
inline SweepResult sweep(const ExperimentSpec& s, const std::vector<std::string>& defenses) {
    std::vector<ChurnTrace> traces(s.runs);
    parallel_for(s.runs, s.threads, [&](std::size_t r) { traces[r] = experiment_trace(s, r, s.sim_seconds); });

    std::vector<DefenseConfig> configs;
    for (const auto& name : defenses) configs.push_back(with_defense(s.defense, name));

    std::size_t nt = s.T_values.size();
    std::vector<RunPoint> points(defenses.size() * nt * s.runs);
    parallel_for(points.size(), s.threads, [&](std::size_t i) {
        std::size_t r = i % s.runs;
        std::size_t ti = (i / s.runs) % nt;
        std::size_t di = i / (s.runs * nt);
        auto& p = points[i];
        p.defense = defenses[di];
        p.T = s.T_values[ti];
        p.run = r;
        const auto& d = configs[di];
        if (d.kind == DefenseKind::Remp) {
            p.A = remp_spend_rate(s.alpha, d.remp_t_max);
            p.adv_rate = p.T;
            p.valid = RempParams{d.remp_t_max, 1.0, s.alpha, 0.0}.valid(p.T);
            return;
        }
        auto adv = s.adversary;
        adv.rate_T = p.T;
        auto cfg = sim_config(s, d, run_seed(s.seed, r));
        auto res = run(cfg, traces[r], adv);
        p.A = res.alg_rate();
        p.adv_rate = res.adv_rate();
        p.max_bad_fraction = res.invariants.max_bad_fraction;
        p.population_violations = res.invariants.population_violations;
        p.purges = res.purges;
        p.valid = res.valid;
    });

    SweepResult out;
    for (std::size_t k = 0; k < points.size(); k += s.runs) {
        SweepRow row;
        row.defense = points[k].defense;
        row.T = points[k].T;
        row.runs = s.runs;
        std::vector<double> as, advs;
        for (std::size_t r = 0; r < s.runs; ++r) {
            const auto& p = points[k + r];
            row.max_bad_fraction = std::max(row.max_bad_fraction, p.max_bad_fraction);
            row.population_violations += p.population_violations;
            if (!p.valid) continue;
            as.push_back(p.A);
            advs.push_back(p.adv_rate);
        }
        row.valid_runs = as.size();
        row.valid = row.valid_runs == row.runs;
        row.A = summarize(as);
        row.mean_adv_rate = summarize(advs).mean;
        out.rows.push_back(row);
    }
    out.points = std::move(points);
    return out;
}

inline std::string sweep_csv(const SweepResult& r, bool plot) {
    std::ostringstream out;
    out << "defense,T,runs,valid_runs,mean_A,sd_A,mean_adv_rate,max_bad_fraction,population_violations,valid";
    if (plot) out << ",log2_T,log2_mean_A";
    out << '\n';
    for (const auto& row : r.rows) {
        out << row.defense << ',' << fmt_num(row.T) << ',' << row.runs << ',' << row.valid_runs << ','
            << fmt_num(row.A.mean) << ',' << fmt_num(row.A.sd) << ',' << fmt_num(row.mean_adv_rate) << ','
            << fmt_num(row.max_bad_fraction) << ',' << row.population_violations << ',' << (row.valid ? 1 : 0);
        if (plot) out << ',' << fmt_num(log2_or_nan(row.T)) << ',' << fmt_num(log2_or_nan(row.A.mean));
        out << '\n';
    }
    return out.str();
}

inline std::string sweep_runs_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "defense,T,run,A,adv_rate,max_bad_fraction,population_violations,purges,valid\n";
    for (const auto& p : r.points)
        out << p.defense << ',' << fmt_num(p.T) << ',' << p.run << ',' << fmt_num(p.A) << ',' << fmt_num(p.adv_rate)
            << ',' << fmt_num(p.max_bad_fraction) << ',' << p.population_violations << ',' << p.purges << ','
            << (p.valid ? 1 : 0) << '\n';
    return out.str();
}

inline SweepResult run_sweep(const ExperimentSpec& s, const std::string& experiment) {
    ensure_writable(s.output_dir);
    auto res = sweep(s, s.defenses);
    res.files.push_back(write_output(s.output_dir, experiment + "_" + s.network + ".csv", sweep_csv(res, s.emit_plot_data)));
    res.files.push_back(write_output(s.output_dir, experiment + "_" + s.network + "_runs.csv", sweep_runs_csv(res)));
    return res;
}

inline SweepResult avt_sweep(const ExperimentSpec& s) { return run_sweep(s, "avt_sweep"); }
inline SweepResult heuristic_sweep(const ExperimentSpec& s) { return run_sweep(s, "heuristic_sweep"); }

// ---- GMCom failure scenario -------------------------------------------------

struct GMComFailureRow {
    double X = 0;
    double A_gmcom = 0;  // spend over the one-step window holding the final join
    double A_ccom = 0;
    double run_A_gmcom = 0;  // whole-run averages
    double run_A_ccom = 0;
    std::uint64_t final_price_gmcom = 0;
};

struct GMComFailureResult {
    std::vector<GMComFailureRow> rows;
    std::vector<std::string> files;
};

inline constexpr std::size_t kFailurePopulation = 10000;
inline constexpr double kFailureIteration = 910.0;  // events per iteration: 11 * 910 >= 10000

// 10,000 IDs at time 0; from step 1 on one event per step, departures on odd
// steps and joins on even ones. Departing IDs are drawn from those present
// before the current iteration. Iterations close on the joins at steps 910
// and 1820; a final join follows 1/X after that.
inline ChurnTrace gmcom_failure_trace(double X, std::uint64_t seed) {
    if (!(X > 0)) throw DomainError("X must be positive");
    ChurnTrace tr;
    Rng rng(seed);
    std::vector<std::uint32_t> eligible, fresh;
    for (std::size_t i = 0; i < kFailurePopulation; ++i) {
        tr.events.push_back({0.0, tr.id_count, TraceKind::Join});
        eligible.push_back(tr.id_count++);
    }
    tr.n_init = kFailurePopulation;
    auto steps = static_cast<std::size_t>(2 * kFailureIteration);
    for (std::size_t k = 1; k <= steps; ++k) {
        double t = double(k);
        if (k % 2 == 1) {
            std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
            auto at = pick(rng);
            tr.events.push_back({t, eligible[at], TraceKind::Depart});
            eligible[at] = eligible.back();
            eligible.pop_back();
        } else {
            tr.events.push_back({t, tr.id_count, TraceKind::Join});
            fresh.push_back(tr.id_count++);
        }
        if (k == static_cast<std::size_t>(kFailureIteration)) {
            eligible.insert(eligible.end(), fresh.begin(), fresh.end());
            fresh.clear();
        }
    }
    tr.events.push_back({double(steps) + 1.0 / X, tr.id_count++, TraceKind::Join});
    validate(tr);
    return tr;
}

inline GMComFailureResult gmcom_failure(const ExperimentSpec& s) {
    ensure_writable(s.output_dir);
    const double end = 2 * kFailureIteration + 1.0;
    GMComFailureResult out;
    out.rows.resize(s.X_values.size());
    parallel_for(s.X_values.size(), s.threads, [&](std::size_t i) {
        double X = s.X_values[i];
        auto trace = gmcom_failure_trace(X, derive_seed(s.seed, {0x676d, i}));
        auto& row = out.rows[i];
        row.X = X;
        for (auto name : {"gmcom", "ccom"}) {
            SimConfig cfg;
            cfg.alpha = s.alpha;
            cfg.t_end = end;
            cfg.seed = derive_seed(s.seed, {0x676d, i, 1});
            cfg.defense = with_defense(s.defense, name);
            cfg.defense.jg0 = 0.5;
            cfg.sample_interval = 0;
            auto res = run(cfg, trace, AdversaryConfig{});
            std::uint64_t last = 0, final_entrance = 0;
            for (const auto& r : res.ledger.rows)
                if (r.iteration >= 3) {
                    last += r.alg_entrance + r.alg_purge;
                    final_entrance += r.alg_entrance;
                }
            double window = end - 2 * kFailureIteration;
            if (std::string(name) == "gmcom") {
                row.A_gmcom = double(last) / window;
                row.run_A_gmcom = res.alg_rate();
                row.final_price_gmcom = final_entrance;
            } else {
                row.A_ccom = double(last) / window;
                row.run_A_ccom = res.alg_rate();
            }
        }
    });
    std::ostringstream csv;
    csv << "X,A_gmcom,A_ccom,run_A_gmcom,run_A_ccom,final_price_gmcom";
    if (s.emit_plot_data) csv << ",log2_X,log2_A_gmcom,log2_A_ccom";
    csv << '\n';
    for (const auto& r : out.rows) {
        csv << fmt_num(r.X) << ',' << fmt_num(r.A_gmcom) << ',' << fmt_num(r.A_ccom) << ',' << fmt_num(r.run_A_gmcom)
            << ',' << fmt_num(r.run_A_ccom) << ',' << r.final_price_gmcom;
        if (s.emit_plot_data)
            csv << ',' << fmt_num(log2_or_nan(r.X)) << ',' << fmt_num(log2_or_nan(r.A_gmcom)) << ','
                << fmt_num(log2_or_nan(r.A_ccom));
        csv << '\n';
    }
    out.files.push_back(write_output(s.output_dir, "gmcom_failure_" + s.network + ".csv", csv.str()));
    return out;
}

// ---- assumption constants ---------------------------------------------------

struct AssumptionRun {
    std::size_t run = 0;
    std::size_t epochs = 0;
    double a1_low = 1, a1_high = 1, a2_low = 1, a2_high = 1;
    AssumptionConstants constants;
};

struct AssumptionsResult {
    std::vector<AssumptionRun> runs;
    AssumptionConstants combined;  // extremes over all runs
    std::vector<std::string> files;
};

inline AssumptionRun measure_run(const ChurnTrace& trace, std::size_t run, const A2Options& opt) {
    auto ep = detect_epochs(trace, false);
    AssumptionRun r;
    r.run = run;
    r.epochs = ep.size();
    auto [lo, hi] = measure_a1(ep);
    auto a2 = measure_a2(trace, ep, opt);
    r.a1_low = lo;
    r.a1_high = hi;
    r.a2_low = a2.low;
    r.a2_high = a2.high;
    r.constants = AssumptionConstants::derive(lo, hi, a2.low, a2.high);
    return r;
}

inline AssumptionsResult assumptions(const ExperimentSpec& s) {
    ensure_writable(s.output_dir);
    std::size_t runs = s.trace_file.empty() ? s.runs : 1;
    AssumptionsResult out;
    out.runs.resize(runs);
    parallel_for(runs, s.threads, [&](std::size_t r) {
        ChurnTrace trace;
        if (!s.trace_file.empty()) {
            trace = load_trace_file(s.trace_file);
        } else {
            auto g = s.churn;
            g.duration = 0;
            g.min_epochs = s.epochs;
            trace = generate_trace(g, trace_seed(s.seed, r));
        }
        auto opt = s.a2;
        opt.seed = derive_seed(s.seed, {0x6132, r});
        out.runs[r] = measure_run(trace, r, opt);
    });
    double a1l = std::numeric_limits<double>::infinity(), a2l = a1l, a1h = -a1l, a2h = -a1l;
    for (const auto& r : out.runs) {
        a1l = std::min(a1l, r.a1_low);
        a1h = std::max(a1h, r.a1_high);
        a2l = std::min(a2l, r.a2_low);
        a2h = std::max(a2h, r.a2_high);
    }
    out.combined = AssumptionConstants::derive(a1l, a1h, a2l, a2h);

    auto row = [&](std::ostringstream& csv, const AssumptionConstants& c) {
        csv << fmt_num(c.a1_low) << ',' << fmt_num(c.a1_high) << ',' << fmt_num(c.a2_low) << ',' << fmt_num(c.a2_high)
            << ',' << fmt_num(c.c_je_low) << ',' << fmt_num(c.c_je_high) << ',' << fmt_num(c.d1) << ','
            << fmt_num(c.d2) << '\n';
    };
    std::ostringstream table;
    table << "network,a1_low,a1_high,a2_low,a2_high,c_je_low,c_je_high,d1,d2\n" << s.network << ',';
    row(table, out.combined);
    std::ostringstream per;
    per << "network,run,epochs,a1_low,a1_high,a2_low,a2_high,c_je_low,c_je_high,d1,d2\n";
    for (const auto& r : out.runs) {
        per << s.network << ',' << r.run << ',' << r.epochs << ',';
        row(per, r.constants);
    }
    out.files.push_back(write_output(s.output_dir, "assumptions_" + s.network + ".csv", table.str()));
    out.files.push_back(write_output(s.output_dir, "assumptions_" + s.network + "_runs.csv", per.str()));
    return out;
}

}  // namespace sybilsim
