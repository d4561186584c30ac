#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "sybilsim/sybilsim.hpp"

using namespace sybilsim;

namespace {

struct Options {
    std::string config;
    bool full_scale = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    bool emit_plot_data = false;
};

ExperimentSpec load_spec(const Options& o, const std::string& kind) {
    auto cfg = o.config.empty() ? ConfigMap{} : ConfigMap::load(o.config);
    auto spec = spec_from_config(cfg, kind);
    if (o.full_scale) apply_full_scale(spec);
    if (o.seed_given) spec.seed = o.seed;
    if (!o.out.empty()) spec.output_dir = o.out;
    spec.emit_plot_data = o.emit_plot_data;
    spec.check();
    return spec;
}

void report(const std::vector<std::string>& files) {
    for (const auto& f : files) std::cout << "wrote " << f << '\n';
}

int execute(const std::string& command, const Options& o) {
    static const std::map<std::string, std::string> kinds{{"run", "single_run"},
                                                          {"sweep", "avt_sweep"},
                                                          {"heuristics", "heuristic_sweep"},
                                                          {"assumptions", "assumptions"},
                                                          {"gmcom-failure", "gmcom_failure"}};
    auto spec = load_spec(o, kinds.at(command));
    if (command == "run") {
        auto out = single_run(spec);
        const auto& r = out.result;
        std::cout << "defense " << defense_name(spec.defense) << " T " << fmt_num(spec.adversary.rate_T) << '\n'
                  << "A " << fmt_num(r.alg_rate()) << " adversary " << fmt_num(r.adv_rate()) << '\n'
                  << "purges " << r.purges << " good_joins " << r.good_joins << " bad_joins " << r.bad_joins << '\n'
                  << "max_bad_fraction " << fmt_num(r.invariants.max_bad_fraction) << " valid " << (r.valid ? 1 : 0)
                  << '\n';
        report(out.files);
    } else if (command == "sweep" || command == "heuristics") {
        auto res = command == "sweep" ? avt_sweep(spec) : heuristic_sweep(spec);
        report(res.files);
    } else if (command == "assumptions") {
        auto res = assumptions(spec);
        const auto& c = res.combined;
        std::cout << spec.network << " a1 [" << fmt_num(c.a1_low) << ", " << fmt_num(c.a1_high) << "] a2 ["
                  << fmt_num(c.a2_low) << ", " << fmt_num(c.a2_high) << "] c_je [" << fmt_num(c.c_je_low) << ", "
                  << fmt_num(c.c_je_high) << "]\n";
        report(res.files);
    } else {
        report(gmcom_failure(spec).files);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proof-of-work Sybil defense simulator"};
    app.require_subcommand(1);
    Options o;
    for (auto name : {"run", "sweep", "heuristics", "assumptions", "gmcom-failure"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config, "key=value config file");
        sub->add_flag("--paper-scale", o.full_scale, "full T grid, 20 runs, 10^4 s");
        sub->add_option("--seed", o.seed, "base seed")->each([&](const std::string&) { o.seed_given = true; });
        sub->add_option("--out", o.out, "output directory");
        sub->add_flag("--emit-plot-data", o.emit_plot_data, "add log2 columns");
    }
    CLI11_PARSE(app, argc, argv);
    auto command = app.get_subcommands().front()->get_name();
    try {
        return execute(command, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
