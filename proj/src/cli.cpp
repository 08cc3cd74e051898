#include "pomg/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pomg/config.hpp"
#include "pomg/envs.hpp"
#include "pomg/equilibria.hpp"
#include "pomg/error.hpp"
#include "pomg/kernels.hpp"
#include "pomg/model_io.hpp"
#include "pomg/omle.hpp"
#include "pomg/revealing.hpp"

#ifndef POMG_LAB_VERSION
#define POMG_LAB_VERSION "0.0.0"
#endif

namespace pomg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Fault("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Fault(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Fault("cannot write " + path.string());
    out << text;
}

std::string fmt(double v) {
    if (v == 0) v = 0;  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// --- run -------------------------------------------------------------------

RunConfig config_from_file(const fs::path& path) {
    if (path.extension() == ".json") {
        json doc;
        try {
            std::ifstream in(path);
            if (!in) throw ConfigError(path.string() + ": cannot open config file");
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        if (doc.contains("manifest_version")) {
            if (!doc.contains("config")) throw ConfigError(path.string() + ": manifest has no \"config\"");
            return parse_config(doc["config"].dump(), path.string() + " (config)", path.parent_path());
        }
    }
    return load_config(path);
}

json build_manifest(const RunConfig& config, const Experiment& ex, const OmleResult& result) {
    json libs = {{"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                 {"cli11", CLI11_VERSION},
                 {"openmp", _OPENMP}};
    json m = {
        {"manifest_version", kManifestVersion},
        {"tool", "pomg_lab"},
        {"version", POMG_LAB_VERSION},
        {"compiler", __VERSION__},
        {"libraries", libs},
        {"config", config_to_json(config)},
        {"config_hash", config_hash(config)},
        {"seeds", {{"env", config.env.seed}, {"candidates", config.candidates.seed}, {"run", config.seed}}},
        {"beta", ex.beta},
        {"env_metadata", ex.env_metadata},
        {"outputs", {"episodes.jsonl", "summary.csv", "env.json"}},
        {"regret_oracle", "true-model"},
    };
    if (ex.family.truth_index) m["truth_index"] = *ex.family.truth_index;
    if (result.output_episode) m["output_policy_episode"] = *result.output_episode;
    return m;
}

int cmd_run(const fs::path& config_path, const std::string& output_override) {
    RunConfig config = config_from_file(config_path);
    if (!output_override.empty()) config.output_dir = output_override;
    const auto ex = build_experiment(config);
    const auto result = run_experiment(ex, config);

    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    std::ostringstream jsonl, csv, timings;
    write_episodes_jsonl(jsonl, result.logs, ex.env.spec);
    write_summary_csv(csv, result.logs);
    timings << "k,wall_seconds\n";
    for (const auto& log : result.logs) timings << log.k << ',' << log.wall_seconds << '\n';
    write_text(dir / "episodes.jsonl", jsonl.str());
    write_text(dir / "summary.csv", csv.str());
    write_text(dir / "timings.csv", timings.str());
    write_text(dir / "env.json", model_to_json(ex.env, ex.env_metadata).dump(1) + "\n");
    write_text(dir / "manifest.json", build_manifest(config, ex, result).dump(2) + "\n");

    std::cout << "run " << to_string(config.algorithm) << ": " << result.logs.size() << " episodes, beta "
              << fmt(ex.beta);
    if (!result.logs.empty()) {
        const auto& last = result.logs.back();
        std::cout << ", cumulative " << last.metric << " regret " << fmt(last.cumulative) << ", |B| "
                  << last.set_size;
    }
    std::cout << "\nwrote " << (dir / "episodes.jsonl").string() << ", summary.csv, manifest.json\n";
    return 0;
}

// --- check-revealing ---------------------------------------------------------

int cmd_check_revealing(const fs::path& model_path, int m, double alpha, bool as_json) {
    const auto model = load_model(model_path);
    const auto sigmas = m == 1 ? single_step_sigmas(model) : multi_step_sigmas(model, m);
    const double min_sigma = *std::min_element(sigmas.begin(), sigmas.end());
    const bool pass = min_sigma >= alpha - kAlphaSlack;
    if (as_json) {
        std::cout << json{{"m", m}, {"alpha", alpha}, {"sigmas", sigmas}, {"min_sigma", min_sigma},
                          {"result", pass ? "PASS" : "FAIL"}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << (pass ? "PASS" : "FAIL") << " m=" << m << " alpha=" << fmt(alpha) << " min_sigma=" << fmt(min_sigma)
                  << "\n";
    }
    return 0;
}

// --- solve-nf ------------------------------------------------------------------

int cmd_solve_nf(const fs::path& game_path, const std::string& mode, int nash_budget, bool as_json) {
    const auto game = game_from_json(read_json_file(game_path));
    json out = {{"mode", mode}, {"sizes", game.sizes}};
    if (mode == "zero-sum") {
        if (game.num_players() != 2) throw Fault("zero-sum mode needs a two-player game");
        std::vector<std::vector<double>> u(game.sizes[0], std::vector<double>(game.sizes[1]));
        for (int i = 0; i < game.sizes[0]; ++i)
            for (int j = 0; j < game.sizes[1]; ++j) u[i][j] = game.payoffs[0][i * game.sizes[1] + j];
        const auto sol = solve_zero_sum(u);
        const double value = sol.value == 0 ? 0.0 : sol.value;
        out["value"] = value;
        out["row"] = sol.row;
        out["column"] = sol.column;
        if (!as_json) {
            std::cout << "value " << fmt(value) << "\n";
            return 0;
        }
    } else {
        JointDistribution d;
        if (mode == "nash") d = solve_nash_2p(game, nash_budget);
        else if (mode == "cce") d = solve_cce(game);
        else if (mode == "ce") d = solve_ce(game);
        else throw Fault("unknown mode \"" + mode + "\"");
        out["distribution"] = tensor_to_json(d.prob, d.sizes);
        json values = json::array(), gains = json::array(), swaps = json::array();
        for (int i = 0; i < game.num_players(); ++i) {
            values.push_back(expected_payoff(game, d, i));
            gains.push_back(exploitability(game, d, i));
            swaps.push_back(best_swap_gain(game, d, i));
        }
        out["values"] = values;
        out["exploitability"] = gains;
        out["swap_gain"] = swaps;
        if (!as_json) {
            std::cout << mode << " values";
            for (const auto& v : values) std::cout << ' ' << fmt(v.get<double>());
            std::cout << "\n";
            return 0;
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

// --- gen-env -------------------------------------------------------------------

struct GenEnvArgs {
    std::string kind;
    std::string out;
    std::uint64_t seed = 0;
    int L = 3;
    int H = 4;
    int horizon = 2;
    int states = 2;
    std::vector<int> actions{2, 2};
    std::vector<int> observations{2, 2};
    double alpha_target = 0;
    int m = 2;
    RandomPomgOptions random;
};

int cmd_gen_env(const GenEnvArgs& a) {
    PomgModel model;
    json meta;
    if (a.kind == "hard-singlestep") {
        const auto inst = hard_instance_singlestep(a.L, a.seed);
        model = inst.model;
        meta = inst.metadata();
    } else if (a.kind == "hard-multistep") {
        const auto inst = hard_instance_multistep(a.H, a.seed);
        model = inst.model;
        meta = inst.metadata();
    } else if (a.kind == "random-revealing" || a.kind == "random-multistep") {
        if (a.actions.size() != a.observations.size()) throw ConfigError("--actions and --observations differ in length");
        PomgSpec spec{a.horizon, static_cast<int>(a.actions.size()), a.states, a.actions, a.observations};
        model = a.kind == "random-revealing"
                    ? random_revealing_pomg(spec, a.alpha_target, a.seed, a.random)
                    : random_multistep_revealing_pomg(spec, a.m, a.alpha_target, a.seed, a.random);
        meta = {{"generator", a.kind}, {"seed", a.seed}, {"alpha_target", a.alpha_target}};
        if (a.kind == "random-multistep") meta["m"] = a.m;
    } else {
        throw ConfigError("unknown --kind \"" + a.kind + "\"");
    }
    const auto doc = model_to_json(model, meta).dump(1) + "\n";
    if (a.out.empty()) std::cout << doc;
    else write_text(a.out, doc);
    return 0;
}

// --- regret-report ----------------------------------------------------------------

int cmd_regret_report(const fs::path& logs_path, bool as_json) {
    std::ifstream in(logs_path);
    if (!in) throw Fault("cannot open " + logs_path.string());
    std::vector<int> ks;
    std::vector<double> incs, cums, avgs;
    std::vector<std::size_t> sizes;
    std::string metric, line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto doc = json::parse(line);
            ks.push_back(doc.at("k").get<int>());
            incs.push_back(doc.at("increment").get<double>());
            cums.push_back(doc.at("cumulative").get<double>());
            sizes.push_back(doc.at("set_size").get<std::size_t>());
            metric = doc.at("metric").get<std::string>();
        } catch (const json::exception& e) {
            throw Fault(logs_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        avgs.push_back(cums.back() / ks.back());
    }
    if (as_json) {
        std::cout << json{{"metric", metric}, {"k", ks}, {"increment", incs}, {"cumulative", cums},
                          {"average", avgs}, {"set_size", sizes}}
                         .dump(2)
                  << "\n";
        return 0;
    }
    std::cout << "k,metric,increment,cumulative,average,set_size\n";
    for (std::size_t t = 0; t < ks.size(); ++t)
        std::cout << ks[t] << ',' << metric << ',' << fmt(incs[t]) << ',' << fmt(cums[t]) << ',' << fmt(avgs[t])
                  << ',' << sizes[t] << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Optimistic-MLE learning lab for tabular partially observable Markov games"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Thread cap for parallel kernels (0 = runtime default)")
        ->envname("POMG_LAB_THREADS")
        ->check(CLI::NonNegativeNumber);

    auto* run = app.add_subcommand("run", "Run an experiment from a config or a manifest");
    std::string config_path, output_dir;
    run->add_option("config", config_path, "YAML/JSON config, or a manifest.json from an earlier run")->required();
    run->add_option("--output-dir", output_dir, "Override the config's output_dir");

    auto* rev = app.add_subcommand("check-revealing", "Check the single-step (m=1) or m-step revealing condition");
    std::string model_path;
    int m = 1;
    double alpha = 1.0;
    bool rev_json = false;
    rev->add_option("model", model_path, "pomg-v1 model file")->required();
    rev->add_option("--m", m, "Window length")->check(CLI::PositiveNumber);
    rev->add_option("--alpha", alpha, "Threshold");
    rev->add_flag("--json", rev_json, "JSON report");

    auto* nf = app.add_subcommand("solve-nf", "Solve a normal-form game file");
    std::string game_path, mode = "cce";
    int nash_budget = kDefaultNashStrategyBudget;
    bool nf_json = false;
    nf->add_option("game", game_path, "Game JSON {sizes, payoffs}")->required();
    nf->add_option("--mode", mode, "zero-sum | nash | cce | ce")
        ->check(CLI::IsMember({"zero-sum", "nash", "cce", "ce"}));
    nf->add_option("--nash-budget", nash_budget, "Pure strategies per player for nash mode");
    nf->add_flag("--json", nf_json, "Full JSON report");

    auto* gen = app.add_subcommand("gen-env", "Write a pomg-v1 model file");
    GenEnvArgs ga;
    gen->add_option("--kind", ga.kind, "hard-singlestep | hard-multistep | random-revealing | random-multistep")
        ->required();
    gen->add_option("--out", ga.out, "Output file (stdout when omitted)");
    gen->add_option("--seed", ga.seed, "Construction seed");
    gen->add_option("--L", ga.L, "hard-singlestep size");
    gen->add_option("--H", ga.H, "hard-multistep horizon");
    gen->add_option("--horizon", ga.horizon, "random: horizon");
    gen->add_option("--states", ga.states, "random: states");
    gen->add_option("--actions", ga.actions, "random: actions per player")->delimiter(',');
    gen->add_option("--observations", ga.observations, "random: observations per player")->delimiter(',');
    gen->add_option("--alpha-target", ga.alpha_target, "random: revealing threshold");
    gen->add_option("--m", ga.m, "random-multistep: window");
    gen->add_option("--sharpness", ga.random.sharpness, "random: column sharpness");
    gen->add_flag("--binary-rewards", ga.random.binary_rewards, "random: rewards in {0,1}");
    gen->add_flag("--shared-zero-sum", ga.random.shared_zero_sum, "random: shared observations, r2 = 1 - r1");

    auto* rep = app.add_subcommand("regret-report", "Cumulative and average regret curves from episodes.jsonl");
    std::string logs_path;
    bool rep_json = false;
    rep->add_option("logs", logs_path, "episodes.jsonl")->required();
    rep->add_flag("--json", rep_json, "JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        kernels::set_threads(threads);
        if (*run) return cmd_run(config_path, output_dir);
        if (*rev) return cmd_check_revealing(model_path, m, alpha, rev_json);
        if (*nf) return cmd_solve_nf(game_path, mode, nash_budget, nf_json);
        if (*gen) return cmd_gen_env(ga);
        if (*rep) return cmd_regret_report(logs_path, rep_json);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFault;
    }
    return kExitFault;
}

}  // namespace pomg
