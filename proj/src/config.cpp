#include "pomg/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pomg/error.hpp"
#include "pomg/model_io.hpp"
#include "pomg/revealing.hpp"

namespace pomg {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Equilibrium: return "omle-eq";
        case Algorithm::MultiStep: return "omle-multistep";
        case Algorithm::Adversary: return "omle-adversary";
    }
    return "unknown";
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
        const auto mark = node.Mark();
        std::ostringstream out;
        out << source_;
        if (mark.line >= 0) out << ':' << mark.line + 1 << ':' << mark.column + 1;
        out << ": " << msg;
        throw ConfigError(out.str());
    }

    void require_map(const YAML::Node& node, const std::string& what) const {
        if (!node.IsMap()) fail(node, what + " must be a mapping");
    }

    void allow_keys(const YAML::Node& map, const std::set<std::string>& keys, const std::string& what) const {
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!keys.count(key)) fail(kv.first, "unknown key \"" + key + "\" in " + what);
        }
    }

    YAML::Node required(const YAML::Node& map, const std::string& key, const std::string& what) const {
        const auto node = map[key];
        if (!node) fail(map, what + " is missing required key \"" + key + "\"");
        return node;
    }

    long long integer(const YAML::Node& node, const std::string& key, long long lo, long long hi) const {
        long long v = 0;
        try {
            if (!node.IsScalar()) throw YAML::Exception(node.Mark(), "");
            v = node.as<long long>();
        } catch (const YAML::Exception&) {
            fail(node, "\"" + key + "\" must be an integer");
        }
        if (v < lo || v > hi)
            fail(node, "\"" + key + "\" must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                           std::to_string(v));
        return v;
    }

    std::uint64_t seed(const YAML::Node& node, const std::string& key) const {
        try {
            if (!node.IsScalar() || node.Scalar().find('-') != std::string::npos)
                throw YAML::Exception(node.Mark(), "");
            return node.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            fail(node, "\"" + key + "\" must be a nonnegative integer seed");
        }
    }

    double number(const YAML::Node& node, const std::string& key, double lo, double hi) const {
        double v = 0;
        try {
            if (!node.IsScalar()) throw YAML::Exception(node.Mark(), "");
            v = node.as<double>();
        } catch (const YAML::Exception&) {
            fail(node, "\"" + key + "\" must be a number");
        }
        if (!std::isfinite(v) || v < lo || v > hi) {
            std::ostringstream msg;
            msg << "\"" << key << "\" must lie in [" << lo << ", " << hi << "], got " << node.Scalar();
            fail(node, msg.str());
        }
        return v;
    }

    bool boolean(const YAML::Node& node, const std::string& key) const {
        try {
            if (!node.IsScalar()) throw YAML::Exception(node.Mark(), "");
            return node.as<bool>();
        } catch (const YAML::Exception&) {
            fail(node, "\"" + key + "\" must be true or false");
        }
    }

    std::string string(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, "\"" + key + "\" must be a string");
        return node.Scalar();
    }

    std::vector<int> int_list(const YAML::Node& node, const std::string& key, std::size_t len) const {
        if (!node.IsSequence() || node.size() != len)
            fail(node, "\"" + key + "\" must be a list of " + std::to_string(len) + " integers");
        std::vector<int> out;
        for (const auto& item : node) out.push_back(static_cast<int>(integer(item, key, 1, 1 << 20)));
        return out;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

nlohmann::json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Sequence: {
            auto out = nlohmann::json::array();
            for (const auto& item : node) out.push_back(yaml_to_json(item));
            return out;
        }
        case YAML::NodeType::Map: {
            auto out = nlohmann::json::object();
            for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return out;
        }
        case YAML::NodeType::Scalar: break;
    }
    const std::string& s = node.Scalar();
    if (node.Tag() == "!") return s;  // quoted
    long long i = 0;
    std::size_t used = 0;
    try {
        i = std::stoll(s, &used);
        if (used == s.size()) return i;
    } catch (const std::exception&) {
    }
    try {
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    if (s == "true") return true;
    if (s == "false") return false;
    return s;
}

PomgSpec parse_spec(const Reader& r, const YAML::Node& node) {
    r.require_map(node, "env.spec");
    r.allow_keys(node, {"horizon", "num_players", "num_states", "actions", "observations"}, "env.spec");
    PomgSpec spec;
    spec.horizon = static_cast<int>(r.integer(r.required(node, "horizon", "env.spec"), "horizon", 1, 64));
    spec.num_players = static_cast<int>(r.integer(r.required(node, "num_players", "env.spec"), "num_players", 1, 16));
    spec.num_states = static_cast<int>(r.integer(r.required(node, "num_states", "env.spec"), "num_states", 1, 1 << 16));
    spec.actions = r.int_list(r.required(node, "actions", "env.spec"), "actions", spec.num_players);
    spec.observations = r.int_list(r.required(node, "observations", "env.spec"), "observations", spec.num_players);
    try {
        spec.check();
        spec.joint_actions();
        spec.joint_observations();
    } catch (const Fault& f) {
        r.fail(node, f.what());
    }
    return spec;
}

EnvConfig parse_env(const Reader& r, const YAML::Node& node, const std::filesystem::path& base_dir) {
    r.require_map(node, "env");
    EnvConfig env;
    const auto src_node = r.required(node, "source", "env");
    env.source = r.string(src_node, "source");
    const std::set<std::string> common{"source", "seed"};
    auto keys = common;
    if (env.source == "random-revealing" || env.source == "random-multistep") {
        keys.insert({"spec", "alpha_target", "sharpness", "shared_zero_sum", "binary_rewards"});
        if (env.source == "random-multistep") keys.insert("m");
        r.allow_keys(node, keys, "env (" + env.source + ")");
        env.spec = parse_spec(r, r.required(node, "spec", "env"));
        if (node["alpha_target"]) env.alpha_target = r.number(node["alpha_target"], "alpha_target", 0, 1e6);
        if (node["sharpness"]) env.random.sharpness = r.number(node["sharpness"], "sharpness", 1e-3, 1e3);
        if (node["shared_zero_sum"]) env.random.shared_zero_sum = r.boolean(node["shared_zero_sum"], "shared_zero_sum");
        if (node["binary_rewards"]) env.random.binary_rewards = r.boolean(node["binary_rewards"], "binary_rewards");
        if (node["m"]) env.m = static_cast<int>(r.integer(node["m"], "m", 1, env.spec.horizon));
        if (env.source == "random-revealing" && env.spec.joint_observations() < env.spec.num_states)
            r.fail(node["spec"], "random-revealing needs joint O >= S; use random-multistep");
        if (env.random.shared_zero_sum &&
            (env.spec.num_players != 2 || env.spec.observations[0] != env.spec.observations[1]))
            r.fail(node["shared_zero_sum"], "shared_zero_sum needs two players with equal observation counts");
    } else if (env.source == "hard-singlestep") {
        keys.insert("L");
        r.allow_keys(node, keys, "env (hard-singlestep)");
        env.L = static_cast<int>(r.integer(r.required(node, "L", "env"), "L", 2, 16));
    } else if (env.source == "hard-multistep") {
        keys.insert("H");
        r.allow_keys(node, keys, "env (hard-multistep)");
        env.H = static_cast<int>(r.integer(r.required(node, "H", "env"), "H", 3, 32));
    } else if (env.source == "model") {
        r.allow_keys(node, {"source", "seed", "file", "model"}, "env (model)");
        if (node["file"] && node["model"]) r.fail(node, "env (model) takes either \"file\" or \"model\", not both");
        try {
            if (node["file"]) {
                auto path = std::filesystem::path(r.string(node["file"], "file"));
                if (path.is_relative()) path = base_dir / path;
                std::ifstream in(path);
                if (!in) r.fail(node["file"], "cannot open model file " + path.string());
                env.model = nlohmann::json::parse(in);
            } else {
                env.model = yaml_to_json(r.required(node, "model", "env (model)"));
            }
            env.spec = model_from_json(env.model).spec;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            r.fail(node["file"] ? node["file"] : node["model"], std::string("invalid model: ") + e.what());
        }
    } else {
        r.fail(src_node, "unknown env source \"" + env.source +
                             "\" (expected random-revealing, random-multistep, hard-singlestep, hard-multistep or "
                             "model)");
    }
    if (node["seed"]) env.seed = r.seed(node["seed"], "seed");
    return env;
}

PomgSpec spec_of(const EnvConfig& env) {
    if (env.source == "hard-singlestep") {
        const int L = env.L, S = 4 * L;
        return PomgSpec{L + 1, 2, S, {2, 2}, {S, S + 1}};
    }
    if (env.source == "hard-multistep") return PomgSpec{env.H, 2, 4, {2, 2}, {3, 3}};
    return env.spec;
}

void validate_gates(const Reader& r, const YAML::Node& root, const RunConfig& c) {
    const auto spec = spec_of(c.env);
    const auto eq_node = root["eq_type"] ? root["eq_type"] : root;
    if (c.algorithm == Algorithm::Adversary && spec.num_players < 2)
        r.fail(root["algorithm"], "omle-adversary needs two or more players");
    if (c.algorithm == Algorithm::MultiStep && c.m > spec.horizon)
        r.fail(root["m"] ? root["m"] : root, "m=" + std::to_string(c.m) + " exceeds the horizon H=" +
                                                 std::to_string(spec.horizon));
    if (c.eq != EqType::Nash || c.algorithm == Algorithm::Adversary) return;
    if (spec.num_players != 2)
        r.fail(eq_node, "Nash mode is limited to two-player games (this spec has " +
                            std::to_string(spec.num_players) + " players); use CCE or CE");
    for (int i = 0; i < 2; ++i) {
        const auto count = det_policy_count_string(spec, i, c.cls);
        bool over = count.find('^') != std::string::npos || count.size() > 9;
        if (!over) over = std::stoll(count) > c.nash_budget;
        if (over)
            r.fail(eq_node, "Nash mode is limited to " + std::to_string(c.nash_budget) +
                                " pure strategies per player (nash_budget); player " + std::to_string(i) + " has " +
                                count + "; use CCE or CE");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name,
                       const std::filesystem::path& base_dir) {
    const Reader r(source_name);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream out;
        out << source_name << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
        throw ConfigError(out.str());
    }
    if (!root.IsMap()) r.fail(root, "config must be a mapping");
    r.allow_keys(root,
                 {"algorithm", "env", "candidates", "episodes", "beta", "eq_type", "policy_class", "alpha", "m", "seed",
                  "opponent", "opponent_strategy", "nash_budget", "output_dir"},
                 "config");
    RunConfig c;
    const auto algo = r.string(r.required(root, "algorithm", "config"), "algorithm");
    if (algo == "omle-eq") c.algorithm = Algorithm::Equilibrium;
    else if (algo == "omle-multistep") c.algorithm = Algorithm::MultiStep;
    else if (algo == "omle-adversary") c.algorithm = Algorithm::Adversary;
    else r.fail(root["algorithm"], "unknown algorithm \"" + algo + "\" (expected omle-eq, omle-multistep or omle-adversary)");

    c.env = parse_env(r, r.required(root, "env", "config"), base_dir);

    const auto fam = r.required(root, "candidates", "config");
    r.require_map(fam, "candidates");
    r.allow_keys(fam, {"count", "scale", "noise_sharpness", "seed"}, "candidates");
    c.candidates.count = static_cast<int>(r.integer(r.required(fam, "count", "candidates"), "count", 1, 4096));
    if (fam["scale"]) c.candidates.scale = r.number(fam["scale"], "scale", 0, 1);
    if (fam["noise_sharpness"])
        c.candidates.noise_sharpness = r.number(fam["noise_sharpness"], "noise_sharpness", 1e-3, 1e3);
    if (fam["seed"]) c.candidates.seed = r.seed(fam["seed"], "seed");

    c.episodes = static_cast<int>(r.integer(r.required(root, "episodes", "config"), "episodes", 0, 10'000'000));

    const auto beta = r.required(root, "beta", "config");
    if (beta.IsScalar()) {
        c.beta.fixed = r.number(beta, "beta", 0, 1e12);
    } else {
        r.require_map(beta, "beta");
        r.allow_keys(beta, {"c", "delta"}, "beta");
        if (beta["c"]) c.beta.c = r.number(beta["c"], "c", 0, 1e6);
        if (beta["delta"]) c.beta.delta = r.number(beta["delta"], "delta", 1e-300, 1);
        if (c.beta.delta <= 0) r.fail(beta["delta"], "\"delta\" must be positive");
    }

    if (root["eq_type"]) {
        try {
            c.eq = eq_type_from_string(r.string(root["eq_type"], "eq_type"));
        } catch (const Fault& f) {
            r.fail(root["eq_type"], f.what());
        }
    } else if (c.algorithm != Algorithm::Adversary) {
        r.fail(root, "config is missing required key \"eq_type\"");
    }
    if (root["policy_class"]) {
        try {
            c.cls = policy_class_from_string(r.string(root["policy_class"], "policy_class"));
        } catch (const Fault& f) {
            r.fail(root["policy_class"], f.what());
        }
    }
    if (root["alpha"]) c.alpha = r.number(root["alpha"], "alpha", 0, 1e6);
    if (root["m"]) c.m = static_cast<int>(r.integer(root["m"], "m", 1, 64));
    if (root["seed"]) c.seed = r.seed(root["seed"], "seed");
    if (root["opponent"]) {
        c.opponent = r.string(root["opponent"], "opponent");
        if (c.opponent != "best-response" && c.opponent != "uniform" && c.opponent != "fixed")
            r.fail(root["opponent"], "unknown opponent \"" + c.opponent + "\" (expected best-response, uniform or fixed)");
    }
    if (root["opponent_strategy"])
        c.opponent_strategy = static_cast<int>(r.integer(root["opponent_strategy"], "opponent_strategy", 0, 1 << 30));
    if (root["nash_budget"]) c.nash_budget = static_cast<int>(r.integer(root["nash_budget"], "nash_budget", 1, 64));
    if (root["output_dir"]) c.output_dir = r.string(root["output_dir"], "output_dir");
    validate_gates(r, root, c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string(), path.parent_path());
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json env = {{"source", c.env.source}, {"seed", c.env.seed}};
    if (c.env.source == "random-revealing" || c.env.source == "random-multistep") {
        env["spec"] = spec_to_json(c.env.spec);
        env["alpha_target"] = c.env.alpha_target;
        env["sharpness"] = c.env.random.sharpness;
        env["shared_zero_sum"] = c.env.random.shared_zero_sum;
        env["binary_rewards"] = c.env.random.binary_rewards;
        if (c.env.source == "random-multistep") env["m"] = c.env.m;
    } else if (c.env.source == "hard-singlestep") {
        env["L"] = c.env.L;
    } else if (c.env.source == "hard-multistep") {
        env["H"] = c.env.H;
    } else {
        env["model"] = c.env.model;
    }
    nlohmann::json beta;
    if (c.beta.fixed) beta = *c.beta.fixed;
    else beta = {{"c", c.beta.c}, {"delta", c.beta.delta}};
    return {
        {"algorithm", to_string(c.algorithm)},
        {"env", env},
        {"candidates",
         {{"count", c.candidates.count},
          {"scale", c.candidates.scale},
          {"noise_sharpness", c.candidates.noise_sharpness},
          {"seed", c.candidates.seed}}},
        {"episodes", c.episodes},
        {"beta", beta},
        {"eq_type", to_string(c.eq)},
        {"policy_class", to_string(c.cls)},
        {"alpha", c.alpha},
        {"m", c.m},
        {"seed", c.seed},
        {"opponent", c.opponent},
        {"opponent_strategy", c.opponent_strategy},
        {"nash_budget", c.nash_budget},
        {"output_dir", c.output_dir},
    };
}

std::string config_hash(const RunConfig& config) {
    const auto text = config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Experiment build_experiment(const RunConfig& c) {
    Experiment ex;
    const auto& e = c.env;
    if (e.source == "random-revealing") {
        ex.env = random_revealing_pomg(e.spec, e.alpha_target, e.seed, e.random);
        ex.env_metadata = {{"generator", "random-revealing"}, {"seed", e.seed}, {"alpha_target", e.alpha_target}};
    } else if (e.source == "random-multistep") {
        ex.env = random_multistep_revealing_pomg(e.spec, e.m, e.alpha_target, e.seed, e.random);
        ex.env_metadata = {{"generator", "random-multistep"}, {"seed", e.seed}, {"m", e.m}, {"alpha_target", e.alpha_target}};
    } else if (e.source == "hard-singlestep") {
        const auto inst = hard_instance_singlestep(e.L, e.seed);
        ex.env = inst.model;
        ex.env_metadata = inst.metadata();
    } else if (e.source == "hard-multistep") {
        const auto inst = hard_instance_multistep(e.H, e.seed);
        ex.env = inst.model;
        ex.env_metadata = inst.metadata();
    } else {
        ex.env = model_from_json(e.model);
        ex.env_metadata = e.model.value("metadata", nlohmann::json::object());
    }

    RevealingPredicate revealing;
    if (c.alpha > 0) {
        if (c.algorithm == Algorithm::MultiStep)
            revealing = [a = c.alpha, m = c.m](const PomgModel& model) { return check_multi_step(model, m, a); };
        else
            revealing = [a = c.alpha](const PomgModel& model) { return check_single_step(model, a); };
    }
    ex.family = candidate_family_around(ex.env, c.candidates.count, c.candidates.scale, c.candidates.seed, revealing,
                                        c.candidates.noise_sharpness);
    ex.beta = c.beta.fixed ? *c.beta.fixed
                           : beta_schedule(ex.env.spec, std::max(c.episodes, 1), c.beta.c, c.beta.delta);

    auto& o = ex.options;
    o.episodes = c.episodes;
    o.beta = ex.beta;
    o.eq = c.eq;
    o.cls = c.cls;
    o.seed = c.seed;
    o.alpha = c.alpha;
    o.m = c.m;
    o.nash_budget = c.nash_budget;
    return ex;
}

OmleResult run_experiment(const Experiment& ex, const RunConfig& c) {
    switch (c.algorithm) {
        case Algorithm::Equilibrium: return run_omle_equilibrium(ex.env, ex.family, ex.options);
        case Algorithm::MultiStep: return run_omle_multistep(ex.env, ex.family, ex.options);
        case Algorithm::Adversary: {
            const auto opponent = c.opponent;
            const int strategy = c.opponent_strategy;
            return run_omle_adversary(ex.env, ex.family, ex.options, [&](const AdversaryContext& ctx) -> Opponent {
                if (opponent == "uniform") return uniform_opponent(ctx);
                if (opponent == "fixed") {
                    std::vector<double> mix(radix_product(ctx.opponent_sizes), 0.0);
                    if (static_cast<std::size_t>(strategy) >= mix.size())
                        throw Fault("opponent_strategy " + std::to_string(strategy) + " is out of range (" +
                                    std::to_string(mix.size()) + " opponent profiles)");
                    mix[strategy] = 1.0;
                    return fixed_opponent(std::move(mix));
                }
                return best_response_opponent(ctx);
            });
        }
    }
    throw Fault("unknown algorithm");
}

}  // namespace pomg
