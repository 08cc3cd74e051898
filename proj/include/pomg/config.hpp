#pragma once

// Experiment configuration: parsing (YAML or JSON), validation with
// file:line:column messages, and construction of the environment and
// candidate family it names.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pomg/envs.hpp"
#include "pomg/likelihood.hpp"
#include "pomg/omle.hpp"

namespace pomg {

/// Invalid configuration; the message starts with "file:line:col: ".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { Equilibrium, MultiStep, Adversary };
std::string to_string(Algorithm a);

struct EnvConfig {
    /// random-revealing | random-multistep | hard-singlestep | hard-multistep | model
    std::string source = "random-revealing";
    PomgSpec spec;
    std::uint64_t seed = 0;
    double alpha_target = 0;
    int m = 2;  // random-multistep window
    RandomPomgOptions random;
    int L = 2;  // hard-singlestep
    int H = 3;  // hard-multistep
    nlohmann::json model;  // source == model: inline pomg-v1 document
};

struct FamilyConfig {
    int count = 1;
    double scale = 0;
    double noise_sharpness = 1;
    std::uint64_t seed = 0;
};

struct BetaConfig {
    std::optional<double> fixed;
    double c = 1.0;
    double delta = 0.05;
};

struct RunConfig {
    Algorithm algorithm = Algorithm::Equilibrium;
    EnvConfig env;
    FamilyConfig candidates;
    int episodes = 0;
    BetaConfig beta;
    EqType eq = EqType::CCE;
    PolicyClass cls = PolicyClass::Reactive;
    double alpha = 0;
    int m = 1;
    std::uint64_t seed = 0;
    std::string opponent = "best-response";  // best-response | uniform | fixed
    int opponent_strategy = 0;               // fixed: opponents' joint pure profile
    int nash_budget = kDefaultNashStrategyBudget;
    std::string output_dir = "out";
};

/// Parses a YAML (or JSON) document. Relative model paths resolve against
/// the file's directory and are inlined.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& source_name,
                       const std::filesystem::path& base_dir = {});

/// Canonical JSON form; parse_config(to_json(c).dump()) == c.
nlohmann::json config_to_json(const RunConfig& config);
/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

struct Experiment {
    PomgModel env;
    nlohmann::json env_metadata;
    CandidateFamily family;
    double beta = 0;
    OmleOptions options;
};

Experiment build_experiment(const RunConfig& config);
OmleResult run_experiment(const Experiment& experiment, const RunConfig& config);

}  // namespace pomg
