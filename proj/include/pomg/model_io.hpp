#pragma once

// pomg-v1 model files: one JSON document with dense nested arrays.
//
//   {
//     "version": "pomg-v1",
//     "horizon": H, "num_players": n, "num_states": S,
//     "actions": [A_1, ...], "observations": [O_1, ...],
//     "mu1": [S],
//     "trans": [H][S'][S][A]     P_h(s' | s, a)
//     "emit":  [H][O][S]         O_h(o | s)
//     "rewards": [n][H][O_i]     r_{i,h}(o_i)
//     "metadata": { ... }        optional, free-form
//   }
//
// Joint indices a and o use the row-major flattening of core.hpp.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pomg/core.hpp"

namespace pomg {

inline constexpr const char* kModelVersion = "pomg-v1";

nlohmann::json model_to_json(const PomgModel& model, const nlohmann::json& metadata = nlohmann::json::object());

/// Parses and validates; throws Fault naming the first problem.
PomgModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const PomgModel& model,
                const nlohmann::json& metadata = nlohmann::json::object());
PomgModel load_model(const std::filesystem::path& path);

nlohmann::json spec_to_json(const PomgSpec& spec);
PomgSpec spec_from_json(const nlohmann::json& doc);

/// {"obs": [[o_1..o_n] per step], "act": [[a_1..a_n] per step]}
nlohmann::json trajectory_to_json(const Trajectory& traj, const PomgSpec& spec);
Trajectory trajectory_from_json(const nlohmann::json& doc, const PomgSpec& spec);

}  // namespace pomg
