#include "pomg/model_io.hpp"

#include <fstream>

#include "pomg/error.hpp"

namespace pomg {

using nlohmann::json;

json spec_to_json(const PomgSpec& spec) {
    return json{{"horizon", spec.horizon},
                {"num_players", spec.num_players},
                {"num_states", spec.num_states},
                {"actions", spec.actions},
                {"observations", spec.observations}};
}

PomgSpec spec_from_json(const json& doc) {
    PomgSpec spec;
    try {
        spec.horizon = doc.at("horizon").get<int>();
        spec.num_players = doc.at("num_players").get<int>();
        spec.num_states = doc.at("num_states").get<int>();
        spec.actions = doc.at("actions").get<std::vector<int>>();
        spec.observations = doc.at("observations").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw Fault(std::string("model file: ") + e.what());
    }
    spec.check();
    return spec;
}

json model_to_json(const PomgModel& model, const json& metadata) {
    const auto& sp = model.spec;
    const int H = sp.horizon, S = sp.num_states, A = sp.joint_actions(), O = sp.joint_observations();
    json doc = spec_to_json(sp);
    doc["version"] = kModelVersion;
    doc["mu1"] = model.mu1;

    json trans = json::array();
    for (int h = 0; h < H; ++h) {
        json per_next = json::array();
        for (int s2 = 0; s2 < S; ++s2) {
            json per_state = json::array();
            for (int s = 0; s < S; ++s) {
                json per_action = json::array();
                for (int a = 0; a < A; ++a) per_action.push_back(model.transition(h, s, a, s2));
                per_state.push_back(std::move(per_action));
            }
            per_next.push_back(std::move(per_state));
        }
        trans.push_back(std::move(per_next));
    }
    doc["trans"] = std::move(trans);

    json emit = json::array();
    for (int h = 0; h < H; ++h) {
        json rows = json::array();
        for (int o = 0; o < O; ++o) {
            json row = json::array();
            for (int s = 0; s < S; ++s) row.push_back(model.emission(h, o, s));
            rows.push_back(std::move(row));
        }
        emit.push_back(std::move(rows));
    }
    doc["emit"] = std::move(emit);

    json rewards = json::array();
    for (int i = 0; i < sp.num_players; ++i) {
        json steps = json::array();
        for (int h = 0; h < H; ++h) {
            json row = json::array();
            for (int o = 0; o < sp.observations[i]; ++o) row.push_back(model.reward(i, h, o));
            steps.push_back(std::move(row));
        }
        rewards.push_back(std::move(steps));
    }
    doc["rewards"] = std::move(rewards);
    if (!metadata.empty()) doc["metadata"] = metadata;
    return doc;
}

namespace {
const json& expect_array(const json& node, std::size_t size, const std::string& where) {
    if (!node.is_array() || node.size() != size)
        throw Fault("model file: " + where + " must be an array of length " + std::to_string(size));
    return node;
}
}  // namespace

PomgModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw Fault("model file: top level must be an object");
    if (!doc.contains("version") || doc["version"] != kModelVersion)
        throw Fault(std::string("model file: version must be \"") + kModelVersion + "\"");
    PomgModel model = PomgModel::zeros(spec_from_json(doc));
    const auto& sp = model.spec;
    const int H = sp.horizon, S = sp.num_states, A = sp.joint_actions(), O = sp.joint_observations();
    try {
        const auto& mu = expect_array(doc.at("mu1"), S, "mu1");
        for (int s = 0; s < S; ++s) model.mu1[s] = mu[s].get<double>();

        const auto& trans = expect_array(doc.at("trans"), H, "trans");
        for (int h = 0; h < H; ++h) {
            const auto& per_next = expect_array(trans[h], S, "trans[h]");
            for (int s2 = 0; s2 < S; ++s2) {
                const auto& per_state = expect_array(per_next[s2], S, "trans[h][s']");
                for (int s = 0; s < S; ++s) {
                    const auto& per_action = expect_array(per_state[s], A, "trans[h][s'][s]");
                    for (int a = 0; a < A; ++a) model.transition(h, s, a, s2) = per_action[a].get<double>();
                }
            }
        }

        const auto& emit = expect_array(doc.at("emit"), H, "emit");
        for (int h = 0; h < H; ++h) {
            const auto& rows = expect_array(emit[h], O, "emit[h]");
            for (int o = 0; o < O; ++o) {
                const auto& row = expect_array(rows[o], S, "emit[h][o]");
                for (int s = 0; s < S; ++s) model.emission(h, o, s) = row[s].get<double>();
            }
        }

        const auto& rewards = expect_array(doc.at("rewards"), sp.num_players, "rewards");
        for (int i = 0; i < sp.num_players; ++i) {
            const auto& steps = expect_array(rewards[i], H, "rewards[i]");
            for (int h = 0; h < H; ++h) {
                const auto& row = expect_array(steps[h], sp.observations[i], "rewards[i][h]");
                for (int o = 0; o < sp.observations[i]; ++o) model.reward(i, h, o) = row[o].get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw Fault(std::string("model file: ") + e.what());
    }
    const auto report = validate_model(model);
    if (!report.ok()) throw Fault("model file fails validation: " + report.summary());
    return model;
}

void save_model(const std::filesystem::path& path, const PomgModel& model, const json& metadata) {
    std::ofstream out(path);
    if (!out) throw Fault("cannot write " + path.string());
    out << model_to_json(model, metadata).dump(1) << '\n';
}

PomgModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Fault("cannot read " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Fault(path.string() + ": " + e.what());
    }
    return model_from_json(doc);
}

json trajectory_to_json(const Trajectory& traj, const PomgSpec& spec) {
    json obs = json::array(), act = json::array();
    for (int h = 0; h < traj.horizon(); ++h) {
        obs.push_back(spec.decode_observation(traj.observations[h]));
        act.push_back(spec.decode_action(traj.actions[h]));
    }
    return json{{"obs", std::move(obs)}, {"act", std::move(act)}};
}

Trajectory trajectory_from_json(const json& doc, const PomgSpec& spec) {
    Trajectory traj;
    try {
        const auto& obs = doc.at("obs");
        const auto& act = doc.at("act");
        if (obs.size() != static_cast<std::size_t>(spec.horizon) || act.size() != obs.size())
            throw Fault("trajectory: expected " + std::to_string(spec.horizon) + " steps");
        for (std::size_t h = 0; h < obs.size(); ++h) {
            auto o = obs[h].get<std::vector<int>>();
            auto a = act[h].get<std::vector<int>>();
            if (o.size() != static_cast<std::size_t>(spec.num_players) || a.size() != o.size())
                throw Fault("trajectory: step " + std::to_string(h) + " has wrong arity");
            for (int i = 0; i < spec.num_players; ++i) {
                if (o[i] < 0 || o[i] >= spec.observations[i] || a[i] < 0 || a[i] >= spec.actions[i])
                    throw Fault("trajectory: step " + std::to_string(h) + " index out of range");
            }
            traj.observations.push_back(spec.encode_observation(o));
            traj.actions.push_back(spec.encode_action(a));
        }
    } catch (const json::exception& e) {
        throw Fault(std::string("trajectory: ") + e.what());
    }
    return traj;
}

}  // namespace pomg
