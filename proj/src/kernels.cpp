#include "pomg/kernels.hpp"

#include <exception>

#include <omp.h>

namespace pomg::kernels {

namespace {

int default_threads = 0;

double model_log_likelihood(const PomgModel& model, std::span<const DatasetEntry> data) {
    double total = 0;
    for (const auto& e : data) total += log_forward_prob(model, e.trajectory.actions, e.trajectory.observations);
    return total;
}

ValueTensors empty_tensors(std::span<const PomgModel> models, const PureStrategySets& sets) {
    ValueTensors out;
    out.models = models.size();
    out.players = static_cast<int>(sets.per_player.size());
    out.profiles = sets.profile_count();
    out.values.assign(out.models * out.players * out.profiles, 0.0);
    return out;
}

void fill_entry(ValueTensors& out, std::span<const PomgModel> models, const PureStrategySets& sets, std::size_t job,
                std::size_t budget) {
    const std::size_t c = job / out.profiles, p = job % out.profiles;
    const auto mu = sets.joint(sets.profile(p));
    const auto v = policy_values(models[c], mu, budget);
    for (int i = 0; i < out.players; ++i) out.values[(c * out.players + i) * out.profiles + p] = v[i];
}

// Runs body(j) for j in [0, n) across threads; rethrows the first exception
// in job order so faults are deterministic too.
template <class Body>
void parallel_jobs(std::size_t n, Body body) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
        try {
            body(static_cast<std::size_t>(j));
        } catch (...) {
            errors[j] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

void set_threads(int n) {
    if (default_threads == 0) default_threads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : default_threads);
}

int max_threads() { return omp_get_max_threads(); }

std::vector<double> log_likelihoods(std::span<const PomgModel> models, std::span<const DatasetEntry> data) {
    std::vector<double> out(models.size(), 0.0);
    parallel_jobs(models.size(), [&](std::size_t c) { out[c] = model_log_likelihood(models[c], data); });
    return out;
}

ValueTensors value_tensors(std::span<const PomgModel> models, const PureStrategySets& sets, std::size_t budget) {
    auto out = empty_tensors(models, sets);
    parallel_jobs(out.models * out.profiles, [&](std::size_t job) { fill_entry(out, models, sets, job, budget); });
    return out;
}

namespace serial {

std::vector<double> log_likelihoods(std::span<const PomgModel> models, std::span<const DatasetEntry> data) {
    std::vector<double> out;
    for (const auto& m : models) out.push_back(model_log_likelihood(m, data));
    return out;
}

ValueTensors value_tensors(std::span<const PomgModel> models, const PureStrategySets& sets, std::size_t budget) {
    auto out = empty_tensors(models, sets);
    for (std::size_t job = 0; job < out.models * out.profiles; ++job) fill_entry(out, models, sets, job, budget);
    return out;
}

}  // namespace serial

}  // namespace pomg::kernels
