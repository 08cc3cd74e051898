#pragma once

// Data-parallel kernels over a candidate family. Each output entry is
// computed by one thread in a fixed order, so results are bit-identical for
// every thread count. serial:: holds the single-threaded reference.

#include <cstddef>
#include <span>
#include <vector>

#include "pomg/likelihood.hpp"
#include "pomg/policy.hpp"

namespace pomg::kernels {

/// Caps the OpenMP team size; n <= 0 restores the runtime default.
void set_threads(int n);
int max_threads();

/// out[c] = sum over entries of log P_c(o | a).
std::vector<double> log_likelihoods(std::span<const PomgModel> models, std::span<const DatasetEntry> data);

/// values[(c * n + i) * P + p] = V_i of profile p under model c.
struct ValueTensors {
    std::size_t models = 0;
    int players = 0;
    std::size_t profiles = 0;
    std::vector<double> values;

    double at(std::size_t model, int player, std::size_t profile) const {
        return values[(model * players + player) * profiles + profile];
    }
    std::span<const double> tensor(std::size_t model, int player) const {
        return {values.data() + (model * players + player) * profiles, profiles};
    }
};

ValueTensors value_tensors(std::span<const PomgModel> models, const PureStrategySets& sets,
                           std::size_t budget = kDefaultValueBudget);

namespace serial {
std::vector<double> log_likelihoods(std::span<const PomgModel> models, std::span<const DatasetEntry> data);
ValueTensors value_tensors(std::span<const PomgModel> models, const PureStrategySets& sets,
                           std::size_t budget = kDefaultValueBudget);
}  // namespace serial

}  // namespace pomg::kernels
