#include "gvd/schedule.hpp"

#include <cmath>
#include <string>

namespace gvd {

double DiffusionSchedule::alpha_bar_at(int t) const {
    if (t < 0 || t > steps) {
        throw error(error_kind::precondition,
                    "timestep out of range", "t=" + std::to_string(t) + " steps=" + std::to_string(steps));
    }
    return alpha_bar[size_t(t)];
}

void DiffusionSchedule::require_timestep(int t) const {
    if (t < 1 || t > steps) {
        throw error(error_kind::precondition,
                    "timestep must be in [1, steps]",
                    "t=" + std::to_string(t) + " steps=" + std::to_string(steps));
    }
}

void DiffusionSchedule::validate() const {
    if (steps < 1) throw error(error_kind::config, "schedule needs at least one step");
    if (alpha_bar.size() != size_t(steps) + 1) {
        throw error(error_kind::config, "alpha_bar length must be steps + 1");
    }
    if (alpha_bar[0] != 1.0) throw error(error_kind::config, "alpha_bar[0] must be 1");
    for (size_t t = 1; t < alpha_bar.size(); ++t) {
        double v = alpha_bar[t];
        if (!std::isfinite(v) || v <= 0.0 || v >= alpha_bar[t - 1]) {
            throw error(error_kind::config,
                        "alpha_bar must be strictly decreasing within (0, 1]",
                        "t=" + std::to_string(t));
        }
    }
}

DiffusionSchedule build_schedule(int steps, double beta_min, double beta_max) {
    if (steps < 1) throw error(error_kind::config, "schedule needs at least one step");
    if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max) {
        throw error(error_kind::config, "betas must satisfy 0 < beta_min <= beta_max < 1");
    }
    DiffusionSchedule sched;
    sched.steps = steps;
    sched.alpha_bar.resize(size_t(steps) + 1);
    sched.alpha_bar[0] = 1.0;
    double prod = 1.0;
    for (int s = 1; s <= steps; ++s) {
        double frac = steps == 1 ? 0.0 : double(s - 1) / double(steps - 1);
        double beta = beta_min + (beta_max - beta_min) * frac;
        prod *= 1.0 - beta;
        sched.alpha_bar[size_t(s)] = prod;
    }
    sched.validate();
    return sched;
}

}  // namespace gvd
