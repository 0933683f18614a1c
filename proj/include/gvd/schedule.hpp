// Variance schedule for the diffusion process.
#pragma once

#include <vector>

#include "gvd/errors.hpp"

namespace gvd {

// alpha_bar has length steps + 1; alpha_bar[0] == 1 represents the clean
// distribution and alpha_bar[t] the signal fraction retained at timestep t.
struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> alpha_bar;

    double alpha_bar_at(int t) const;
    void require_timestep(int t) const;  // 1 <= t <= steps
    void validate() const;
};

// Linear beta ramp: beta_s = beta_min + (beta_max - beta_min) * (s-1)/(steps-1),
// accumulated as alpha_bar[t] = prod_{s<=t} (1 - beta_s). steps == 1 uses
// beta_min alone.
DiffusionSchedule build_schedule(int steps, double beta_min, double beta_max);

}  // namespace gvd
