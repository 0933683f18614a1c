// Prototype-guided deterministic DDIM sampling plus the unguided and
// noised-prototype baselines. Guidance subtracts a decayed multiple of
// (prototype - predicted x0) from the noise prediction on the active side of
// the t_stop threshold.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvd/diffusion.hpp"
#include "gvd/latent.hpp"
#include "gvd/schedule.hpp"

namespace gvd {

// Which side of t_stop guidance is active on. low_t: active for t < t_stop
// (the branch as literally written); high_t: active for t >= t_stop (guide
// the early high-noise phase, then refine unguided). Default high_t.
enum class GuidancePhase { low_t, high_t };

struct GuidanceConfig {
    double lambda = 0.1;
    int t_stop = 500;  // schedule-time units
    bool frame_decay = true;
    int sampler_steps = 50;
    GuidancePhase phase = GuidancePhase::high_t;

    bool guidance_active(int t) const {
        return phase == GuidancePhase::low_t ? t < t_stop : t >= t_stop;
    }
    void validate(const DiffusionSchedule & sched) const;
};

struct SampleStep {
    int t = 0;
    double guidance_norm = 0.0;           // |prototype - unguided x0|
    std::vector<double> frame_lambda;     // effective per-frame strength, 0 when inactive
    double x0_distance = 0.0;             // |guided x0 - prototype|
};

struct SampleTrace {
    std::vector<SampleStep> steps;
};

// prototype - x0_hat, with the flat prototype reshaped to frames x dim.
Mat guidance_term(const Vec & prototype, const Mat & x0_hat);

// lambda * (1 - f / F), zero-based frames: full strength at f = 0, lambda/F
// at the last frame.
double frame_lambda(double lambda, int f, int F);

Mat guided_eps(const Mat & eps, const Mat & g, const GuidanceConfig & cfg, int t,
               const DiffusionSchedule & sched);

// Deterministic update z_{t_prev} = sqrt(abar_{t_prev}) x0 + sqrt(1 -
// abar_{t_prev}) eps.
Mat ddim_step(const Mat & x0_hat, const Mat & eps_prime, int t, int t_prev,
              const DiffusionSchedule & sched);

// Uniform stride over the schedule: S+1 ascending values with first 0 and
// last steps.
std::vector<int> sampler_timesteps(int steps, int sampler_steps);

Mat sample_guided(const Denoiser & den, int class_id, const Vec & prototype,
                  const GuidanceConfig & cfg, const DiffusionSchedule & sched, uint64_t seed,
                  SampleTrace * trace = nullptr);

Mat sample_naive(const Denoiser & den, int class_id, const GuidanceConfig & cfg,
                 const DiffusionSchedule & sched, uint64_t seed);

// Diffuses the prototype to t_start, then runs the unguided sampler down.
// t_start == 0 returns the prototype itself.
Mat sample_knoise(const Denoiser & den, int class_id, const Vec & prototype, int t_start,
                  const GuidanceConfig & cfg, const DiffusionSchedule & sched, uint64_t seed,
                  SampleTrace * trace = nullptr);

enum class DistillMethod { gvd, knoise, naive, proto_repeat };

// One sample per prototype, in prototype order, each with a seed derived from
// (seed, index) so the output is worker-count independent.
std::vector<Mat> distill_class(const Denoiser & den, int class_id, const std::vector<Vec> & prototypes,
                               DistillMethod method, int knoise_t_start, const GuidanceConfig & cfg,
                               const DiffusionSchedule & sched, uint64_t seed, int workers = 1,
                               std::vector<SampleTrace> * traces = nullptr);

struct InstanceTrace {
    uint64_t instance_id = 0;
    uint32_t class_id = 0;
    SampleTrace trace;
};

// Columns: instance_id, class_id, step_t, g_norm, x0_dist.
void save_traces_csv(const std::vector<InstanceTrace> & traces, const std::string & path);

}  // namespace gvd
