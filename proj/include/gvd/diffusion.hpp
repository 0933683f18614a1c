// Forward diffusion, noise-to-x0 conversion, and denoisers. The oracle
// denoiser evaluates the exact posterior mean of the Gaussian-mixture world;
// the trainable one is a small conditional network fit to the same target.
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gvd/dataset.hpp"
#include "gvd/latent.hpp"
#include "gvd/mlp.hpp"
#include "gvd/schedule.hpp"
#include "gvd/world.hpp"

namespace gvd {

// z_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise. t == 0 returns x0.
Mat forward_diffuse(const Mat & x0, int t, const Mat & noise, const DiffusionSchedule & sched);

// Inverts the forward map given a noise estimate: requires 1 <= t <= steps.
Mat predict_x0(const Mat & z_t, const Mat & eps, int t, const DiffusionSchedule & sched);

// Noise predictor conditioned on class and timestep. Implementations must be
// safe for concurrent read-only use.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Mat predict_noise(const Mat & z_t, int class_id, int t, const DiffusionSchedule & sched) const = 0;
    virtual int frames() const = 0;
    virtual int dim() const = 0;
};

class OracleDenoiser final : public Denoiser {
public:
    explicit OracleDenoiser(std::shared_ptr<const GaussianWorld> world);

    Mat predict_noise(const Mat & z_t, int class_id, int t, const DiffusionSchedule & sched) const override;

    // Mixture posterior pieces, exposed for direct verification.
    // Marginal of mode i at signal level abar: N(sqrt(abar) mu_i,
    // abar Sigma_i + (1 - abar) I).
    Vec responsibilities(int class_id, const Vec & z_flat, double alpha_bar) const;
    Vec posterior_mean_x0(int class_id, const Vec & z_flat, double alpha_bar) const;

    const GaussianWorld & world() const { return *world_; }
    int frames() const override { return world_->frames; }
    int dim() const override { return world_->dim; }

private:
    std::shared_ptr<const GaussianWorld> world_;
};

struct MlpDenoiser final : public Denoiser {
    Mlp net;
    int video_frames = 0;
    int video_dim = 0;
    int class_count = 0;

    // Input layout: flattened z, one-hot class, then t/steps, sqrt(abar),
    // sqrt(1 - abar).
    Vec encode(const Vec & z_flat, int class_id, int t, const DiffusionSchedule & sched) const;
    // Output is sqrt(abar) * net(x) plus the analytic skip sqrt(1 - abar) * z,
    // matching the training loss in denoiser_batch_loss.
    Mat predict_noise(const Mat & z_t, int class_id, int t, const DiffusionSchedule & sched) const override;
    int frames() const override { return video_frames; }
    int dim() const override { return video_dim; }
};

struct DenoiserTrainConfig {
    int hidden = 96;
    int epochs = 40;
    int batch = 64;
    double learning_rate = 2e-3;
    uint64_t seed = 0;
};

struct DenoiserTrainResult {
    MlpDenoiser model;
    std::vector<double> epoch_loss;
};

// Fits the network to predict the injected noise on uniformly drawn
// timesteps. Loss must end finite or the call throws a training error.
DenoiserTrainResult train_denoiser(const VideoDataset & data, const DiffusionSchedule & sched,
                                   const DenoiserTrainConfig & cfg);

// Mean-squared noise prediction error of a single batch with explicit
// contents, plus parameter gradients. Exists for gradient verification.
double denoiser_batch_loss(const MlpDenoiser & model, const DiffusionSchedule & sched,
                           const std::vector<Vec> & inputs, const std::vector<Vec> & targets,
                           Mlp * grad_out);

}  // namespace gvd
