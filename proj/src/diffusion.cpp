#include "gvd/diffusion.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

namespace gvd {

namespace {

constexpr double k_posterior_jitter = 1e-9;

void require_same_shape(const Mat & a, const Mat & b, const char * what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw error(error_kind::dimension, what);
    }
}

}  // namespace

Mat forward_diffuse(const Mat & x0, int t, const Mat & noise, const DiffusionSchedule & sched) {
    require_same_shape(x0, noise, "noise shape does not match x0");
    if (t == 0) return x0;
    sched.require_timestep(t);
    double abar = sched.alpha_bar_at(t);
    return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * noise;
}

Mat predict_x0(const Mat & z_t, const Mat & eps, int t, const DiffusionSchedule & sched) {
    require_same_shape(z_t, eps, "eps shape does not match z_t");
    sched.require_timestep(t);
    double abar = sched.alpha_bar_at(t);
    return (z_t - std::sqrt(1.0 - abar) * eps) / std::sqrt(abar);
}

OracleDenoiser::OracleDenoiser(std::shared_ptr<const GaussianWorld> world) : world_(std::move(world)) {
    if (!world_) throw error(error_kind::precondition, "oracle denoiser needs a world");
}

Vec OracleDenoiser::responsibilities(int class_id, const Vec & z_flat, double alpha_bar) const {
    if (class_id < 0 || class_id >= world_->class_count()) {
        throw error(error_kind::precondition, "class id out of range", std::to_string(class_id));
    }
    const auto & modes = world_->classes[size_t(class_id)];
    const double abar = alpha_bar;
    const int n = int(z_flat.size());

    // Log-densities of z under each mode's diffused marginal, normalized by
    // max subtraction before exponentiating.
    Vec log_p(Eigen::Index(modes.size()));
    for (size_t m = 0; m < modes.size(); ++m) {
        const auto & mode = modes[m];
        Mat S = abar * mode.cov + (1.0 - abar) * Mat::Identity(n, n);
        Eigen::LLT<Mat> llt(S);
        if (llt.info() != Eigen::Success) {
            S.diagonal().array() += k_posterior_jitter;
            llt.compute(S);
            if (llt.info() != Eigen::Success) {
                throw error(error_kind::numeric, "diffused covariance is not positive definite",
                            "class " + std::to_string(class_id) + " mode " + std::to_string(m));
            }
        }
        Vec diff = z_flat - std::sqrt(abar) * mode.mean;
        double quad = diff.dot(llt.solve(diff));
        double logdet = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
        log_p(Eigen::Index(m)) = std::log(mode.weight) - 0.5 * (logdet + quad);
    }
    double shift = log_p.maxCoeff();
    Vec r = (log_p.array() - shift).exp();
    double total = r.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw error(error_kind::numeric, "mode responsibilities degenerate", "class " + std::to_string(class_id));
    }
    return r / total;
}

Vec OracleDenoiser::posterior_mean_x0(int class_id, const Vec & z_flat, double alpha_bar) const {
    const auto & modes = world_->classes[size_t(class_id)];
    const double abar = alpha_bar;
    const int n = int(z_flat.size());
    Vec r = responsibilities(class_id, z_flat, abar);

    // Per mode, E[x0 | z, mode] = mu + sqrt(abar) Sigma S^{-1} (z - sqrt(abar) mu)
    // with S = abar Sigma + (1 - abar) I; mix by responsibility.
    Vec mean = Vec::Zero(n);
    for (size_t m = 0; m < modes.size(); ++m) {
        const auto & mode = modes[m];
        Mat S = abar * mode.cov + (1.0 - abar) * Mat::Identity(n, n);
        Eigen::LLT<Mat> llt(S);
        if (llt.info() != Eigen::Success) {
            S.diagonal().array() += k_posterior_jitter;
            llt.compute(S);
            if (llt.info() != Eigen::Success) {
                throw error(error_kind::numeric, "diffused covariance is not positive definite",
                            "class " + std::to_string(class_id) + " mode " + std::to_string(m));
            }
        }
        Vec diff = z_flat - std::sqrt(abar) * mode.mean;
        Vec cond = mode.mean + std::sqrt(abar) * (mode.cov * llt.solve(diff));
        mean += r(Eigen::Index(m)) * cond;
    }
    return mean;
}

Mat OracleDenoiser::predict_noise(const Mat & z_t, int class_id, int t, const DiffusionSchedule & sched) const {
    sched.require_timestep(t);
    if (z_t.rows() != world_->frames || z_t.cols() != world_->dim) {
        throw error(error_kind::dimension, "input shape does not match world");
    }
    double abar = sched.alpha_bar_at(t);
    Vec z_flat = flatten(z_t);
    Vec x0 = posterior_mean_x0(class_id, z_flat, abar);
    Vec eps = (z_flat - std::sqrt(abar) * x0) / std::sqrt(1.0 - abar);
    Mat out = unflatten(eps, world_->frames, world_->dim);
    if (!all_finite(out)) {
        throw error(error_kind::numeric, "denoiser produced non-finite output",
                    "class " + std::to_string(class_id) + " t " + std::to_string(t));
    }
    return out;
}

Vec MlpDenoiser::encode(const Vec & z_flat, int class_id, int t, const DiffusionSchedule & sched) const {
    if (class_id < 0 || class_id >= class_count) {
        throw error(error_kind::precondition, "class id out of range", std::to_string(class_id));
    }
    double abar = sched.alpha_bar_at(t);
    Vec x = Vec::Zero(z_flat.size() + class_count + 3);
    x.head(z_flat.size()) = z_flat;
    x(z_flat.size() + class_id) = 1.0;
    x(x.size() - 3) = double(t) / double(sched.steps);
    x(x.size() - 2) = std::sqrt(abar);
    x(x.size() - 1) = std::sqrt(1.0 - abar);
    return x;
}

Mat MlpDenoiser::predict_noise(const Mat & z_t, int class_id, int t, const DiffusionSchedule & sched) const {
    sched.require_timestep(t);
    if (z_t.rows() != video_frames || z_t.cols() != video_dim) {
        throw error(error_kind::dimension, "input shape does not match model");
    }
    Vec enc = encode(flatten(z_t), class_id, t, sched);
    Vec out = enc(enc.size() - 2) * net.forward(enc);
    out += enc(enc.size() - 1) * enc.head(out.size());
    return unflatten(out, video_frames, video_dim);
}

double denoiser_batch_loss(const MlpDenoiser & model, const DiffusionSchedule & sched,
                           const std::vector<Vec> & inputs, const std::vector<Vec> & targets,
                           Mlp * grad_out) {
    (void)sched;
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw error(error_kind::precondition, "batch inputs and targets must align");
    }
    double loss = 0.0;
    const double inv = 1.0 / double(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
        Vec hidden;
        const Vec & x = inputs[i];
        double c_out = x(x.size() - 2);
        // sqrt(1 - abar) * z is the exact posterior noise mean for unit-variance
        // Gaussian data, and the residual past it shrinks like sqrt(abar) at
        // high t, so the net is scaled to fit only that correction
        Vec pred = c_out * model.net.forward(x, hidden);
        pred += x(x.size() - 1) * x.head(pred.size());
        Vec diff = pred - targets[i];
        loss += inv * diff.squaredNorm() / double(diff.size());
        if (grad_out) {
            Vec d_out = (2.0 * inv * c_out / double(diff.size())) * diff;
            model.net.backward(x, hidden, d_out, *grad_out);
        }
    }
    return loss;
}

DenoiserTrainResult train_denoiser(const VideoDataset & data, const DiffusionSchedule & sched,
                                   const DenoiserTrainConfig & cfg) {
    data.validate();
    if (data.records.empty()) throw error(error_kind::precondition, "training set is empty");
    if (cfg.epochs < 0 || cfg.batch < 1 || cfg.hidden < 1) {
        throw error(error_kind::config, "denoiser training needs positive batch and hidden and epochs >= 0");
    }
    if (!(cfg.learning_rate > 0.0)) throw error(error_kind::config, "learning rate must be positive");

    const int flat = data.flat_dim();
    Rng rng(seed_chain(cfg.seed, seed_tag("denoiser")));

    DenoiserTrainResult result;
    result.model.video_frames = data.frames;
    result.model.video_dim = data.dim;
    result.model.class_count = data.class_count;
    result.model.net = Mlp::init(flat + data.class_count + 3, cfg.hidden, flat, rng);

    std::vector<size_t> order(data.records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    Mlp grad = Mlp::zeros_like(result.model.net);
    Mlp velocity = Mlp::zeros_like(result.model.net);
    const double momentum = 0.9;
    std::vector<Vec> inputs, targets;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = cfg.learning_rate * (1.0 - 0.9 * double(epoch) / double(cfg.epochs));
        rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += size_t(cfg.batch)) {
            size_t stop = std::min(order.size(), start + size_t(cfg.batch));
            inputs.clear();
            targets.clear();
            for (size_t i = start; i < stop; ++i) {
                const auto & rec = data.records[order[i]];
                int t = int(rng.bounded(uint64_t(sched.steps))) + 1;
                Mat noise = rng.normal_matrix(data.frames, data.dim);
                Mat z = forward_diffuse(rec.latent, t, noise, sched);
                inputs.push_back(result.model.encode(flatten(z), int(rec.class_id), t, sched));
                targets.push_back(flatten(noise));
            }
            grad.set_zero();
            double loss = denoiser_batch_loss(result.model, sched, inputs, targets, &grad);
            velocity.scale(momentum);
            velocity.add_scaled(grad, 1.0);
            result.model.net.add_scaled(velocity, -lr);
            epoch_loss += loss;
            ++batches;
        }
        result.epoch_loss.push_back(epoch_loss / double(batches));
    }

    if (!result.epoch_loss.empty() && !std::isfinite(result.epoch_loss.back())) {
        throw error(error_kind::training, "denoiser loss diverged", "final loss not finite");
    }
    return result;
}

}  // namespace gvd
