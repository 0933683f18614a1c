#include "gvd/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "gvd/parallel.hpp"
#include "gvd/rng.hpp"

namespace gvd {

void GuidanceConfig::validate(const DiffusionSchedule & sched) const {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw error(error_kind::config, "guidance strength must be finite and non-negative");
    }
    if (t_stop < 0 || t_stop > sched.steps) {
        throw error(error_kind::config, "t_stop must be within [0, steps]",
                    "t_stop=" + std::to_string(t_stop) + " steps=" + std::to_string(sched.steps));
    }
    if (sampler_steps < 1 || sampler_steps > sched.steps) {
        throw error(error_kind::config, "sampler_steps must be within [1, steps]",
                    "sampler_steps=" + std::to_string(sampler_steps));
    }
}

Mat guidance_term(const Vec & prototype, const Mat & x0_hat) {
    if (prototype.size() != x0_hat.rows() * x0_hat.cols()) {
        throw error(error_kind::dimension, "prototype length does not match video shape");
    }
    return unflatten(prototype, int(x0_hat.rows()), int(x0_hat.cols())) - x0_hat;
}

double frame_lambda(double lambda, int f, int F) {
    if (f < 0 || f >= F) {
        throw error(error_kind::precondition, "frame index out of range",
                    "f=" + std::to_string(f) + " F=" + std::to_string(F));
    }
    return lambda * (1.0 - double(f) / double(F));
}

Mat guided_eps(const Mat & eps, const Mat & g, const GuidanceConfig & cfg, int t,
               const DiffusionSchedule & sched) {
    if (eps.rows() != g.rows() || eps.cols() != g.cols()) {
        throw error(error_kind::dimension, "guidance term shape does not match noise prediction");
    }
    sched.require_timestep(t);
    // Returning the input untouched keeps the inactive branch and lambda = 0
    // bit-identical to the unguided path.
    if (!cfg.guidance_active(t) || cfg.lambda == 0.0) return eps;

    const double root = std::sqrt(1.0 - sched.alpha_bar_at(t));
    const int F = int(eps.rows());
    Mat out = eps;
    for (int f = 0; f < F; ++f) {
        double lf = cfg.frame_decay ? frame_lambda(cfg.lambda, f, F) : cfg.lambda;
        out.row(f) -= lf * root * g.row(f);
    }
    return out;
}

Mat ddim_step(const Mat & x0_hat, const Mat & eps_prime, int t, int t_prev,
              const DiffusionSchedule & sched) {
    if (x0_hat.rows() != eps_prime.rows() || x0_hat.cols() != eps_prime.cols()) {
        throw error(error_kind::dimension, "x0 and noise shapes disagree");
    }
    if (t_prev < 0 || t_prev >= t || t > sched.steps) {
        throw error(error_kind::precondition, "ddim step needs 0 <= t_prev < t <= steps",
                    "t=" + std::to_string(t) + " t_prev=" + std::to_string(t_prev));
    }
    double abar_prev = sched.alpha_bar_at(t_prev);
    return std::sqrt(abar_prev) * x0_hat + std::sqrt(1.0 - abar_prev) * eps_prime;
}

std::vector<int> sampler_timesteps(int steps, int sampler_steps) {
    if (sampler_steps < 1 || sampler_steps > steps) {
        throw error(error_kind::config, "sampler_steps must be within [1, steps]");
    }
    std::vector<int> ts(size_t(sampler_steps) + 1);
    for (int i = 0; i <= sampler_steps; ++i) {
        ts[size_t(i)] = int(std::llround(double(i) * double(steps) / double(sampler_steps)));
    }
    for (size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] <= ts[i - 1]) {
            throw error(error_kind::numeric, "strided timestep sequence is not strictly increasing");
        }
    }
    return ts;
}

namespace {

void record_step(SampleTrace * trace, int t, const Mat & g, const Mat & x0_guided, const Mat & proto,
                 const GuidanceConfig & cfg) {
    if (!trace) return;
    SampleStep step;
    step.t = t;
    step.guidance_norm = g.norm();
    step.x0_distance = (x0_guided - proto).norm();
    const int F = int(g.rows());
    step.frame_lambda.resize(size_t(F), 0.0);
    if (cfg.guidance_active(t)) {
        for (int f = 0; f < F; ++f) {
            step.frame_lambda[size_t(f)] = cfg.frame_decay ? frame_lambda(cfg.lambda, f, F) : cfg.lambda;
        }
    }
    trace->steps.push_back(std::move(step));
}

[[noreturn]] void rethrow_with_step(const error & e, int class_id, int t) {
    std::string ctx = "class " + std::to_string(class_id) + " step t=" + std::to_string(t);
    if (!e.context().empty()) ctx += "; " + e.context();
    throw error(e.kind(), e.message(), ctx);
}

}  // namespace

Mat sample_guided(const Denoiser & den, int class_id, const Vec & prototype,
                  const GuidanceConfig & cfg, const DiffusionSchedule & sched, uint64_t seed,
                  SampleTrace * trace) {
    cfg.validate(sched);
    const int F = den.frames();
    const int D = den.dim();
    if (prototype.size() != Eigen::Index(F) * D) {
        throw error(error_kind::dimension, "prototype length does not match denoiser shape");
    }
    Mat proto = unflatten(prototype, F, D);

    Rng rng(seed);
    Mat z = rng.normal_matrix(F, D);
    std::vector<int> ts = sampler_timesteps(sched.steps, cfg.sampler_steps);

    for (size_t i = ts.size() - 1; i >= 1; --i) {
        int t = ts[i];
        int t_prev = ts[i - 1];
        try {
            Mat eps = den.predict_noise(z, class_id, t, sched);
            Mat x0 = predict_x0(z, eps, t, sched);
            Mat g = guidance_term(prototype, x0);
            Mat eps_p = guided_eps(eps, g, cfg, t, sched);
            Mat x0_p = predict_x0(z, eps_p, t, sched);
            record_step(trace, t, g, x0_p, proto, cfg);
            z = ddim_step(x0_p, eps_p, t, t_prev, sched);
        } catch (const error & e) {
            rethrow_with_step(e, class_id, t);
        }
    }
    if (!all_finite(z)) {
        throw error(error_kind::numeric, "sampler produced non-finite output", "class " + std::to_string(class_id));
    }
    return z;
}

Mat sample_naive(const Denoiser & den, int class_id, const GuidanceConfig & cfg,
                 const DiffusionSchedule & sched, uint64_t seed) {
    GuidanceConfig unguided = cfg;
    unguided.lambda = 0.0;
    Vec zero_proto = Vec::Zero(Eigen::Index(den.frames()) * den.dim());
    return sample_guided(den, class_id, zero_proto, unguided, sched, seed, nullptr);
}

Mat sample_knoise(const Denoiser & den, int class_id, const Vec & prototype, int t_start,
                  const GuidanceConfig & cfg, const DiffusionSchedule & sched, uint64_t seed,
                  SampleTrace * trace) {
    cfg.validate(sched);
    const int F = den.frames();
    const int D = den.dim();
    if (prototype.size() != Eigen::Index(F) * D) {
        throw error(error_kind::dimension, "prototype length does not match denoiser shape");
    }
    if (t_start < 0 || t_start > sched.steps) {
        throw error(error_kind::precondition, "t_start must be within [0, steps]",
                    "t_start=" + std::to_string(t_start));
    }
    Mat proto = unflatten(prototype, F, D);
    if (t_start == 0) return proto;

    Rng rng(seed);
    Mat noise = rng.normal_matrix(F, D);
    Mat z = forward_diffuse(proto, t_start, noise, sched);

    std::vector<int> ts = sampler_timesteps(sched.steps, cfg.sampler_steps);
    size_t below = ts.size() - 1;
    while (ts[below] >= t_start) --below;  // ts[0] == 0 < t_start bounds the scan

    int t = t_start;
    for (size_t i = below + 1; i >= 1; --i) {
        int t_prev = ts[i - 1];
        try {
            Mat eps = den.predict_noise(z, class_id, t, sched);
            Mat x0 = predict_x0(z, eps, t, sched);
            if (trace) {
                SampleStep step;
                step.t = t;
                step.guidance_norm = (proto - x0).norm();
                step.frame_lambda.assign(size_t(F), 0.0);
                step.x0_distance = step.guidance_norm;
                trace->steps.push_back(std::move(step));
            }
            z = ddim_step(x0, eps, t, t_prev, sched);
        } catch (const error & e) {
            rethrow_with_step(e, class_id, t);
        }
        t = t_prev;
    }
    if (!all_finite(z)) {
        throw error(error_kind::numeric, "sampler produced non-finite output", "class " + std::to_string(class_id));
    }
    return z;
}

std::vector<Mat> distill_class(const Denoiser & den, int class_id, const std::vector<Vec> & prototypes,
                               DistillMethod method, int knoise_t_start, const GuidanceConfig & cfg,
                               const DiffusionSchedule & sched, uint64_t seed, int workers,
                               std::vector<SampleTrace> * traces) {
    if (prototypes.empty()) {
        throw error(error_kind::precondition, "class has no prototypes", "class " + std::to_string(class_id));
    }
    std::vector<Mat> out(prototypes.size());
    if (traces) traces->assign(prototypes.size(), SampleTrace{});

    parallel_for(prototypes.size(), workers, [&](size_t k) {
        uint64_t inst_seed = seed_chain(seed, k);
        SampleTrace * tr = traces ? &(*traces)[k] : nullptr;
        switch (method) {
            case DistillMethod::gvd:
                out[k] = sample_guided(den, class_id, prototypes[k], cfg, sched, inst_seed, tr);
                break;
            case DistillMethod::naive:
                out[k] = sample_naive(den, class_id, cfg, sched, inst_seed);
                break;
            case DistillMethod::knoise:
                out[k] = sample_knoise(den, class_id, prototypes[k], knoise_t_start, cfg, sched, inst_seed, tr);
                break;
            case DistillMethod::proto_repeat:
                out[k] = unflatten(prototypes[k], den.frames(), den.dim());
                break;
        }
    });
    return out;
}

void save_traces_csv(const std::vector<InstanceTrace> & traces, const std::string & path) {
    std::FILE * f = std::fopen(path.c_str(), "wb");
    if (!f) throw error(error_kind::io, "cannot open file for writing", path);
    std::fprintf(f, "instance_id,class_id,step_t,g_norm,x0_dist\n");
    for (const auto & inst : traces) {
        for (const auto & step : inst.trace.steps) {
            std::fprintf(f, "%llu,%u,%d,%.17g,%.17g\n", (unsigned long long)inst.instance_id,
                         inst.class_id, step.t, step.guidance_norm, step.x0_distance);
        }
    }
    if (std::fclose(f) != 0) throw error(error_kind::io, "close failed", path);
}

}  // namespace gvd
