// Synthetic latent-video world. Each class is a mixture of modes; a mode is
// a linear-Gaussian trajectory z_{f+1} = A z_f + b + noise, which makes every
// flattened video an exact Gaussian whose moments are computed here in closed
// form.
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gvd/dataset.hpp"
#include "gvd/latent.hpp"

namespace gvd {

struct ModeSpec {
    double weight = 1.0;
    Vec init_mean;              // dim
    double init_cov_scale = 1.0;  // initial frame covariance is scale^2 * I
    Mat dynamics;               // dim x dim
    Vec drift;                  // dim
    double process_noise = 0.1;  // per-step noise stddev
};

struct ClassSpec {
    std::vector<ModeSpec> modes;
};

struct WorldSpec {
    int frames = 0;
    int dim = 0;
    uint64_t seed = 0;
    std::vector<ClassSpec> classes;

    void validate() const;
};

// A mode's flattened-video Gaussian: mean of length frames*dim and full
// covariance with cross-frame blocks.
struct VideoMode {
    double weight = 0.0;
    Vec mean;
    Mat cov;
    Mat chol_lower;  // Cholesky factor of cov, used for sampling
};

struct GaussianWorld {
    int frames = 0;
    int dim = 0;
    std::vector<std::vector<VideoMode>> classes;  // [class][mode]

    int flat_dim() const { return frames * dim; }
    int class_count() const { return int(classes.size()); }
};

// Rolls the per-frame moment recursion into flattened-video moments and
// factorizes each covariance. Rejects dynamics with spectral radius > 1.2.
GaussianWorld build_world(const WorldSpec & spec);

// Draws n_per_class videos per class. Record order is class-major and every
// record's noise stream depends only on (seed, class, index), so output is
// independent of the worker count.
VideoDataset sample_dataset(const GaussianWorld & world, int n_per_class, uint64_t seed, int workers = 1);

// The default benchmark world: rotation-like stable dynamics shared within a
// class, modes separated by their initial means, moderate class overlap. The
// seed controls the generated parameters, not the later sampling.
WorldSpec default_world_spec(int frames = 8, int dim = 4, int classes = 5, int modes = 4,
                             uint64_t seed = 0);

}  // namespace gvd
