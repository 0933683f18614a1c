// Diversity metrics over feature sets: codebook-histogram entropy, coverage
// against a nearest-neighbor threshold, and mean pairwise distance.
#pragma once

#include <cstdint>
#include <vector>

#include "gvd/classifier.hpp"
#include "gvd/dataset.hpp"
#include "gvd/latent.hpp"

namespace gvd {

std::vector<Vec> dataset_features(const VideoDataset & ds);
std::vector<Vec> dataset_hidden_features(const VideoDataset & ds, const Classifier & model);

// Percentile by linear interpolation between order statistics: rank = pct /
// 100 * (n - 1).
double percentile_linear(std::vector<double> values, double pct);

struct EntropyConfig {
    int bins = 32;
    int max_iters = 50;
    int restarts = 2;
    uint64_t seed = 0;
    int workers = 1;
};

// Fits a codebook of `bins` centers on the reference set, histograms the
// features over it, and returns the Shannon entropy (natural log).
double entropy_metric(const std::vector<Vec> & features, const std::vector<Vec> & reference,
                      const EntropyConfig & cfg);

// Threshold tau is the 90th percentile of each original point's
// nearest-other-neighbor distance; returns the fraction of original points
// within tau of some small-set point.
double coverage_metric(const std::vector<Vec> & original, const std::vector<Vec> & small);

// Mean Euclidean distance over unordered pairs of L2-normalized features.
double mpd_metric(const std::vector<Vec> & features);

}  // namespace gvd
