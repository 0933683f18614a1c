#include "gvd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gvd/clustering.hpp"

namespace gvd {

std::vector<Vec> dataset_features(const VideoDataset & ds) {
    std::vector<Vec> feats;
    feats.reserve(ds.records.size());
    for (const auto & r : ds.records) feats.push_back(flatten(r.latent));
    return feats;
}

std::vector<Vec> dataset_hidden_features(const VideoDataset & ds, const Classifier & model) {
    std::vector<Vec> feats;
    feats.reserve(ds.records.size());
    for (const auto & r : ds.records) feats.push_back(model.hidden_features(r.latent));
    return feats;
}

double percentile_linear(std::vector<double> values, double pct) {
    if (values.empty()) throw error(error_kind::precondition, "percentile of an empty list");
    if (!(pct >= 0.0) || !(pct <= 100.0)) {
        throw error(error_kind::precondition, "percentile must be within [0, 100]");
    }
    std::sort(values.begin(), values.end());
    double rank = pct / 100.0 * double(values.size() - 1);
    size_t lo = size_t(rank);
    if (lo + 1 >= values.size()) return values.back();
    double frac = rank - double(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double entropy_metric(const std::vector<Vec> & features, const std::vector<Vec> & reference,
                      const EntropyConfig & cfg) {
    if (features.empty()) throw error(error_kind::precondition, "entropy needs features");
    if (reference.size() < size_t(cfg.bins)) {
        throw error(error_kind::precondition, "entropy codebook needs at least `bins` reference points",
                    std::to_string(reference.size()) + " < " + std::to_string(cfg.bins));
    }

    ClusteringConfig km;
    km.k = cfg.bins;
    km.max_iters = cfg.max_iters;
    km.restarts = cfg.restarts;
    km.seed = cfg.seed;
    km.workers = cfg.workers;
    KMeansResult codebook = kmeans_direct(reference, km);

    std::vector<size_t> counts(size_t(cfg.bins), 0);
    for (const auto & f : features) {
        ++counts[size_t(assign(f, codebook.centers))];
    }
    double entropy = 0.0;
    for (size_t count : counts) {
        if (count == 0) continue;
        double p = double(count) / double(features.size());
        entropy -= p * std::log(p);
    }
    return entropy;
}

double coverage_metric(const std::vector<Vec> & original, const std::vector<Vec> & small) {
    if (original.size() < 2) {
        throw error(error_kind::precondition, "coverage needs at least two original points");
    }
    if (small.empty()) throw error(error_kind::precondition, "coverage needs a nonempty small set");

    std::vector<double> nn(original.size(), std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < original.size(); ++i) {
        for (size_t j = 0; j < original.size(); ++j) {
            if (i == j) continue;
            nn[i] = std::min(nn[i], (original[i] - original[j]).norm());
        }
    }
    double tau = percentile_linear(nn, 90.0);

    size_t covered = 0;
    for (const auto & point : original) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto & s : small) best = std::min(best, (point - s).norm());
        covered += best <= tau;
    }
    return double(covered) / double(original.size());
}

double mpd_metric(const std::vector<Vec> & features) {
    if (features.size() < 2) {
        throw error(error_kind::precondition, "mean pairwise distance needs at least two points");
    }
    std::vector<Vec> unit(features);
    for (auto & v : unit) {
        double norm = v.norm();
        if (norm > 0.0) v /= norm;
    }
    double total = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < unit.size(); ++i) {
        for (size_t j = i + 1; j < unit.size(); ++j) {
            total += (unit[i] - unit[j]).norm();
            ++pairs;
        }
    }
    return total / double(pairs);
}

}  // namespace gvd
