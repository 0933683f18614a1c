// Per-class prototype selection: Lloyd's k-means with k-means++ seeding and
// restarts, plus the variants that cluster only the first frame and either
// pick the nearest real video or replicate the center frame.
#pragma once

#include <cstdint>
#include <vector>

#include "gvd/dataset.hpp"
#include "gvd/latent.hpp"

namespace gvd {

enum class ClusterVariant { direct, real_video, dummy_video };
enum class ClusterMetric { euclidean, cosine };

struct ClusteringConfig {
    int k = 1;
    ClusterVariant variant = ClusterVariant::direct;
    ClusterMetric metric = ClusterMetric::euclidean;
    int max_iters = 100;
    int restarts = 4;
    uint64_t seed = 0;
    int workers = 1;

    void validate() const;
};

struct KMeansResult {
    std::vector<Vec> centers;
    std::vector<int> assignment;  // aligned with the input point order
    double sse = 0.0;
    std::vector<double> sse_trace;  // winning restart, one entry per Lloyd iteration
};

// Points are processed in a canonical sorted order internally, so the result
// is identical under any permutation of the input.
KMeansResult kmeans_direct(const std::vector<Vec> & points, const ClusteringConfig & cfg);

// Nearest center index under the metric, lowest index on ties.
int assign(const Vec & x, const std::vector<Vec> & centers, ClusterMetric metric = ClusterMetric::euclidean);

// First-frame clustering variants. Both take the records of a single class.
std::vector<Vec> cluster_real_video(const VideoDataset & class_videos, const ClusteringConfig & cfg);
std::vector<Vec> cluster_dummy_video(const VideoDataset & class_videos, const ClusteringConfig & cfg);

struct ClusterCenters {
    int frames = 0;
    int dim = 0;
    ClusterVariant variant = ClusterVariant::direct;
    std::vector<std::vector<Vec>> per_class;  // flattened prototypes
    std::vector<double> sse_per_class;        // direct variant only, 0 otherwise
};

// Runs the configured variant independently per class with a class-derived
// seed.
ClusterCenters cluster_dataset(const VideoDataset & data, const ClusteringConfig & cfg);

// Centers round-trip through the regular dataset format, one record per
// prototype.
VideoDataset centers_to_dataset(const ClusterCenters & centers);
ClusterCenters centers_from_dataset(const VideoDataset & ds, ClusterVariant variant);

}  // namespace gvd
