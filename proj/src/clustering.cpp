#include "gvd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gvd/parallel.hpp"
#include "gvd/rng.hpp"

namespace gvd {

namespace {

// Cost of assigning a point to a center: squared L2, or one minus the dot
// product for unit vectors under the cosine metric. SSE below is the sum of
// these costs.
double point_cost(const Vec & x, const Vec & center, ClusterMetric metric) {
    if (metric == ClusterMetric::cosine) return std::max(0.0, 1.0 - x.dot(center));
    return (x - center).squaredNorm();
}

struct RestartOutcome {
    std::vector<Vec> centers;
    std::vector<int> assignment;  // canonical point order
    double sse = 0.0;
    std::vector<double> sse_trace;
};

int nearest(const Vec & x, const std::vector<Vec> & centers, ClusterMetric metric) {
    int best = 0;
    double best_cost = point_cost(x, centers[0], metric);
    for (size_t j = 1; j < centers.size(); ++j) {
        double c = point_cost(x, centers[j], metric);
        if (c < best_cost) {
            best_cost = c;
            best = int(j);
        }
    }
    return best;
}

std::vector<Vec> seed_centers(const std::vector<Vec> & pts, int k, ClusterMetric metric, Rng & rng) {
    const size_t n = pts.size();
    std::vector<Vec> centers;
    centers.reserve(size_t(k));
    std::vector<bool> chosen(n, false);
    std::vector<double> dist(n, 0.0);

    size_t first = size_t(rng.bounded(n));
    centers.push_back(pts[first]);
    chosen[first] = true;
    for (size_t i = 0; i < n; ++i) dist[i] = point_cost(pts[i], centers[0], metric);

    while (int(centers.size()) < k) {
        double total = std::accumulate(dist.begin(), dist.end(), 0.0);
        size_t pick = n;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                acc += dist[i];
                if (u < acc) { pick = i; break; }
            }
            if (pick == n) pick = n - 1;  // u landed on accumulated rounding
        } else {
            // Remaining points coincide with existing centers; take the first
            // unchosen one so duplicate-heavy inputs still get k centers.
            for (size_t i = 0; i < n; ++i) {
                if (!chosen[i]) { pick = i; break; }
            }
            if (pick == n) pick = 0;
        }
        centers.push_back(pts[pick]);
        chosen[pick] = true;
        for (size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], point_cost(pts[i], centers.back(), metric));
    }
    return centers;
}

RestartOutcome run_lloyd(const std::vector<Vec> & pts, const ClusteringConfig & cfg, uint64_t restart_seed) {
    const size_t n = pts.size();
    const int k = cfg.k;
    Rng rng(restart_seed);

    RestartOutcome out;
    out.centers = seed_centers(pts, k, cfg.metric, rng);
    out.assignment.assign(n, -1);

    std::vector<int> prev(n, -1);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double sse = 0.0;
        for (size_t i = 0; i < n; ++i) {
            out.assignment[i] = nearest(pts[i], out.centers, cfg.metric);
            sse += point_cost(pts[i], out.centers[size_t(out.assignment[i])], cfg.metric);
        }
        if (!out.sse_trace.empty() && sse > out.sse_trace.back() * (1.0 + 1e-9) + 1e-12) {
            throw error(error_kind::numeric, "clustering objective increased between iterations",
                        "iteration " + std::to_string(iter));
        }
        out.sse_trace.push_back(sse);
        out.sse = sse;
        if (out.assignment == prev) break;
        prev = out.assignment;

        std::vector<Vec> sums(size_t(k), Vec::Zero(pts[0].size()));
        std::vector<size_t> counts(size_t(k), 0);
        for (size_t i = 0; i < n; ++i) {
            sums[size_t(out.assignment[i])] += pts[i];
            ++counts[size_t(out.assignment[i])];
        }
        for (int j = 0; j < k; ++j) {
            bool degenerate = counts[size_t(j)] == 0;
            Vec center;
            if (!degenerate) {
                center = sums[size_t(j)] / double(counts[size_t(j)]);
                if (cfg.metric == ClusterMetric::cosine) {
                    double norm = center.norm();
                    if (norm < 1e-12) {
                        degenerate = true;  // opposing members cancelled out
                    } else {
                        center /= norm;
                    }
                }
            }
            if (degenerate) {
                // Reseed to the point currently worst served by its own
                // center; cannot raise the next assignment's objective.
                size_t far_idx = 0;
                double far_cost = -1.0;
                for (size_t i = 0; i < n; ++i) {
                    double c = point_cost(pts[i], out.centers[size_t(out.assignment[i])], cfg.metric);
                    if (c > far_cost) { far_cost = c; far_idx = i; }
                }
                center = pts[far_idx];
            }
            out.centers[size_t(j)] = std::move(center);
        }
    }
    return out;
}

bool lex_less(const Vec & a, const Vec & b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a(i) != b(i)) return a(i) < b(i);
    }
    return false;
}

std::vector<Vec> first_frame_points(const VideoDataset & ds) {
    std::vector<Vec> pts;
    pts.reserve(ds.records.size());
    for (const auto & r : ds.records) pts.push_back(r.latent.row(0).transpose());
    return pts;
}

}  // namespace

void ClusteringConfig::validate() const {
    if (k < 1) throw error(error_kind::config, "clustering needs k >= 1");
    if (max_iters < 1) throw error(error_kind::config, "clustering needs max_iters >= 1");
    if (restarts < 1) throw error(error_kind::config, "clustering needs restarts >= 1");
}

KMeansResult kmeans_direct(const std::vector<Vec> & points, const ClusteringConfig & cfg) {
    cfg.validate();
    if (points.size() < size_t(cfg.k)) {
        throw error(error_kind::precondition, "fewer points than clusters",
                    std::to_string(points.size()) + " points, k=" + std::to_string(cfg.k));
    }
    const Eigen::Index dim = points[0].size();
    for (const auto & p : points) {
        if (p.size() != dim) throw error(error_kind::dimension, "clustering points have mixed dimensions");
        if (!all_finite(p)) throw error(error_kind::numeric, "clustering point contains non-finite values");
    }

    std::vector<Vec> work(points);
    if (cfg.metric == ClusterMetric::cosine) {
        for (size_t i = 0; i < work.size(); ++i) {
            double norm = work[i].norm();
            if (norm < 1e-12) {
                throw error(error_kind::precondition, "zero vector cannot be clustered under the cosine metric",
                            "point " + std::to_string(i));
            }
            work[i] /= norm;
        }
    }

    // Canonical processing order decouples the result from the caller's
    // point ordering.
    std::vector<size_t> canon(work.size());
    for (size_t i = 0; i < canon.size(); ++i) canon[i] = i;
    std::sort(canon.begin(), canon.end(), [&](size_t a, size_t b) {
        if (lex_less(work[a], work[b])) return true;
        if (lex_less(work[b], work[a])) return false;
        return a < b;
    });
    std::vector<Vec> pts(work.size());
    for (size_t i = 0; i < canon.size(); ++i) pts[i] = work[canon[i]];

    std::vector<RestartOutcome> outcomes(size_t(cfg.restarts));
    parallel_for(size_t(cfg.restarts), cfg.workers, [&](size_t r) {
        outcomes[r] = run_lloyd(pts, cfg, seed_chain(seed_chain(cfg.seed, seed_tag("kmeans")), r));
    });

    size_t best = 0;
    for (size_t r = 1; r < outcomes.size(); ++r) {
        if (outcomes[r].sse < outcomes[best].sse) best = r;
    }

    KMeansResult result;
    result.centers = std::move(outcomes[best].centers);
    result.sse = outcomes[best].sse;
    result.sse_trace = std::move(outcomes[best].sse_trace);
    result.assignment.assign(points.size(), -1);
    for (size_t i = 0; i < canon.size(); ++i) result.assignment[canon[i]] = outcomes[best].assignment[i];
    return result;
}

int assign(const Vec & x, const std::vector<Vec> & centers, ClusterMetric metric) {
    if (centers.empty()) throw error(error_kind::precondition, "assignment needs at least one center");
    for (const auto & c : centers) {
        if (c.size() != x.size()) throw error(error_kind::dimension, "center dimension does not match point");
    }
    if (metric == ClusterMetric::cosine) {
        double xn = x.norm();
        if (xn < 1e-12) throw error(error_kind::precondition, "zero vector has no cosine assignment");
        Vec xu = x / xn;
        int best = 0;
        double best_cost = -1.0;
        for (size_t j = 0; j < centers.size(); ++j) {
            double cn = centers[j].norm();
            if (cn < 1e-12) throw error(error_kind::precondition, "zero center under cosine metric");
            double cost = std::max(0.0, 1.0 - xu.dot(centers[j] / cn));
            if (j == 0 || cost < best_cost) {
                best_cost = cost;
                best = int(j);
            }
        }
        return best;
    }
    return nearest(x, centers, ClusterMetric::euclidean);
}

std::vector<Vec> cluster_real_video(const VideoDataset & class_videos, const ClusteringConfig & cfg) {
    class_videos.validate();
    auto frame0 = first_frame_points(class_videos);
    KMeansResult km = kmeans_direct(frame0, cfg);

    // Each center claims the closest real video by its first frame; a video
    // already claimed falls through to the next-nearest unused one.
    std::vector<bool> used(frame0.size(), false);
    std::vector<Vec> prototypes;
    prototypes.reserve(km.centers.size());
    for (const auto & center : km.centers) {
        size_t pick = frame0.size();
        double best = 0.0;
        for (size_t i = 0; i < frame0.size(); ++i) {
            if (used[i]) continue;
            double d = (frame0[i] - center).squaredNorm();
            if (pick == frame0.size() || d < best) {
                best = d;
                pick = i;
            }
        }
        if (pick == frame0.size()) {
            throw error(error_kind::precondition, "ran out of distinct videos for prototypes");
        }
        used[pick] = true;
        prototypes.push_back(flatten(class_videos.records[pick].latent));
    }
    return prototypes;
}

std::vector<Vec> cluster_dummy_video(const VideoDataset & class_videos, const ClusteringConfig & cfg) {
    class_videos.validate();
    auto frame0 = first_frame_points(class_videos);
    KMeansResult km = kmeans_direct(frame0, cfg);

    std::vector<Vec> prototypes;
    prototypes.reserve(km.centers.size());
    for (const auto & center : km.centers) {
        Vec proto(class_videos.flat_dim());
        for (int f = 0; f < class_videos.frames; ++f) proto.segment(f * class_videos.dim, class_videos.dim) = center;
        prototypes.push_back(std::move(proto));
    }
    return prototypes;
}

ClusterCenters cluster_dataset(const VideoDataset & data, const ClusteringConfig & cfg) {
    data.validate();
    cfg.validate();

    ClusterCenters out;
    out.frames = data.frames;
    out.dim = data.dim;
    out.variant = cfg.variant;
    out.per_class.resize(size_t(data.class_count));
    out.sse_per_class.assign(size_t(data.class_count), 0.0);

    for (int c = 0; c < data.class_count; ++c) {
        ClusteringConfig class_cfg = cfg;
        class_cfg.seed = seed_chain(seed_chain(cfg.seed, seed_tag("class")), uint64_t(c));

        if (cfg.variant == ClusterVariant::direct) {
            std::vector<Vec> pts;
            for (const auto & r : data.records) {
                if (int(r.class_id) == c) pts.push_back(flatten(r.latent));
            }
            if (pts.empty()) {
                throw error(error_kind::precondition, "class has no records to cluster", "class " + std::to_string(c));
            }
            KMeansResult km = kmeans_direct(pts, class_cfg);
            out.per_class[size_t(c)] = std::move(km.centers);
            out.sse_per_class[size_t(c)] = km.sse;
        } else {
            VideoDataset subset;
            subset.frames = data.frames;
            subset.dim = data.dim;
            subset.class_count = data.class_count;
            for (const auto & r : data.records) {
                if (int(r.class_id) == c) subset.records.push_back(r);
            }
            if (subset.records.empty()) {
                throw error(error_kind::precondition, "class has no records to cluster", "class " + std::to_string(c));
            }
            out.per_class[size_t(c)] = cfg.variant == ClusterVariant::real_video
                                           ? cluster_real_video(subset, class_cfg)
                                           : cluster_dummy_video(subset, class_cfg);
        }
    }
    return out;
}

VideoDataset centers_to_dataset(const ClusterCenters & centers) {
    VideoDataset ds;
    ds.frames = centers.frames;
    ds.dim = centers.dim;
    ds.class_count = int(centers.per_class.size());
    for (size_t c = 0; c < centers.per_class.size(); ++c) {
        for (const auto & proto : centers.per_class[c]) {
            ds.append(uint32_t(c), unflatten(proto, centers.frames, centers.dim));
        }
    }
    return ds;
}

ClusterCenters centers_from_dataset(const VideoDataset & ds, ClusterVariant variant) {
    ds.validate();
    ClusterCenters out;
    out.frames = ds.frames;
    out.dim = ds.dim;
    out.variant = variant;
    out.per_class.resize(size_t(ds.class_count));
    out.sse_per_class.assign(size_t(ds.class_count), 0.0);
    for (const auto & r : ds.records) {
        out.per_class[r.class_id].push_back(flatten(r.latent));
    }
    return out;
}

}  // namespace gvd
