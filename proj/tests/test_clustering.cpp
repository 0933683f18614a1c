#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gvd/clustering.hpp"
#include "gvd/rng.hpp"

using namespace gvd;

namespace {

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

std::vector<Vec> sorted_centers(std::vector<Vec> centers) {
    std::sort(centers.begin(), centers.end(), [](const Vec & a, const Vec & b) {
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) != b(i)) return a(i) < b(i);
        }
        return false;
    });
    return centers;
}

double assignment_sse(const std::vector<Vec> & points, const std::vector<int> & labels, int k) {
    std::vector<Vec> sums(size_t(k), Vec::Zero(points[0].size()));
    std::vector<int> counts(size_t(k), 0);
    for (size_t i = 0; i < points.size(); ++i) {
        sums[size_t(labels[i])] += points[i];
        ++counts[size_t(labels[i])];
    }
    double sse = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
        Vec center = sums[size_t(labels[i])] / double(counts[size_t(labels[i])]);
        sse += (points[i] - center).squaredNorm();
    }
    return sse;
}

VideoDataset single_class_videos(const std::vector<Mat> & videos) {
    VideoDataset ds;
    ds.frames = int(videos[0].rows());
    ds.dim = int(videos[0].cols());
    ds.class_count = 1;
    for (const Mat & v : videos) ds.append(0, v);
    return ds;
}

}  // namespace

TEST_CASE("k equal to n gives zero objective and the input points back") {
    std::vector<Vec> points = {vec2(0, 0), vec2(5, 1), vec2(-3, 2), vec2(1, 7)};
    ClusteringConfig cfg;
    cfg.k = 4;
    cfg.seed = 2;
    KMeansResult result = kmeans_direct(points, cfg);
    CHECK(result.sse == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    auto got = sorted_centers(result.centers);
    auto want = sorted_centers(points);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) CHECK((got[i] - want[i]).norm() < 1e-12);
}

TEST_CASE("k=1 returns the arithmetic mean") {
    std::vector<Vec> points = {vec2(1, 2), vec2(3, 4), vec2(5, 12), vec2(-1, 2)};
    ClusteringConfig cfg;
    cfg.k = 1;
    cfg.seed = 5;
    KMeansResult result = kmeans_direct(points, cfg);
    REQUIRE(result.centers.size() == 1);
    CHECK((result.centers[0] - vec2(2.0, 5.0)).norm() < 1e-12);
}

TEST_CASE("six planar points reach the exhaustive optimum at k=2") {
    std::vector<Vec> points = {vec2(0.0, 0.1),  vec2(0.3, -0.2), vec2(-0.1, 0.4),
                               vec2(4.0, 4.2),  vec2(4.4, 3.9),  vec2(3.8, 4.5)};
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.restarts = 8;
    cfg.seed = 3;
    KMeansResult result = kmeans_direct(points, cfg);

    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << 6) - 1; ++mask) {
        std::vector<int> labels(6);
        for (int i = 0; i < 6; ++i) labels[size_t(i)] = (mask >> i) & 1;
        best = std::min(best, assignment_sse(points, labels, 2));
    }
    CHECK(result.sse == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("lloyd iterations never increase the objective") {
    Rng rng(11);
    std::vector<Vec> points;
    for (int i = 0; i < 60; ++i) points.push_back(rng.normal_vector(3) * 2.0);
    ClusteringConfig cfg;
    cfg.k = 5;
    cfg.seed = 7;
    cfg.restarts = 3;
    KMeansResult result = kmeans_direct(points, cfg);
    REQUIRE(result.sse_trace.size() >= 1);
    for (size_t i = 1; i < result.sse_trace.size(); ++i)
        CHECK(result.sse_trace[i] <= result.sse_trace[i - 1] + 1e-9);
    CHECK(result.sse == doctest::Approx(result.sse_trace.back()).epsilon(1e-12));
}

TEST_CASE("input permutation leaves the center multiset unchanged") {
    Rng rng(23);
    std::vector<Vec> points;
    for (int i = 0; i < 40; ++i) points.push_back(rng.normal_vector(4));
    ClusteringConfig cfg;
    cfg.k = 4;
    cfg.seed = 9;
    KMeansResult base = kmeans_direct(points, cfg);

    std::vector<Vec> shuffled = points;
    Rng shuffler(1);
    shuffler.shuffle(shuffled);
    KMeansResult perm = kmeans_direct(shuffled, cfg);

    CHECK(perm.sse == doctest::Approx(base.sse).epsilon(1e-12));
    auto a = sorted_centers(base.centers);
    auto b = sorted_centers(perm.centers);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() < 1e-9);
}

TEST_CASE("assignments point to the nearest center") {
    Rng rng(31);
    std::vector<Vec> points;
    for (int i = 0; i < 50; ++i) points.push_back(rng.normal_vector(3));
    ClusteringConfig cfg;
    cfg.k = 6;
    cfg.seed = 13;
    KMeansResult result = kmeans_direct(points, cfg);
    REQUIRE(result.assignment.size() == points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        int a = result.assignment[i];
        double own = (points[i] - result.centers[size_t(a)]).squaredNorm();
        for (size_t c = 0; c < result.centers.size(); ++c)
            CHECK(own <= (points[i] - result.centers[c]).squaredNorm() + 1e-9);
    }
}

TEST_CASE("fewer points than centers is an error") {
    std::vector<Vec> points = {vec2(0, 0), vec2(1, 1)};
    ClusteringConfig cfg;
    cfg.k = 3;
    CHECK_THROWS_AS(kmeans_direct(points, cfg), error);
}

TEST_CASE("cosine metric clusters rays and rejects zero vectors") {
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.metric = ClusterMetric::cosine;
    cfg.seed = 17;
    // Two rays: scaled copies of (1, 0) and (0, 1).
    std::vector<Vec> points = {vec2(1, 0), vec2(5, 0), vec2(0.2, 0), vec2(0, 1), vec2(0, 3), vec2(0, 0.5)};
    KMeansResult result = kmeans_direct(points, cfg);
    CHECK(result.assignment[0] == result.assignment[1]);
    CHECK(result.assignment[0] == result.assignment[2]);
    CHECK(result.assignment[3] == result.assignment[4]);
    CHECK(result.assignment[3] == result.assignment[5]);
    CHECK(result.assignment[0] != result.assignment[3]);

    points.push_back(vec2(0, 0));
    CHECK_THROWS_AS(kmeans_direct(points, cfg), error);
}

TEST_CASE("assign picks the nearest center with ties to the lowest index") {
    std::vector<Vec> centers = {vec2(0, 0), vec2(2, 0), vec2(0, 2)};
    CHECK(assign(vec2(0, 0), centers) == 0);
    CHECK(assign(vec2(2.1, 0), centers) == 1);
    CHECK(assign(vec2(1, 0), centers) == 0);  // equidistant between 0 and 1

    Rng rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        Vec x = rng.normal_vector(2) * 3.0;
        int got = assign(x, centers);
        int want = 0;
        double best = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < centers.size(); ++c) {
            double d = (x - centers[c]).squaredNorm();
            if (d < best) {
                best = d;
                want = int(c);
            }
        }
        CHECK(got == want);
    }
    CHECK_THROWS_AS(assign(vec2(0, 0), std::vector<Vec>{}), error);
}

TEST_CASE("real-video prototypes are dataset members") {
    Rng rng(43);
    std::vector<Mat> videos;
    for (int i = 0; i < 12; ++i) {
        Mat v = rng.normal_matrix(3, 2);
        v.row(0).array() += (i < 6) ? 0.0 : 8.0;  // two frame-0 groups
        videos.push_back(v);
    }
    VideoDataset ds = single_class_videos(videos);
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.seed = 19;
    std::vector<Vec> protos = cluster_real_video(ds, cfg);
    REQUIRE(protos.size() == 2);
    for (const Vec & p : protos) {
        bool member = false;
        for (const auto & rec : ds.records) member = member || (p - flatten(rec.latent)).norm() == 0.0;
        CHECK(member);
    }
    CHECK((protos[0] - protos[1]).norm() > 0.0);
}

TEST_CASE("duplicate nearest videos fall back to the next-nearest record") {
    // Two bit-identical videos: both centers resolve to the same content, the
    // second prototype must come from the unused record.
    Mat v(2, 2);
    v << 1.0, 2.0, 3.0, 4.0;
    VideoDataset ds = single_class_videos({v, v});
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.seed = 23;
    std::vector<Vec> protos = cluster_real_video(ds, cfg);
    REQUIRE(protos.size() == 2);
    CHECK((protos[0] - flatten(v)).norm() == 0.0);
    CHECK((protos[1] - flatten(v)).norm() == 0.0);

    VideoDataset tiny = single_class_videos({v});
    cfg.k = 2;
    CHECK_THROWS_AS(cluster_real_video(tiny, cfg), error);
}

TEST_CASE("dummy-video prototypes replicate the frame-0 centers") {
    Rng rng(47);
    std::vector<Mat> videos;
    for (int i = 0; i < 10; ++i) {
        Mat v = rng.normal_matrix(4, 2);
        v.row(0).array() += (i % 2 == 0) ? -4.0 : 4.0;
        videos.push_back(v);
    }
    VideoDataset ds = single_class_videos(videos);
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.seed = 29;
    std::vector<Vec> protos = cluster_dummy_video(ds, cfg);
    REQUIRE(protos.size() == 2);

    std::vector<Vec> frame0;
    for (const Mat & v : videos) frame0.push_back(v.row(0).transpose());
    KMeansResult direct = kmeans_direct(frame0, cfg);

    for (const Vec & p : protos) {
        Mat video = unflatten(p, 4, 2);
        for (int f = 1; f < 4; ++f) CHECK((video.row(f) - video.row(0)).norm() == 0.0);
        bool matches_center = false;
        for (const Vec & c : direct.centers)
            matches_center = matches_center || (video.row(0).transpose() - c).norm() < 1e-12;
        CHECK(matches_center);
    }
}

TEST_CASE("per-class clustering and the dataset round trip") {
    Rng rng(53);
    VideoDataset ds;
    ds.frames = 2;
    ds.dim = 3;
    ds.class_count = 3;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 15; ++i) ds.append(uint32_t(c), rng.normal_matrix(2, 3) + Mat::Constant(2, 3, 2.0 * c));

    ClusteringConfig cfg;
    cfg.k = 4;
    cfg.seed = 31;
    ClusterCenters centers = cluster_dataset(ds, cfg);
    REQUIRE(centers.per_class.size() == 3);
    for (const auto & protos : centers.per_class) CHECK(protos.size() == 4);
    CHECK(centers.frames == 2);
    CHECK(centers.dim == 3);
    for (double sse : centers.sse_per_class) CHECK(sse > 0.0);

    VideoDataset as_ds = centers_to_dataset(centers);
    REQUIRE(as_ds.records.size() == 12);
    ClusterCenters back = centers_from_dataset(as_ds, ClusterVariant::direct);
    REQUIRE(back.per_class.size() == 3);
    for (size_t c = 0; c < 3; ++c) {
        for (size_t k = 0; k < 4; ++k) {
            // storage quantizes to float32
            Vec expected = centers.per_class[c][k];
            for (int i = 0; i < expected.size(); ++i) expected(i) = double(float(expected(i)));
            CHECK((back.per_class[c][k] - expected).norm() == 0.0);
        }
    }
}

TEST_CASE("clustering config validation") {
    ClusteringConfig cfg;
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), error);
    cfg.k = 1;
    cfg.max_iters = 0;
    CHECK_THROWS_AS(cfg.validate(), error);
    cfg.max_iters = 10;
    cfg.restarts = 0;
    CHECK_THROWS_AS(cfg.validate(), error);
    cfg.restarts = 1;
    CHECK_NOTHROW(cfg.validate());
}
