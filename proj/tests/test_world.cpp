#include "doctest.h"

#include <cmath>
#include <vector>

#include "gvd/rng.hpp"
#include "gvd/world.hpp"

using namespace gvd;

namespace {

ModeSpec make_mode(double weight, Vec init_mean, double init_cov_scale, Mat dynamics, Vec drift,
                   double process_noise) {
    ModeSpec m;
    m.weight = weight;
    m.init_mean = std::move(init_mean);
    m.init_cov_scale = init_cov_scale;
    m.dynamics = std::move(dynamics);
    m.drift = std::move(drift);
    m.process_noise = process_noise;
    return m;
}

WorldSpec two_class_spec(int frames, int dim, std::vector<ModeSpec> modes_a, std::vector<ModeSpec> modes_b) {
    WorldSpec spec;
    spec.frames = frames;
    spec.dim = dim;
    spec.seed = 1;
    spec.classes.push_back({std::move(modes_a)});
    spec.classes.push_back({std::move(modes_b)});
    return spec;
}

}  // namespace

TEST_CASE("zero dynamics collapse later frames onto the drift") {
    const int F = 4, D = 2;
    Vec b(2);
    b << 0.7, -0.3;
    auto mode = [&] { return make_mode(1.0, Vec::Ones(D), 0.5, Mat::Zero(D, D), b, 0.0); };
    WorldSpec spec = two_class_spec(F, D, {mode()}, {mode()});
    GaussianWorld world = build_world(spec);

    const VideoMode & vm = world.classes[0][0];
    for (int f = 1; f < F; ++f) {
        for (int d = 0; d < D; ++d) {
            CHECK(vm.mean(f * D + d) == doctest::Approx(b(d)).epsilon(1e-14));
            CHECK(vm.cov(f * D + d, f * D + d) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        }
    }
    CHECK(vm.cov(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("identity dynamics give random-walk variance") {
    const int F = 5, D = 3;
    const double s = 0.8, q = 0.3;
    auto mode = [&] { return make_mode(1.0, Vec::Zero(D), s, Mat::Identity(D, D), Vec::Zero(D), q); };
    WorldSpec spec = two_class_spec(F, D, {mode()}, {mode()});
    GaussianWorld world = build_world(spec);

    const VideoMode & vm = world.classes[0][0];
    for (int f = 0; f < F; ++f) {
        for (int g = 0; g < F; ++g) {
            double expected = s * s + std::min(f, g) * q * q;
            for (int d = 0; d < D; ++d) {
                CHECK(vm.cov(f * D + d, g * D + d) == doctest::Approx(expected).epsilon(1e-13));
                if (d > 0) CHECK(vm.cov(f * D + d, g * D + d - 1) == doctest::Approx(0.0).scale(1.0));
            }
        }
        CHECK(vm.mean(f * D) == 0.0);
    }
}

TEST_CASE("analytic moments match simulated rollouts") {
    const int F = 4, D = 2;
    Mat A(2, 2);
    A << 0.8, 0.2, -0.3, 0.7;
    Vec b(2);
    b << 0.5, -0.25;
    Vec m0(2);
    m0 << 1.5, -1.0;
    const double s = 0.8, q = 0.3;
    auto mode = [&] { return make_mode(1.0, m0, s, A, b, q); };
    WorldSpec spec = two_class_spec(F, D, {mode()}, {mode()});
    GaussianWorld world = build_world(spec);
    const VideoMode & vm = world.classes[0][0];

    const int n = 100000;
    Rng rng(2024);
    Vec mean_acc = Vec::Zero(F * D);
    Mat outer_acc = Mat::Zero(F * D, F * D);
    for (int i = 0; i < n; ++i) {
        Vec flat(F * D);
        Vec z = m0 + s * rng.normal_vector(D);
        flat.segment(0, D) = z;
        for (int f = 1; f < F; ++f) {
            z = A * z + b + q * rng.normal_vector(D);
            flat.segment(f * D, D) = z;
        }
        mean_acc += flat;
        outer_acc += flat * flat.transpose();
    }
    Vec emp_mean = mean_acc / double(n);
    Mat emp_cov = outer_acc / double(n) - emp_mean * emp_mean.transpose();

    CHECK((emp_mean - vm.mean).norm() / vm.mean.norm() < 0.02);
    CHECK((emp_cov - vm.cov).norm() / vm.cov.norm() < 0.02);
}

TEST_CASE("explosive dynamics are rejected") {
    const int D = 2;
    auto mode = [&] {
        return make_mode(1.0, Vec::Zero(D), 1.0, 2.0 * Mat::Identity(D, D), Vec::Zero(D), 0.1);
    };
    WorldSpec spec = two_class_spec(4, D, {mode()}, {mode()});
    try {
        build_world(spec);
        FAIL("expected a throw");
    } catch (const error & e) {
        CHECK(e.kind() == error_kind::config);
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("spec validation rejects malformed worlds") {
    const int D = 2;
    auto good = [&] { return make_mode(0.5, Vec::Zero(D), 1.0, Mat::Identity(D, D) * 0.5, Vec::Zero(D), 0.1); };

    WorldSpec one_class;
    one_class.frames = 4;
    one_class.dim = D;
    one_class.classes.push_back({{good(), good()}});
    CHECK_THROWS_AS(one_class.validate(), error);

    WorldSpec bad_frames = two_class_spec(1, D, {good(), good()}, {good(), good()});
    CHECK_THROWS_AS(bad_frames.validate(), error);

    WorldSpec bad_weight = two_class_spec(4, D, {good(), good()}, {good(), good()});
    bad_weight.classes[0].modes[0].weight = -0.5;
    CHECK_THROWS_AS(bad_weight.validate(), error);

    WorldSpec bad_sum = two_class_spec(4, D, {good(), good()}, {good(), good()});
    bad_sum.classes[0].modes[0].weight = 0.9;
    CHECK_THROWS_AS(bad_sum.validate(), error);
}

TEST_CASE("dataset sampling is deterministic and worker-independent") {
    WorldSpec spec = default_world_spec(8, 4, 3, 2, 5);
    GaussianWorld world = build_world(spec);

    VideoDataset a = sample_dataset(world, 40, 999, 1);
    VideoDataset b = sample_dataset(world, 40, 999, 1);
    VideoDataset c = sample_dataset(world, 40, 999, 4);
    REQUIRE(a.records.size() == 120);
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].class_id == b.records[i].class_id);
        CHECK((a.records[i].latent.array() == b.records[i].latent.array()).all());
        CHECK((a.records[i].latent.array() == c.records[i].latent.array()).all());
    }

    VideoDataset different = sample_dataset(world, 40, 1000, 1);
    CHECK_FALSE((a.records[0].latent.array() == different.records[0].latent.array()).all());
}

TEST_CASE("one record per class in class-major order") {
    WorldSpec spec = default_world_spec(8, 4, 2, 2, 3);
    GaussianWorld world = build_world(spec);
    VideoDataset ds = sample_dataset(world, 1, 42);
    REQUIRE(ds.records.size() == 2);
    CHECK(ds.records[0].class_id == 0);
    CHECK(ds.records[1].class_id == 1);
    CHECK(ds.class_count == 2);
    CHECK_THROWS_AS(sample_dataset(world, 0, 42), error);
}

TEST_CASE("per-class sample mean approaches the mixture mean") {
    const int F = 3, D = 2;
    Mat A(2, 2);
    A << 0.6, 0.1, -0.1, 0.6;
    Vec b(2);
    b << 0.2, 0.1;
    Vec ma(2), mb(2);
    ma << 3.0, 1.0;
    mb << -2.0, 2.0;
    WorldSpec spec = two_class_spec(F, D,
                                    {make_mode(0.6, ma, 0.7, A, b, 0.2), make_mode(0.4, mb, 0.7, A, b, 0.2)},
                                    {make_mode(1.0, Vec::Zero(D), 1.0, A, b, 0.2)});
    GaussianWorld world = build_world(spec);

    Vec mixture_mean = Vec::Zero(F * D);
    for (const VideoMode & vm : world.classes[0]) mixture_mean += vm.weight * vm.mean;

    VideoDataset ds = sample_dataset(world, 100000, 31, 4);
    Vec emp = Vec::Zero(F * D);
    size_t count = 0;
    for (const auto & rec : ds.records) {
        if (rec.class_id != 0) continue;
        emp += flatten(rec.latent);
        ++count;
    }
    emp /= double(count);
    CHECK((emp - mixture_mean).norm() / mixture_mean.norm() < 0.01);
}

TEST_CASE("default world spec is valid and reproducible") {
    WorldSpec spec = default_world_spec();
    CHECK(spec.frames == 8);
    CHECK(spec.dim == 4);
    REQUIRE(spec.classes.size() == 5);
    for (const auto & cls : spec.classes) {
        REQUIRE(cls.modes.size() == 4);
        double wsum = 0.0;
        for (const auto & m : cls.modes) wsum += m.weight;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    }
    spec.validate();
    GaussianWorld world = build_world(spec);
    CHECK(world.class_count() == 5);

    WorldSpec again = default_world_spec();
    CHECK((again.classes[2].modes[1].dynamics.array() == spec.classes[2].modes[1].dynamics.array()).all());
    CHECK((again.classes[4].modes[3].init_mean.array() == spec.classes[4].modes[3].init_mean.array()).all());

    WorldSpec other_seed = default_world_spec(8, 4, 5, 4, 13);
    other_seed.validate();
    build_world(other_seed);
    CHECK_FALSE((other_seed.classes[0].modes[0].dynamics.array() == spec.classes[0].modes[0].dynamics.array()).all());

    WorldSpec other_shape = default_world_spec(16, 4, 5, 4, 12);
    CHECK(other_shape.frames == 16);
    other_shape.validate();
    build_world(other_shape);
}
