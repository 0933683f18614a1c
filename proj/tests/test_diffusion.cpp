#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "gvd/diffusion.hpp"
#include "gvd/rng.hpp"
#include "gvd/schedule.hpp"
#include "gvd/world.hpp"

using namespace gvd;

namespace {

DiffusionSchedule fixed_schedule(std::vector<double> alpha_bar) {
    DiffusionSchedule s;
    s.steps = int(alpha_bar.size()) - 1;
    s.alpha_bar = std::move(alpha_bar);
    return s;
}

ModeSpec iso_mode(Vec init_mean, int dim) {
    ModeSpec m;
    m.weight = 1.0;
    m.init_mean = std::move(init_mean);
    m.init_cov_scale = 1.0;
    m.dynamics = Mat::Zero(dim, dim);
    m.drift = Vec::Zero(dim);
    m.process_noise = 1.0;
    return m;
}

// Two classes, each with the given modes; the flattened video of an iso_mode
// is exactly N(stacked init/drift means, I).
WorldSpec iso_world_spec(int frames, int dim, std::vector<ModeSpec> class0, std::vector<ModeSpec> class1) {
    WorldSpec spec;
    spec.frames = frames;
    spec.dim = dim;
    spec.seed = 1;
    spec.classes.push_back({std::move(class0)});
    spec.classes.push_back({std::move(class1)});
    return spec;
}

}  // namespace

TEST_CASE("forward diffuse at t=0 is the identity") {
    DiffusionSchedule s = build_schedule(4, 0.01, 0.05);
    Rng rng(3);
    Mat x0 = rng.normal_matrix(3, 2);
    Mat noise = rng.normal_matrix(3, 2);
    Mat z = forward_diffuse(x0, 0, noise, s);
    CHECK((z.array() == x0.array()).all());
}

TEST_CASE("forward diffuse evaluates the closed form") {
    DiffusionSchedule s = fixed_schedule({1.0, 0.64});
    Mat x0 = Mat::Constant(1, 1, 1.0);
    Mat noise = Mat::Constant(1, 1, 0.5);
    Mat z = forward_diffuse(x0, 1, noise, s);
    CHECK(z(0, 0) == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("forward diffuse rejects mismatched shapes") {
    DiffusionSchedule s = fixed_schedule({1.0, 0.5});
    try {
        forward_diffuse(Mat::Zero(2, 2), 1, Mat::Zero(3, 2), s);
        FAIL("expected a throw");
    } catch (const error & e) {
        CHECK(e.kind() == error_kind::dimension);
    }
}

TEST_CASE("forward diffuse has the advertised moments") {
    DiffusionSchedule s = fixed_schedule({1.0, 0.5});
    Mat x0(2, 2);
    x0 << 1.0, -2.0, 0.5, 3.0;
    Rng rng(17);
    const int n = 100000;
    Mat mean = Mat::Zero(2, 2), sq = Mat::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
        Mat z = forward_diffuse(x0, 1, rng.normal_matrix(2, 2), s);
        mean += z;
        sq += z.cwiseProduct(z);
    }
    mean /= double(n);
    sq /= double(n);
    Mat expected_mean = std::sqrt(0.5) * x0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            CHECK(mean(r, c) == doctest::Approx(expected_mean(r, c)).epsilon(0.01));
            double var = sq(r, c) - mean(r, c) * mean(r, c);
            CHECK(var == doctest::Approx(0.5).epsilon(0.01));
        }
    }
}

TEST_CASE("predict_x0 evaluates the inverse map") {
    DiffusionSchedule s = fixed_schedule({1.0, 0.25});
    Mat z = Mat::Constant(1, 1, 1.0);
    Mat eps = Mat::Constant(1, 1, 0.4);
    Mat x0 = predict_x0(z, eps, 1, s);
    CHECK(x0(0, 0) == doctest::Approx(1.3071796769724491).epsilon(1e-12));

    Mat zero = Mat::Zero(1, 1);
    Mat x0_noiseless = predict_x0(z, zero, 1, s);
    CHECK(x0_noiseless(0, 0) == doctest::Approx(1.0 / 0.5).epsilon(1e-14));
}

TEST_CASE("predict_x0 rejects t=0") {
    DiffusionSchedule s = fixed_schedule({1.0, 0.5});
    try {
        predict_x0(Mat::Zero(1, 1), Mat::Zero(1, 1), 0, s);
        FAIL("expected a throw");
    } catch (const error & e) {
        CHECK(e.kind() == error_kind::precondition);
    }
}

TEST_CASE("forward and inverse round-trip to machine precision") {
    DiffusionSchedule s = build_schedule(10, 0.01, 0.1);
    Rng rng(29);
    Mat x0 = rng.normal_matrix(4, 3);
    for (int t = 1; t <= 10; ++t) {
        Mat noise = rng.normal_matrix(4, 3);
        Mat z = forward_diffuse(x0, t, noise, s);
        Mat back = predict_x0(z, noise, t, s);
        CHECK((back - x0).norm() / x0.norm() < 1e-10);
    }
}

TEST_CASE("oracle reduces to isotropic shrinkage on a standard-normal mode") {
    const int F = 2, D = 2;
    WorldSpec spec = iso_world_spec(F, D, {iso_mode(Vec::Zero(D), D)}, {iso_mode(Vec::Ones(D), D)});
    auto world = std::make_shared<GaussianWorld>(build_world(spec));
    OracleDenoiser den(world);
    DiffusionSchedule s = build_schedule(100, 1e-3, 5e-2);

    Rng rng(5);
    for (int t : {1, 25, 50, 100}) {
        double abar = s.alpha_bar_at(t);
        Mat z = rng.normal_matrix(F, D);
        Mat eps = den.predict_noise(z, 0, t, s);
        Mat expected = std::sqrt(1.0 - abar) * z;
        CHECK((eps - expected).norm() < 1e-8);
        Vec post = den.posterior_mean_x0(0, flatten(z), abar);
        CHECK((post - std::sqrt(abar) * flatten(z)).norm() < 1e-8);
    }
}

TEST_CASE("oracle is exact at the symmetry point of a two-mode class") {
    const int F = 2, D = 2;
    Vec mu(2);
    mu << 1.5, -0.5;
    ModeSpec plus = iso_mode(mu, D);
    ModeSpec minus = iso_mode(-mu, D);
    plus.weight = 0.5;
    minus.weight = 0.5;
    plus.drift = Vec::Ones(D);
    minus.drift = -Vec::Ones(D);
    WorldSpec spec = iso_world_spec(F, D, {plus, minus}, {iso_mode(Vec::Zero(D), D)});
    auto world = std::make_shared<GaussianWorld>(build_world(spec));
    OracleDenoiser den(world);

    double abar = 0.4;
    Vec post = den.posterior_mean_x0(0, Vec::Zero(F * D), abar);
    CHECK(post.norm() < 1e-10);

    DiffusionSchedule s = fixed_schedule({1.0, 0.4});
    Mat eps = den.predict_noise(Mat::Zero(F, D), 0, 1, s);
    CHECK(eps.norm() < 1e-10);
}

TEST_CASE("oracle responsibilities are a distribution") {
    WorldSpec spec = default_world_spec(8, 4, 3, 3, 7);
    auto world = std::make_shared<GaussianWorld>(build_world(spec));
    OracleDenoiser den(world);
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        int c = int(rng.bounded(3));
        double abar = 0.05 + 0.9 * rng.uniform();
        Vec z = rng.normal_vector(32) * 2.0;
        Vec r = den.responsibilities(c, z, abar);
        REQUIRE(r.size() == 3);
        CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.minCoeff() >= 0.0);
    }
}

TEST_CASE("oracle posterior mean matches an importance-sampled estimate") {
    const int F = 4, D = 2;
    Mat A(2, 2);
    A << 0.7, 0.2, -0.2, 0.6;
    Vec b(2);
    b << 0.3, -0.1;
    ModeSpec m1, m2;
    m1.weight = 0.6;
    m1.init_mean = Vec(2);
    m1.init_mean << 1.2, -0.8;
    m1.init_cov_scale = 0.8;
    m1.dynamics = A;
    m1.drift = b;
    m1.process_noise = 0.4;
    m2 = m1;
    m2.weight = 0.4;
    m2.init_mean << -1.0, 0.9;
    WorldSpec spec = iso_world_spec(F, D, {m1, m2}, {iso_mode(Vec::Zero(D), D)});
    auto world = std::make_shared<GaussianWorld>(build_world(spec));
    OracleDenoiser den(world);

    const double abar = 0.5;
    Rng rng(71);
    Vec z = rng.normal_vector(F * D);

    // Self-normalized importance sampling: draw x0 from the class mixture,
    // weight by the diffusion likelihood N(z; sqrt(abar) x0, (1-abar) I).
    const int n = 200000;
    Rng sim(72);
    Vec acc = Vec::Zero(F * D);
    double wsum = 0.0;
    const auto & modes = world->classes[0];
    for (int i = 0; i < n; ++i) {
        double u = sim.uniform();
        const VideoMode & mode = u < modes[0].weight ? modes[0] : modes[1];
        Vec x0 = mode.mean + mode.chol_lower * sim.normal_vector(F * D);
        double quad = (z - std::sqrt(abar) * x0).squaredNorm() / (1.0 - abar);
        double w = std::exp(-0.5 * quad);
        acc += w * x0;
        wsum += w;
    }
    Vec mc = acc / wsum;
    Vec exact = den.posterior_mean_x0(0, z, abar);
    CHECK((mc - exact).norm() / exact.norm() < 2e-2);
}

TEST_CASE("encode lays out input channels as documented") {
    MlpDenoiser model;
    model.video_frames = 2;
    model.video_dim = 2;
    model.class_count = 3;
    DiffusionSchedule s = fixed_schedule({1.0, 0.81, 0.64});
    Vec z(4);
    z << 1.0, 2.0, 3.0, 4.0;
    Vec x = model.encode(z, 1, 2, s);
    REQUIRE(x.size() == 4 + 3 + 3);
    CHECK((x.head(4).array() == z.array()).all());
    CHECK(x(4) == 0.0);
    CHECK(x(5) == 1.0);
    CHECK(x(6) == 0.0);
    CHECK(x(7) == doctest::Approx(1.0).epsilon(1e-15));  // t / steps
    CHECK(x(8) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(x(9) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(model.encode(z, 3, 1, s), error);
}

TEST_CASE("trainable denoiser output combines skip and network head") {
    DiffusionSchedule s = fixed_schedule({1.0, 0.36});
    MlpDenoiser model;
    model.video_frames = 1;
    model.video_dim = 2;
    model.class_count = 2;
    Rng rng(41);
    model.net = Mlp::init(2 + 2 + 3, 4, 2, rng);

    Mat z(1, 2);
    z << 0.7, -0.4;
    Mat out = model.predict_noise(z, 1, 1, s);
    Vec head = model.net.forward(model.encode(flatten(z), 1, 1, s));
    Vec expected = std::sqrt(1.0 - 0.36) * flatten(z) + std::sqrt(0.36) * head;
    CHECK((flatten(out) - expected).norm() < 1e-14);
}

TEST_CASE("zero-epoch training returns the initialization with an empty trace") {
    WorldSpec spec = default_world_spec(8, 4, 2, 2, 3);
    GaussianWorld world = build_world(spec);
    VideoDataset data = sample_dataset(world, 4, 11);
    DiffusionSchedule s = build_schedule(20, 1e-3, 2e-2);

    DenoiserTrainConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 0;
    cfg.seed = 77;
    DenoiserTrainResult result = train_denoiser(data, s, cfg);
    CHECK(result.epoch_loss.empty());

    Rng rng(seed_chain(cfg.seed, seed_tag("denoiser")));
    Mlp expected = Mlp::init(data.flat_dim() + data.class_count + 3, cfg.hidden, data.flat_dim(), rng);
    CHECK((result.model.net.flat_params() - expected.flat_params()).norm() == 0.0);
}

TEST_CASE("batch loss gradient matches central finite differences") {
    DiffusionSchedule s = build_schedule(10, 1e-3, 5e-2);
    MlpDenoiser model;
    model.video_frames = 1;
    model.video_dim = 2;
    model.class_count = 2;
    Rng rng(53);
    model.net = Mlp::init(2 + 2 + 3, 3, 2, rng);

    std::vector<Vec> inputs, targets;
    for (int i = 0; i < 4; ++i) {
        Vec z = rng.normal_vector(2);
        int t = int(rng.bounded(10)) + 1;
        inputs.push_back(model.encode(z, int(rng.bounded(2)), t, s));
        targets.push_back(rng.normal_vector(2));
    }

    Mlp grad = Mlp::zeros_like(model.net);
    denoiser_batch_loss(model, s, inputs, targets, &grad);
    Vec g = grad.flat_params();

    Vec p = model.net.flat_params();
    const double h = 1e-6;
    for (int i = 0; i < int(p.size()); ++i) {
        Vec pp = p, pm = p;
        pp(i) += h;
        pm(i) -= h;
        MlpDenoiser plus = model, minus = model;
        plus.net.set_flat_params(pp);
        minus.net.set_flat_params(pm);
        double lp = denoiser_batch_loss(plus, s, inputs, targets, nullptr);
        double lm = denoiser_batch_loss(minus, s, inputs, targets, nullptr);
        double fd = (lp - lm) / (2.0 * h);
        CHECK(g(i) == doctest::Approx(fd).epsilon(1e-5).scale(1e-8));
    }
}

TEST_CASE("training closes the gap to the oracle denoiser") {
    WorldSpec spec;
    spec.frames = 2;
    spec.dim = 2;
    spec.seed = 1;
    Vec mu0(2), mu1(2);
    mu0 << 1.0, -1.0;
    mu1 << -1.0, 1.0;
    spec.classes.push_back({{iso_mode(mu0, 2)}});
    spec.classes.push_back({{iso_mode(mu1, 2)}});
    auto world = std::make_shared<GaussianWorld>(build_world(spec));
    OracleDenoiser oracle(world);

    VideoDataset data = sample_dataset(*world, 150, 9);
    DiffusionSchedule s = build_schedule(50, 1e-3, 4e-2);

    // Probe pairs held fixed across checkpoints.
    Rng probe_rng(83);
    std::vector<Mat> probe_z;
    std::vector<int> probe_c, probe_t;
    for (int i = 0; i < 48; ++i) {
        probe_z.push_back(probe_rng.normal_matrix(2, 2));
        probe_c.push_back(int(probe_rng.bounded(2)));
        probe_t.push_back(int(probe_rng.bounded(50)) + 1);
    }
    auto oracle_gap = [&](const MlpDenoiser & model) {
        double acc = 0.0;
        for (size_t i = 0; i < probe_z.size(); ++i) {
            Mat a = model.predict_noise(probe_z[i], probe_c[i], probe_t[i], s);
            Mat b = oracle.predict_noise(probe_z[i], probe_c[i], probe_t[i], s);
            acc += (a - b).squaredNorm();
        }
        return acc / double(probe_z.size());
    };

    std::vector<double> gaps;
    for (int epochs : {0, 25, 75, 225, 675}) {
        DenoiserTrainConfig cfg;
        cfg.hidden = 24;
        cfg.epochs = epochs;
        cfg.batch = 32;
        cfg.learning_rate = 2e-3;
        cfg.seed = 4;
        DenoiserTrainResult result = train_denoiser(data, s, cfg);
        REQUIRE(int(result.epoch_loss.size()) == epochs);
        gaps.push_back(oracle_gap(result.model));
    }
    for (size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);
    CHECK(gaps.back() < 0.1 * gaps.front());
}
