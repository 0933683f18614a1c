// Experiment configuration: defaults for the benchmark pipeline, overridable
// from a JSON file. Parsing is strict; unknown keys and wrong types fail with
// the offending field named.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gvd/classifier.hpp"
#include "gvd/clustering.hpp"
#include "gvd/compose.hpp"
#include "gvd/diffusion.hpp"
#include "gvd/sampler.hpp"
#include "gvd/schedule.hpp"
#include "gvd/world.hpp"

namespace gvd {

struct WorldConfig {
    std::string spec_path;  // explicit world JSON; empty uses the generator below
    int frames = 8;
    int dim = 4;
    int classes = 5;
    int modes = 4;
    uint64_t seed = 12;
    int train_per_class = 200;
    int test_per_class = 100;
};

struct ScheduleConfig {
    int steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 2e-2;
};

struct DenoiserConfig {
    std::string kind = "trainable";  // oracle | trainable
    int hidden = 128;
    int epochs = 3000;
    int batch = 64;
    double learning_rate = 2e-3;
};

struct GuidanceSettings {
    double lambda = 0.1;
    double t_stop_frac = 0.5;  // threshold as a fraction of the schedule
    bool frame_decay = true;
    int sampler_steps = 50;
    std::string phase = "high_t";  // high_t | low_t
};

struct ClusterSettings {
    std::string variant = "direct";    // direct | real_video | dummy_video
    std::string metric = "euclidean";  // euclidean | cosine | frobenius (alias)
    int max_iters = 100;
    int restarts = 4;
};

struct DistillSettings {
    std::string method = "gvd";  // gvd | knoise | naive | proto_repeat
    int ipc = 5;
    int knoise_t_start = -1;  // -1 means the full schedule length
};

struct ComposeSettings {
    std::vector<int> pattern;  // empty: four equal slots of frames/4
    std::string strategy = "random";
};

struct SoftLabelSettings {
    bool enabled = true;
    double alpha = 0.2;
    double temperature = 3.0;
};

struct StudentSettings {
    int hidden = 64;
    int epochs = 1500;
    int batch = 128;
    double learning_rate = 0.01;
    double decay_factor = 0.1;
};

struct TeacherSettings {
    int hidden = 64;
    int epochs = 300;
    int batch = 128;
    double learning_rate = 0.01;
    double decay_factor = 0.1;
};

struct EvalSettings {
    int runs = 3;
    std::string labels = "auto";  // auto | soft | hard
    std::string distilled_path;   // empty: <out>/distilled.gvds
    StudentSettings student;
};

struct MetricsSettings {
    int bins = 32;
    std::string feature_space = "raw";  // raw | hidden
    std::map<std::string, std::string> inputs;  // name -> dataset path; empty: the distilled file
};

struct SweepSettings {
    std::vector<double> lambdas = {0.01, 0.05, 0.1, 0.2, 0.5};
    std::vector<double> t_stop_fracs;
    std::vector<std::vector<int>> patterns;
    std::vector<std::string> strategies;
};

struct ExperimentConfig {
    uint64_t master_seed = 0;
    std::string out_dir = "out";
    int workers = 1;

    WorldConfig world;
    ScheduleConfig schedule;
    DenoiserConfig denoiser;
    GuidanceSettings guidance;
    ClusterSettings cluster;
    DistillSettings distill;
    ComposeSettings compose;
    SoftLabelSettings soft_labels;
    TeacherSettings teacher;
    EvalSettings eval;
    MetricsSettings metrics;
    SweepSettings sweep;

    void validate() const;
    std::string to_json_text() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string & path);
ExperimentConfig config_from_json_text(const std::string & text);

// Resolution helpers shared by the pipeline and tests.
DiffusionSchedule resolve_schedule(const ExperimentConfig & cfg);
WorldSpec resolve_world_spec(const ExperimentConfig & cfg);
GuidanceConfig resolve_guidance(const ExperimentConfig & cfg, const DiffusionSchedule & sched);
ClusteringConfig resolve_clustering(const ExperimentConfig & cfg);  // k = ipc * group size
CompositionPlan resolve_plan(const ExperimentConfig & cfg);
DistillMethod resolve_method(const ExperimentConfig & cfg);
ClassifierTrainConfig resolve_student(const ExperimentConfig & cfg);
ClassifierTrainConfig resolve_teacher(const ExperimentConfig & cfg);

WorldSpec load_world_spec(const std::string & path);

}  // namespace gvd
