// Pipeline stages behind the CLI subcommands. Every stage reads and writes
// files under the configured output directory; every random decision derives
// its seed from the master seed, a stage name, and the class/instance index,
// so reruns are byte-identical at any worker count. The *_in_memory variants
// are the same logic without the filesystem, shared by the sweep.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gvd/classifier.hpp"
#include "gvd/compose.hpp"
#include "gvd/config.hpp"
#include "gvd/dataset.hpp"
#include "gvd/diffusion.hpp"
#include "gvd/sampler.hpp"

namespace gvd {

std::string out_path(const ExperimentConfig & cfg, const std::string & name);

// Oracle kind builds the exact posterior-mean denoiser from the resolved
// world; trainable kind fits the network on the supplied train set.
std::unique_ptr<Denoiser> build_denoiser(const ExperimentConfig & cfg, const VideoDataset & train,
                                         const DiffusionSchedule & sched);

Classifier train_teacher(const ExperimentConfig & cfg, const VideoDataset & train);

struct DistillOutput {
    VideoDataset raw;                    // one record per sampled instance, class-major
    ComposeResult composed;              // distilled dataset plus per-video provenance
    std::vector<InstanceTrace> traces;   // per raw instance, empty steps for untraced methods
};

// Cluster -> sample -> compose -> optional teacher soft labels. The teacher
// may be null only when soft labels are disabled.
DistillOutput distill_in_memory(const ExperimentConfig & cfg, const Denoiser & den,
                                const VideoDataset & train, const Classifier * teacher);

struct EvalReport {
    std::string labels_used;  // soft | hard
    std::vector<double> per_seed;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;  // sample stddev, 0 for a single run
    double representativeness = 0.0;
    std::vector<std::vector<EpochStats>> traces;  // one per student run
};

EvalReport eval_in_memory(const ExperimentConfig & cfg, const VideoDataset & distilled,
                          const VideoDataset & test, const Classifier & teacher);

// synth: train/test datasets + world-moments JSON.
void run_synth(const ExperimentConfig & cfg);
// cluster: per-class prototypes as a dataset file + summary JSON.
void run_cluster(const ExperimentConfig & cfg);
// distill: raw sampled instances, guidance traces, composed distilled set,
// provenance, optional soft labels.
void run_distill(const ExperimentConfig & cfg);
// compose: re-composes previously sampled raw instances under the current
// plan.
void run_compose(const ExperimentConfig & cfg);
// eval: trains students on the distilled set and reports accuracy.
EvalReport run_eval(const ExperimentConfig & cfg);
// metrics: diversity metric trio per requested input set.
void run_metrics(const ExperimentConfig & cfg);
// sweep: cartesian grid over guidance/composition settings, one CSV row per
// cell; cell failures are recorded and skipped.
void run_sweep(const ExperimentConfig & cfg);

}  // namespace gvd
