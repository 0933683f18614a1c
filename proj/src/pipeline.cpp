#include "gvd/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "gvd/clustering.hpp"
#include "gvd/metrics.hpp"
#include "gvd/rng.hpp"
#include "gvd/world.hpp"

namespace gvd {

namespace {

using nlohmann::ordered_json;

void ensure_out_dir(const ExperimentConfig & cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw error(error_kind::io, "cannot create output directory", cfg.out_dir + ": " + ec.message());
}

void write_text_file(const std::string & path, const std::string & text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error(error_kind::io, "cannot open file for writing", path);
    out << text;
    if (!out) throw error(error_kind::io, "write failed", path);
}

void write_effective_config(const ExperimentConfig & cfg) {
    write_text_file(out_path(cfg, "effective_config.json"), cfg.to_json_text());
}

VideoDataset load_stage_input(const std::string & path, const char * producer) {
    try {
        return load_dataset(path);
    } catch (const error & e) {
        if (e.kind() != error_kind::io) throw;
        throw error(error_kind::io, e.message(),
                    e.context() + "; run the " + producer + " stage first");
    }
}

uint64_t stage_seed(const ExperimentConfig & cfg, const char * stage) {
    return seed_chain(cfg.master_seed, seed_tag(stage));
}

std::string pattern_string(const std::vector<int> & pattern) {
    std::string s;
    for (size_t i = 0; i < pattern.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(pattern[i]);
    }
    return s;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_denoiser_shape(const Denoiser & den, const VideoDataset & data) {
    if (den.frames() != data.frames || den.dim() != data.dim) {
        throw error(error_kind::dimension, "denoiser and dataset shapes differ",
                    "denoiser " + std::to_string(den.frames()) + "x" + std::to_string(den.dim()) +
                        ", dataset " + std::to_string(data.frames) + "x" + std::to_string(data.dim));
    }
}

}  // namespace

std::string out_path(const ExperimentConfig & cfg, const std::string & name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::unique_ptr<Denoiser> build_denoiser(const ExperimentConfig & cfg, const VideoDataset & train,
                                         const DiffusionSchedule & sched) {
    if (cfg.denoiser.kind == "oracle") {
        auto world = std::make_shared<GaussianWorld>(build_world(resolve_world_spec(cfg)));
        auto den = std::make_unique<OracleDenoiser>(std::move(world));
        check_denoiser_shape(*den, train);
        return den;
    }
    DenoiserTrainConfig dc;
    dc.hidden = cfg.denoiser.hidden;
    dc.epochs = cfg.denoiser.epochs;
    dc.batch = cfg.denoiser.batch;
    dc.learning_rate = cfg.denoiser.learning_rate;
    dc.seed = stage_seed(cfg, "denoiser");
    return std::make_unique<MlpDenoiser>(train_denoiser(train, sched, dc).model);
}

Classifier train_teacher(const ExperimentConfig & cfg, const VideoDataset & train) {
    ClassifierTrainConfig tc = resolve_teacher(cfg);
    tc.seed = stage_seed(cfg, "teacher");
    return train_classifier(train, tc, nullptr).model;
}

namespace {

// the degenerate prototype-repeat baseline must emit literal copies, so its
// composition keeps every frame position-aligned
CompositionPlan effective_plan(const ExperimentConfig & cfg) {
    CompositionPlan plan = resolve_plan(cfg);
    if (resolve_method(cfg) == DistillMethod::proto_repeat) plan.strategy = ComposeStrategy::continuous;
    return plan;
}

}  // namespace

DistillOutput distill_in_memory(const ExperimentConfig & cfg, const Denoiser & den,
                                const VideoDataset & train, const Classifier * teacher) {
    check_denoiser_shape(den, train);
    DiffusionSchedule sched = resolve_schedule(cfg);
    CompositionPlan plan = effective_plan(cfg);
    plan.validate(train.frames);
    DistillMethod method = resolve_method(cfg);

    ClusteringConfig cc = resolve_clustering(cfg);
    cc.seed = stage_seed(cfg, "cluster");
    ClusterCenters centers = cluster_dataset(train, cc);

    GuidanceConfig guidance = resolve_guidance(cfg, sched);
    int knoise_t_start = cfg.distill.knoise_t_start < 0 ? sched.steps : cfg.distill.knoise_t_start;
    uint64_t distill_seed = stage_seed(cfg, "distill");

    DistillOutput out;
    out.raw.frames = train.frames;
    out.raw.dim = train.dim;
    out.raw.class_count = train.class_count;
    for (int c = 0; c < train.class_count; ++c) {
        std::vector<Vec> protos = centers.per_class[size_t(c)];
        if (method == DistillMethod::proto_repeat) {
            protos.assign(size_t(cfg.distill.ipc * plan.group_size()), protos[0]);
        }
        std::vector<SampleTrace> class_traces;
        std::vector<Mat> videos = distill_class(den, c, protos, method, knoise_t_start, guidance, sched,
                                                seed_chain(distill_seed, uint64_t(c)), cfg.workers,
                                                &class_traces);
        for (size_t k = 0; k < videos.size(); ++k) {
            InstanceTrace it;
            it.instance_id = out.raw.records.size();
            it.class_id = uint32_t(c);
            it.trace = std::move(class_traces[k]);
            out.traces.push_back(std::move(it));
            out.raw.append(uint32_t(c), std::move(videos[k]));
        }
    }

    out.composed = compose_dataset(out.raw, plan, stage_seed(cfg, "compose"));
    if (cfg.soft_labels.enabled) {
        if (!teacher) throw error(error_kind::precondition, "soft labels enabled but no teacher supplied");
        out.composed.dataset.soft_labels =
            teacher_soft_labels(*teacher, out.composed.dataset, cfg.soft_labels.temperature);
    }
    return out;
}

EvalReport eval_in_memory(const ExperimentConfig & cfg, const VideoDataset & distilled,
                          const VideoDataset & test, const Classifier & teacher) {
    bool use_soft = cfg.eval.labels == "soft" ||
                    (cfg.eval.labels == "auto" && distilled.has_soft_labels());
    VideoDataset train_set = distilled;
    if (use_soft && !train_set.has_soft_labels()) {
        train_set.soft_labels = teacher_soft_labels(teacher, train_set, cfg.soft_labels.temperature);
    }
    SoftLabelConfig soft;
    soft.alpha = cfg.soft_labels.alpha;
    soft.temperature = cfg.soft_labels.temperature;

    EvalReport report;
    report.labels_used = use_soft ? "soft" : "hard";
    uint64_t student_seed = seed_chain(cfg.master_seed, seed_tag("student"));
    ClassifierTrainConfig sc = resolve_student(cfg);
    for (int r = 0; r < cfg.eval.runs; ++r) {
        sc.seed = seed_chain(student_seed, uint64_t(r));
        ClassifierTrainResult res = train_classifier(train_set, sc, use_soft ? &soft : nullptr, &test);
        report.per_seed.push_back(evaluate(res.model, test));
        report.traces.push_back(std::move(res.trace));
    }

    double sum = 0.0;
    for (double a : report.per_seed) sum += a;
    report.accuracy_mean = sum / double(report.per_seed.size());
    double ss = 0.0;
    for (double a : report.per_seed) ss += (a - report.accuracy_mean) * (a - report.accuracy_mean);
    report.accuracy_std = report.per_seed.size() > 1 ? std::sqrt(ss / double(report.per_seed.size() - 1)) : 0.0;
    report.representativeness = representativeness(teacher, distilled);
    return report;
}

void run_synth(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    GaussianWorld world = build_world(resolve_world_spec(cfg));
    VideoDataset train =
        sample_dataset(world, cfg.world.train_per_class, stage_seed(cfg, "synth-train"), cfg.workers);
    VideoDataset test =
        sample_dataset(world, cfg.world.test_per_class, stage_seed(cfg, "synth-test"), cfg.workers);
    save_dataset(train, out_path(cfg, "train.gvds"));
    save_dataset(test, out_path(cfg, "test.gvds"));

    ordered_json j;
    j["frames"] = world.frames;
    j["dim"] = world.dim;
    j["classes"] = ordered_json::array();
    for (const auto & cls : world.classes) {
        ordered_json jc;
        jc["modes"] = ordered_json::array();
        for (const auto & mode : cls) {
            ordered_json jm;
            jm["weight"] = mode.weight;
            jm["mean"] = std::vector<double>(mode.mean.data(), mode.mean.data() + mode.mean.size());
            jm["cov_trace"] = mode.cov.trace();
            jm["cov_frobenius"] = mode.cov.norm();
            jc["modes"].push_back(std::move(jm));
        }
        j["classes"].push_back(std::move(jc));
    }
    write_text_file(out_path(cfg, "world.json"), j.dump(2) + "\n");
    write_effective_config(cfg);
}

void run_cluster(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    VideoDataset train = load_stage_input(out_path(cfg, "train.gvds"), "synth");
    ClusteringConfig cc = resolve_clustering(cfg);
    cc.seed = stage_seed(cfg, "cluster");
    ClusterCenters centers = cluster_dataset(train, cc);
    save_dataset(centers_to_dataset(centers), out_path(cfg, "prototypes.gvds"));

    ordered_json j;
    j["variant"] = cfg.cluster.variant;
    j["metric"] = cfg.cluster.metric;
    j["k"] = cc.k;
    j["classes"] = ordered_json::array();
    for (size_t c = 0; c < centers.per_class.size(); ++c) {
        ordered_json jc;
        jc["class_id"] = c;
        jc["count"] = centers.per_class[c].size();
        jc["sse"] = centers.sse_per_class[c];
        j["classes"].push_back(std::move(jc));
    }
    write_text_file(out_path(cfg, "prototypes.json"), j.dump(2) + "\n");
    write_effective_config(cfg);
}

void run_distill(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    VideoDataset train = load_stage_input(out_path(cfg, "train.gvds"), "synth");
    DiffusionSchedule sched = resolve_schedule(cfg);
    std::unique_ptr<Denoiser> den = build_denoiser(cfg, train, sched);

    Classifier teacher;
    if (cfg.soft_labels.enabled) teacher = train_teacher(cfg, train);
    DistillOutput out = distill_in_memory(cfg, *den, train, cfg.soft_labels.enabled ? &teacher : nullptr);

    save_dataset(out.raw, out_path(cfg, "raw_instances.gvds"));
    save_traces_csv(out.traces, out_path(cfg, "trace.csv"));
    save_dataset(out.composed.dataset, out_path(cfg, "distilled.gvds"));
    save_provenance_json(out.composed, effective_plan(cfg), cfg.distill.method,
                         out_path(cfg, "provenance.json"));
    write_effective_config(cfg);
}

void run_compose(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    VideoDataset raw = load_stage_input(out_path(cfg, "raw_instances.gvds"), "distill");
    CompositionPlan plan = effective_plan(cfg);
    plan.validate(raw.frames);
    ComposeResult composed = compose_dataset(raw, plan, stage_seed(cfg, "compose"));
    if (cfg.soft_labels.enabled) {
        VideoDataset train = load_stage_input(out_path(cfg, "train.gvds"), "synth");
        Classifier teacher = train_teacher(cfg, train);
        composed.dataset.soft_labels =
            teacher_soft_labels(teacher, composed.dataset, cfg.soft_labels.temperature);
    }
    save_dataset(composed.dataset, out_path(cfg, "distilled.gvds"));
    save_provenance_json(composed, plan, cfg.distill.method, out_path(cfg, "provenance.json"));
    write_effective_config(cfg);
}

EvalReport run_eval(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    std::string distilled_path =
        cfg.eval.distilled_path.empty() ? out_path(cfg, "distilled.gvds") : cfg.eval.distilled_path;
    VideoDataset distilled = load_stage_input(distilled_path, "distill");
    VideoDataset test = load_stage_input(out_path(cfg, "test.gvds"), "synth");
    VideoDataset train = load_stage_input(out_path(cfg, "train.gvds"), "synth");

    Classifier teacher = train_teacher(cfg, train);
    EvalReport report = eval_in_memory(cfg, distilled, test, teacher);

    ordered_json j;
    j["labels"] = report.labels_used;
    j["runs"] = report.per_seed.size();
    j["accuracy_mean"] = report.accuracy_mean;
    j["accuracy_std"] = report.accuracy_std;
    j["per_seed"] = report.per_seed;
    j["representativeness"] = report.representativeness;
    write_text_file(out_path(cfg, "eval_report.json"), j.dump(2) + "\n");
    for (size_t r = 0; r < report.traces.size(); ++r) {
        save_train_trace_csv(report.traces[r], out_path(cfg, "train_trace_seed" + std::to_string(r) + ".csv"));
    }
    write_effective_config(cfg);
    return report;
}

void run_metrics(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    VideoDataset reference = load_stage_input(out_path(cfg, "train.gvds"), "synth");

    std::map<std::string, std::string> inputs = cfg.metrics.inputs;
    if (inputs.empty()) inputs["distilled"] = out_path(cfg, "distilled.gvds");

    Classifier feature_model;
    bool hidden = cfg.metrics.feature_space == "hidden";
    if (hidden) feature_model = train_teacher(cfg, reference);
    auto featurize = [&](const VideoDataset & ds) {
        return hidden ? dataset_hidden_features(ds, feature_model) : dataset_features(ds);
    };
    std::vector<Vec> ref_features = featurize(reference);

    EntropyConfig ec;
    ec.bins = cfg.metrics.bins;
    ec.seed = stage_seed(cfg, "metrics");
    ec.workers = cfg.workers;

    ordered_json j;
    j["feature_space"] = cfg.metrics.feature_space;
    j["bins"] = cfg.metrics.bins;
    j["reference"] = out_path(cfg, "train.gvds");
    j["sets"] = ordered_json::array();
    std::string csv = "name,entropy,coverage,mpd\n";
    for (const auto & [name, path] : inputs) {
        std::vector<Vec> features = featurize(load_stage_input(path, "distill"));
        double entropy = entropy_metric(features, ref_features, ec);
        double coverage = coverage_metric(ref_features, features);
        double mpd = mpd_metric(features);
        ordered_json js;
        js["name"] = name;
        js["path"] = path;
        js["entropy"] = entropy;
        js["coverage"] = coverage;
        js["mpd"] = mpd;
        j["sets"].push_back(std::move(js));
        csv += name + "," + fmt_double(entropy) + "," + fmt_double(coverage) + "," + fmt_double(mpd) + "\n";
    }
    write_text_file(out_path(cfg, "metrics.json"), j.dump(2) + "\n");
    write_text_file(out_path(cfg, "metrics.csv"), csv);
    write_effective_config(cfg);
}

void run_sweep(const ExperimentConfig & cfg) {
    ensure_out_dir(cfg);
    VideoDataset train = load_stage_input(out_path(cfg, "train.gvds"), "synth");
    VideoDataset test = load_stage_input(out_path(cfg, "test.gvds"), "synth");
    DiffusionSchedule sched = resolve_schedule(cfg);
    std::unique_ptr<Denoiser> den = build_denoiser(cfg, train, sched);
    Classifier teacher = train_teacher(cfg, train);

    std::vector<double> lambdas =
        cfg.sweep.lambdas.empty() ? std::vector<double>{cfg.guidance.lambda} : cfg.sweep.lambdas;
    std::vector<double> fracs = cfg.sweep.t_stop_fracs.empty() ? std::vector<double>{cfg.guidance.t_stop_frac}
                                                               : cfg.sweep.t_stop_fracs;
    std::vector<std::vector<int>> patterns = cfg.sweep.patterns.empty()
                                                 ? std::vector<std::vector<int>>{resolve_plan(cfg).pattern}
                                                 : cfg.sweep.patterns;
    std::vector<std::string> strategies = cfg.sweep.strategies.empty()
                                              ? std::vector<std::string>{cfg.compose.strategy}
                                              : cfg.sweep.strategies;

    ordered_json rows = ordered_json::array();
    std::string csv = "lambda,t_stop_frac,pattern,strategy,representativeness,acc_mean,acc_std,status\n";
    for (double lambda : lambdas) {
        for (double frac : fracs) {
            for (const auto & pattern : patterns) {
                for (const auto & strategy : strategies) {
                    ExperimentConfig cell = cfg;
                    cell.guidance.lambda = lambda;
                    cell.guidance.t_stop_frac = frac;
                    cell.compose.pattern = pattern;
                    cell.compose.strategy = strategy;
                    ordered_json row;
                    row["lambda"] = lambda;
                    row["t_stop_frac"] = frac;
                    row["pattern"] = pattern_string(pattern);
                    row["strategy"] = strategy;
                    std::string prefix = fmt_double(lambda) + "," + fmt_double(frac) + "," +
                                         pattern_string(pattern) + "," + strategy + ",";
                    try {
                        cell.validate();
                        DistillOutput d = distill_in_memory(cell, *den, train,
                                                            cell.soft_labels.enabled ? &teacher : nullptr);
                        EvalReport rep = eval_in_memory(cell, d.composed.dataset, test, teacher);
                        row["representativeness"] = rep.representativeness;
                        row["acc_mean"] = rep.accuracy_mean;
                        row["acc_std"] = rep.accuracy_std;
                        row["status"] = "ok";
                        csv += prefix + fmt_double(rep.representativeness) + "," +
                               fmt_double(rep.accuracy_mean) + "," + fmt_double(rep.accuracy_std) + ",ok\n";
                    } catch (const error & e) {
                        std::string status = std::string("error:") + e.kind_name();
                        row["status"] = status;
                        csv += prefix + ",,," + status + "\n";
                    }
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    ordered_json j;
    j["rows"] = std::move(rows);
    write_text_file(out_path(cfg, "sweep.json"), j.dump(2) + "\n");
    write_text_file(out_path(cfg, "sweep.csv"), csv);
    write_effective_config(cfg);
}

}  // namespace gvd
