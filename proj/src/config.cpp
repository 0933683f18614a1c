#include "gvd/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gvd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad_field(const std::string & path, const std::string & why) {
    throw error(error_kind::config, "invalid config field", path + ": " + why);
}

int get_int(const json & v, const std::string & path) {
    if (!v.is_number_integer()) bad_field(path, "expected an integer");
    return v.get<int>();
}

uint64_t get_u64(const json & v, const std::string & path) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) bad_field(path, "expected a non-negative integer");
    if (v.is_number_integer() && v.get<int64_t>() < 0) bad_field(path, "expected a non-negative integer");
    return v.get<uint64_t>();
}

double get_double(const json & v, const std::string & path) {
    if (!v.is_number()) bad_field(path, "expected a number");
    return v.get<double>();
}

bool get_bool(const json & v, const std::string & path) {
    if (!v.is_boolean()) bad_field(path, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json & v, const std::string & path) {
    if (!v.is_string()) bad_field(path, "expected a string");
    return v.get<std::string>();
}

std::vector<int> get_int_list(const json & v, const std::string & path) {
    if (!v.is_array()) bad_field(path, "expected an array of integers");
    std::vector<int> out;
    for (size_t i = 0; i < v.size(); ++i) out.push_back(get_int(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> get_double_list(const json & v, const std::string & path) {
    if (!v.is_array()) bad_field(path, "expected an array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) out.push_back(get_double(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void require_object(const json & v, const std::string & path) {
    if (!v.is_object()) bad_field(path, "expected an object");
}

void apply_world(const json & j, WorldConfig & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "spec_path") cfg.spec_path = get_string(value, p);
        else if (key == "frames") cfg.frames = get_int(value, p);
        else if (key == "dim") cfg.dim = get_int(value, p);
        else if (key == "classes") cfg.classes = get_int(value, p);
        else if (key == "modes") cfg.modes = get_int(value, p);
        else if (key == "seed") cfg.seed = get_u64(value, p);
        else if (key == "train_per_class") cfg.train_per_class = get_int(value, p);
        else if (key == "test_per_class") cfg.test_per_class = get_int(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_schedule(const json & j, ScheduleConfig & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "steps") cfg.steps = get_int(value, p);
        else if (key == "beta_min") cfg.beta_min = get_double(value, p);
        else if (key == "beta_max") cfg.beta_max = get_double(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_denoiser(const json & j, DenoiserConfig & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "kind") cfg.kind = get_string(value, p);
        else if (key == "hidden") cfg.hidden = get_int(value, p);
        else if (key == "epochs") cfg.epochs = get_int(value, p);
        else if (key == "batch") cfg.batch = get_int(value, p);
        else if (key == "learning_rate") cfg.learning_rate = get_double(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_guidance(const json & j, GuidanceSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "lambda") cfg.lambda = get_double(value, p);
        else if (key == "t_stop_frac") cfg.t_stop_frac = get_double(value, p);
        else if (key == "frame_decay") cfg.frame_decay = get_bool(value, p);
        else if (key == "sampler_steps") cfg.sampler_steps = get_int(value, p);
        else if (key == "phase") cfg.phase = get_string(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_cluster(const json & j, ClusterSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "variant") cfg.variant = get_string(value, p);
        else if (key == "metric") cfg.metric = get_string(value, p);
        else if (key == "max_iters") cfg.max_iters = get_int(value, p);
        else if (key == "restarts") cfg.restarts = get_int(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_distill(const json & j, DistillSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "method") cfg.method = get_string(value, p);
        else if (key == "ipc") cfg.ipc = get_int(value, p);
        else if (key == "knoise_t_start") cfg.knoise_t_start = get_int(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_compose(const json & j, ComposeSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "pattern") cfg.pattern = get_int_list(value, p);
        else if (key == "strategy") cfg.strategy = get_string(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_soft(const json & j, SoftLabelSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "enabled") cfg.enabled = get_bool(value, p);
        else if (key == "alpha") cfg.alpha = get_double(value, p);
        else if (key == "temperature") cfg.temperature = get_double(value, p);
        else bad_field(p, "unknown key");
    }
}

template <typename T>
void apply_trainer(const json & j, T & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "hidden") cfg.hidden = get_int(value, p);
        else if (key == "epochs") cfg.epochs = get_int(value, p);
        else if (key == "batch") cfg.batch = get_int(value, p);
        else if (key == "learning_rate") cfg.learning_rate = get_double(value, p);
        else if (key == "decay_factor") cfg.decay_factor = get_double(value, p);
        else bad_field(p, "unknown key");
    }
}

void apply_eval(const json & j, EvalSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "runs") cfg.runs = get_int(value, p);
        else if (key == "labels") cfg.labels = get_string(value, p);
        else if (key == "distilled_path") cfg.distilled_path = get_string(value, p);
        else if (key == "student") apply_trainer(value, cfg.student, p);
        else bad_field(p, "unknown key");
    }
}

void apply_metrics(const json & j, MetricsSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "bins") cfg.bins = get_int(value, p);
        else if (key == "feature_space") cfg.feature_space = get_string(value, p);
        else if (key == "inputs") {
            require_object(value, p);
            cfg.inputs.clear();
            for (const auto & [name, file] : value.items()) {
                cfg.inputs[name] = get_string(file, p + "." + name);
            }
        } else {
            bad_field(p, "unknown key");
        }
    }
}

void apply_sweep(const json & j, SweepSettings & cfg, const std::string & path) {
    require_object(j, path);
    for (const auto & [key, value] : j.items()) {
        std::string p = path + "." + key;
        if (key == "lambdas") cfg.lambdas = get_double_list(value, p);
        else if (key == "t_stop_fracs") cfg.t_stop_fracs = get_double_list(value, p);
        else if (key == "patterns") {
            if (!value.is_array()) bad_field(p, "expected an array of integer arrays");
            cfg.patterns.clear();
            for (size_t i = 0; i < value.size(); ++i) {
                cfg.patterns.push_back(get_int_list(value[i], p + "[" + std::to_string(i) + "]"));
            }
        } else if (key == "strategies") {
            if (!value.is_array()) bad_field(p, "expected an array of strings");
            cfg.strategies.clear();
            for (size_t i = 0; i < value.size(); ++i) {
                cfg.strategies.push_back(get_string(value[i], p + "[" + std::to_string(i) + "]"));
            }
        } else {
            bad_field(p, "unknown key");
        }
    }
}

template <typename T>
bool is_one_of(const std::string & value, std::initializer_list<T> options) {
    for (const auto & o : options) {
        if (value == o) return true;
    }
    return false;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (workers < 1) throw error(error_kind::config, "workers must be >= 1");
    if (out_dir.empty()) throw error(error_kind::config, "out_dir must not be empty");

    if (world.spec_path.empty()) {
        if (world.frames < 2) throw error(error_kind::config, "world.frames must be >= 2");
        if (world.dim < 1) throw error(error_kind::config, "world.dim must be >= 1");
        if (world.classes < 2) throw error(error_kind::config, "world.classes must be >= 2");
        if (world.modes < 1) throw error(error_kind::config, "world.modes must be >= 1");
    }
    if (world.train_per_class < 1 || world.test_per_class < 1) {
        throw error(error_kind::config, "world.train_per_class and world.test_per_class must be >= 1");
    }

    if (schedule.steps < 1) throw error(error_kind::config, "schedule.steps must be >= 1");
    if (!(schedule.beta_min > 0.0) || !(schedule.beta_max < 1.0) || schedule.beta_min > schedule.beta_max) {
        throw error(error_kind::config, "schedule betas must satisfy 0 < beta_min <= beta_max < 1");
    }

    if (!is_one_of(denoiser.kind, {"oracle", "trainable"})) {
        throw error(error_kind::config, "denoiser.kind must be oracle or trainable", denoiser.kind);
    }
    if (denoiser.hidden < 1 || denoiser.epochs < 1 || denoiser.batch < 1 || !(denoiser.learning_rate > 0.0)) {
        throw error(error_kind::config, "denoiser training settings must be positive");
    }

    if (!std::isfinite(guidance.lambda) || guidance.lambda < 0.0) {
        throw error(error_kind::config, "guidance.lambda must be finite and non-negative");
    }
    if (!(guidance.t_stop_frac >= 0.0) || !(guidance.t_stop_frac <= 1.0)) {
        throw error(error_kind::config, "guidance.t_stop_frac must be within [0, 1]");
    }
    if (guidance.sampler_steps < 1 || guidance.sampler_steps > schedule.steps) {
        throw error(error_kind::config, "guidance.sampler_steps must be within [1, schedule.steps]");
    }
    if (!is_one_of(guidance.phase, {"high_t", "low_t"})) {
        throw error(error_kind::config, "guidance.phase must be high_t or low_t", guidance.phase);
    }

    if (!is_one_of(cluster.variant, {"direct", "real_video", "dummy_video"})) {
        throw error(error_kind::config, "cluster.variant is unknown", cluster.variant);
    }
    if (!is_one_of(cluster.metric, {"euclidean", "cosine", "frobenius"})) {
        throw error(error_kind::config, "cluster.metric is unknown", cluster.metric);
    }
    if (cluster.max_iters < 1 || cluster.restarts < 1) {
        throw error(error_kind::config, "cluster.max_iters and cluster.restarts must be >= 1");
    }

    if (!is_one_of(distill.method, {"gvd", "knoise", "naive", "proto_repeat"})) {
        throw error(error_kind::config, "distill.method is unknown", distill.method);
    }
    if (distill.ipc < 1) throw error(error_kind::config, "distill.ipc must be >= 1");
    if (distill.knoise_t_start < -1 || distill.knoise_t_start > schedule.steps) {
        throw error(error_kind::config, "distill.knoise_t_start must be -1 or within [0, schedule.steps]");
    }

    for (int n : compose.pattern) {
        if (n < 1) throw error(error_kind::config, "compose.pattern entries must be >= 1");
    }
    if (!is_one_of(compose.strategy, {"continuous", "random"})) {
        throw error(error_kind::config, "compose.strategy must be continuous or random", compose.strategy);
    }

    if (!(soft_labels.alpha >= 0.0) || !(soft_labels.alpha <= 1.0)) {
        throw error(error_kind::config, "soft_labels.alpha must be within [0, 1]");
    }
    if (!(soft_labels.temperature > 0.0)) {
        throw error(error_kind::config, "soft_labels.temperature must be positive");
    }

    if (eval.runs < 1) throw error(error_kind::config, "eval.runs must be >= 1");
    if (!is_one_of(eval.labels, {"auto", "soft", "hard"})) {
        throw error(error_kind::config, "eval.labels must be auto, soft or hard", eval.labels);
    }
    auto check_trainer = [](int hidden, int epochs, int batch, double lr, double decay, const char * who) {
        if (hidden < 1 || epochs < 0 || batch < 1 || !(lr > 0.0) || !(decay > 0.0)) {
            throw error(error_kind::config, std::string(who) + " training settings are invalid");
        }
    };
    check_trainer(eval.student.hidden, eval.student.epochs, eval.student.batch, eval.student.learning_rate,
                  eval.student.decay_factor, "eval.student");
    check_trainer(teacher.hidden, teacher.epochs, teacher.batch, teacher.learning_rate, teacher.decay_factor,
                  "teacher");

    if (metrics.bins < 1) throw error(error_kind::config, "metrics.bins must be >= 1");
    if (!is_one_of(metrics.feature_space, {"raw", "hidden"})) {
        throw error(error_kind::config, "metrics.feature_space must be raw or hidden", metrics.feature_space);
    }

    if (sweep.lambdas.empty() && sweep.t_stop_fracs.empty() && sweep.patterns.empty() &&
        sweep.strategies.empty()) {
        throw error(error_kind::config, "sweep needs at least one axis with values");
    }
    for (double l : sweep.lambdas) {
        if (!std::isfinite(l) || l < 0.0) throw error(error_kind::config, "sweep.lambdas must be non-negative");
    }
    for (double f : sweep.t_stop_fracs) {
        if (!(f >= 0.0) || !(f <= 1.0)) throw error(error_kind::config, "sweep.t_stop_fracs must be within [0, 1]");
    }
    for (const auto & s : sweep.strategies) {
        if (!is_one_of(s, {"continuous", "random"})) {
            throw error(error_kind::config, "sweep.strategies entries must be continuous or random", s);
        }
    }
}

std::string ExperimentConfig::to_json_text() const {
    ordered_json j;
    j["master_seed"] = master_seed;
    j["out_dir"] = out_dir;
    j["workers"] = workers;
    j["world"] = {{"spec_path", world.spec_path}, {"frames", world.frames},     {"dim", world.dim},
                  {"classes", world.classes},     {"modes", world.modes},       {"seed", world.seed},
                  {"train_per_class", world.train_per_class},
                  {"test_per_class", world.test_per_class}};
    j["schedule"] = {{"steps", schedule.steps}, {"beta_min", schedule.beta_min}, {"beta_max", schedule.beta_max}};
    j["denoiser"] = {{"kind", denoiser.kind},
                     {"hidden", denoiser.hidden},
                     {"epochs", denoiser.epochs},
                     {"batch", denoiser.batch},
                     {"learning_rate", denoiser.learning_rate}};
    j["guidance"] = {{"lambda", guidance.lambda},
                     {"t_stop_frac", guidance.t_stop_frac},
                     {"frame_decay", guidance.frame_decay},
                     {"sampler_steps", guidance.sampler_steps},
                     {"phase", guidance.phase}};
    j["cluster"] = {{"variant", cluster.variant},
                    {"metric", cluster.metric},
                    {"max_iters", cluster.max_iters},
                    {"restarts", cluster.restarts}};
    j["distill"] = {{"method", distill.method}, {"ipc", distill.ipc}, {"knoise_t_start", distill.knoise_t_start}};
    j["compose"] = {{"pattern", compose.pattern}, {"strategy", compose.strategy}};
    j["soft_labels"] = {{"enabled", soft_labels.enabled},
                        {"alpha", soft_labels.alpha},
                        {"temperature", soft_labels.temperature}};
    j["teacher"] = {{"hidden", teacher.hidden},
                    {"epochs", teacher.epochs},
                    {"batch", teacher.batch},
                    {"learning_rate", teacher.learning_rate},
                    {"decay_factor", teacher.decay_factor}};
    j["eval"] = {{"runs", eval.runs},
                 {"labels", eval.labels},
                 {"distilled_path", eval.distilled_path},
                 {"student",
                  {{"hidden", eval.student.hidden},
                   {"epochs", eval.student.epochs},
                   {"batch", eval.student.batch},
                   {"learning_rate", eval.student.learning_rate},
                   {"decay_factor", eval.student.decay_factor}}}};
    j["metrics"] = {{"bins", metrics.bins}, {"feature_space", metrics.feature_space}, {"inputs", metrics.inputs}};
    j["sweep"] = {{"lambdas", sweep.lambdas},
                  {"t_stop_fracs", sweep.t_stop_fracs},
                  {"patterns", sweep.patterns},
                  {"strategies", sweep.strategies}};
    return j.dump(2) + "\n";
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig config_from_json_text(const std::string & text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception & e) {
        throw error(error_kind::format, "config is not valid JSON", e.what());
    }
    require_object(j, "config");

    ExperimentConfig cfg;
    for (const auto & [key, value] : j.items()) {
        if (key == "master_seed") cfg.master_seed = get_u64(value, key);
        else if (key == "out_dir") cfg.out_dir = get_string(value, key);
        else if (key == "workers") cfg.workers = get_int(value, key);
        else if (key == "world") apply_world(value, cfg.world, key);
        else if (key == "schedule") apply_schedule(value, cfg.schedule, key);
        else if (key == "denoiser") apply_denoiser(value, cfg.denoiser, key);
        else if (key == "guidance") apply_guidance(value, cfg.guidance, key);
        else if (key == "cluster") apply_cluster(value, cfg.cluster, key);
        else if (key == "distill") apply_distill(value, cfg.distill, key);
        else if (key == "compose") apply_compose(value, cfg.compose, key);
        else if (key == "soft_labels") apply_soft(value, cfg.soft_labels, key);
        else if (key == "teacher") apply_trainer(value, cfg.teacher, key);
        else if (key == "eval") apply_eval(value, cfg.eval, key);
        else if (key == "metrics") apply_metrics(value, cfg.metrics, key);
        else if (key == "sweep") apply_sweep(value, cfg.sweep, key);
        else bad_field(key, "unknown key");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(error_kind::io, "cannot open config file", path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return config_from_json_text(buffer.str());
    } catch (const error & e) {
        throw error(e.kind(), e.message(), path + ": " + e.context());
    }
}

DiffusionSchedule resolve_schedule(const ExperimentConfig & cfg) {
    return build_schedule(cfg.schedule.steps, cfg.schedule.beta_min, cfg.schedule.beta_max);
}

WorldSpec load_world_spec(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(error_kind::io, "cannot open world spec file", path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::exception & e) {
        throw error(error_kind::format, "world spec is not valid JSON", path + ": " + e.what());
    }
    require_object(j, "world");

    WorldSpec spec;
    for (const auto & [key, value] : j.items()) {
        if (key == "frames") spec.frames = get_int(value, "world.frames");
        else if (key == "dim") spec.dim = get_int(value, "world.dim");
        else if (key == "seed") spec.seed = get_u64(value, "world.seed");
        else if (key == "classes") {
            if (!value.is_array()) bad_field("world.classes", "expected an array");
            for (size_t c = 0; c < value.size(); ++c) {
                const json & jc = value[c];
                std::string cpath = "world.classes[" + std::to_string(c) + "]";
                require_object(jc, cpath);
                ClassSpec cls;
                for (const auto & [ckey, cvalue] : jc.items()) {
                    if (ckey != "modes") bad_field(cpath + "." + ckey, "unknown key");
                    if (!cvalue.is_array()) bad_field(cpath + ".modes", "expected an array");
                    for (size_t m = 0; m < cvalue.size(); ++m) {
                        const json & jm = cvalue[m];
                        std::string mpath = cpath + ".modes[" + std::to_string(m) + "]";
                        require_object(jm, mpath);
                        ModeSpec mode;
                        for (const auto & [mkey, mvalue] : jm.items()) {
                            std::string p = mpath + "." + mkey;
                            if (mkey == "weight") mode.weight = get_double(mvalue, p);
                            else if (mkey == "init_cov_scale") mode.init_cov_scale = get_double(mvalue, p);
                            else if (mkey == "process_noise") mode.process_noise = get_double(mvalue, p);
                            else if (mkey == "init_mean") {
                                auto vals = get_double_list(mvalue, p);
                                mode.init_mean = Eigen::Map<Vec>(vals.data(), Eigen::Index(vals.size()));
                            } else if (mkey == "drift") {
                                auto vals = get_double_list(mvalue, p);
                                mode.drift = Eigen::Map<Vec>(vals.data(), Eigen::Index(vals.size()));
                            } else if (mkey == "dynamics") {
                                if (!mvalue.is_array() || mvalue.empty()) bad_field(p, "expected a matrix");
                                size_t rows = mvalue.size();
                                Mat a;
                                for (size_t r = 0; r < rows; ++r) {
                                    auto row = get_double_list(mvalue[r], p + "[" + std::to_string(r) + "]");
                                    if (r == 0) a = Mat(Eigen::Index(rows), Eigen::Index(row.size()));
                                    if (Eigen::Index(row.size()) != a.cols()) bad_field(p, "ragged matrix rows");
                                    for (size_t cidx = 0; cidx < row.size(); ++cidx) {
                                        a(Eigen::Index(r), Eigen::Index(cidx)) = row[cidx];
                                    }
                                }
                                mode.dynamics = std::move(a);
                            } else {
                                bad_field(p, "unknown key");
                            }
                        }
                        cls.modes.push_back(std::move(mode));
                    }
                }
                spec.classes.push_back(std::move(cls));
            }
        } else {
            bad_field("world." + key, "unknown key");
        }
    }
    spec.validate();
    return spec;
}

WorldSpec resolve_world_spec(const ExperimentConfig & cfg) {
    if (!cfg.world.spec_path.empty()) return load_world_spec(cfg.world.spec_path);
    return default_world_spec(cfg.world.frames, cfg.world.dim, cfg.world.classes, cfg.world.modes,
                              cfg.world.seed);
}

GuidanceConfig resolve_guidance(const ExperimentConfig & cfg, const DiffusionSchedule & sched) {
    GuidanceConfig g;
    g.lambda = cfg.guidance.lambda;
    g.t_stop = int(std::llround(cfg.guidance.t_stop_frac * double(sched.steps)));
    g.t_stop = std::max(0, std::min(sched.steps, g.t_stop));
    g.frame_decay = cfg.guidance.frame_decay;
    g.sampler_steps = cfg.guidance.sampler_steps;
    g.phase = cfg.guidance.phase == "low_t" ? GuidancePhase::low_t : GuidancePhase::high_t;
    g.validate(sched);
    return g;
}

CompositionPlan resolve_plan(const ExperimentConfig & cfg) {
    CompositionPlan plan;
    plan.strategy = cfg.compose.strategy == "continuous" ? ComposeStrategy::continuous
                                                         : ComposeStrategy::random;
    if (!cfg.compose.pattern.empty()) {
        plan.pattern = cfg.compose.pattern;
        return plan;
    }
    // Default group: four equal slots when the frame count allows it, two
    // otherwise, degenerating to a single uncomposed slot.
    int frames = cfg.world.frames;
    if (!cfg.world.spec_path.empty()) frames = load_world_spec(cfg.world.spec_path).frames;
    int slots = frames % 4 == 0 ? 4 : (frames % 2 == 0 ? 2 : 1);
    plan.pattern.assign(size_t(slots), frames / slots);
    return plan;
}

DistillMethod resolve_method(const ExperimentConfig & cfg) {
    if (cfg.distill.method == "gvd") return DistillMethod::gvd;
    if (cfg.distill.method == "knoise") return DistillMethod::knoise;
    if (cfg.distill.method == "naive") return DistillMethod::naive;
    return DistillMethod::proto_repeat;
}

ClusteringConfig resolve_clustering(const ExperimentConfig & cfg) {
    ClusteringConfig cc;
    cc.k = cfg.distill.ipc * resolve_plan(cfg).group_size();
    cc.variant = cfg.cluster.variant == "direct"
                     ? ClusterVariant::direct
                     : (cfg.cluster.variant == "real_video" ? ClusterVariant::real_video
                                                            : ClusterVariant::dummy_video);
    cc.metric = cfg.cluster.metric == "cosine" ? ClusterMetric::cosine : ClusterMetric::euclidean;
    cc.max_iters = cfg.cluster.max_iters;
    cc.restarts = cfg.cluster.restarts;
    cc.workers = cfg.workers;
    return cc;
}

ClassifierTrainConfig resolve_student(const ExperimentConfig & cfg) {
    ClassifierTrainConfig c;
    c.hidden = cfg.eval.student.hidden;
    c.epochs = cfg.eval.student.epochs;
    c.batch = cfg.eval.student.batch;
    c.learning_rate = cfg.eval.student.learning_rate;
    c.decay_factor = cfg.eval.student.decay_factor;
    return c;
}

ClassifierTrainConfig resolve_teacher(const ExperimentConfig & cfg) {
    ClassifierTrainConfig c;
    c.hidden = cfg.teacher.hidden;
    c.epochs = cfg.teacher.epochs;
    c.batch = cfg.teacher.batch;
    c.learning_rate = cfg.teacher.learning_rate;
    c.decay_factor = cfg.teacher.decay_factor;
    return c;
}

}  // namespace gvd
