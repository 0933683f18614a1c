#include "gvd.h"

#include <exception>
#include <new>
#include <string>

#include "json.hpp"

#include "gvd/config.hpp"
#include "gvd/dataset.hpp"
#include "gvd/errors.hpp"
#include "gvd/pipeline.hpp"

using nlohmann::ordered_json;

struct gvd_session {
    gvd::ExperimentConfig cfg = gvd::default_config();
    std::string last_error;
    std::string config_text;
    std::string eval_report;
};

struct gvd_dataset {
    gvd::VideoDataset ds;
};

namespace {

thread_local std::string t_open_error;

std::string error_json(const char * kind, const std::string & message, const std::string & context,
                       int exit_code) {
    ordered_json j;
    j["kind"] = kind;
    j["message"] = message;
    j["context"] = context;
    j["exit_code"] = exit_code;
    return j.dump();
}

gvd_status status_from_exit(int exit_code) {
    switch (exit_code) {
        case 2:  return GVD_ERR_CONFIG;
        case 3:  return GVD_ERR_NUMERIC;
        default: return GVD_ERR_INTERNAL;
    }
}

template <typename Fn>
gvd_status guarded(gvd_session * session, Fn && fn) {
    if (!session) return GVD_ERR_CONFIG;
    session->last_error.clear();
    try {
        fn();
        return GVD_OK;
    } catch (const gvd::error & e) {
        session->last_error = error_json(e.kind_name(), e.message(), e.context(), e.exit_code());
        return status_from_exit(e.exit_code());
    } catch (const std::exception & e) {
        session->last_error = error_json("internal", e.what(), "", 1);
        return GVD_ERR_INTERNAL;
    }
}

}  // namespace

extern "C" {

gvd_session * gvd_session_create(void) { return new (std::nothrow) gvd_session(); }

void gvd_session_destroy(gvd_session * session) { delete session; }

gvd_status gvd_session_load_config(gvd_session * session, const char * path) {
    return guarded(session, [&] {
        if (!path) throw gvd::error(gvd::error_kind::config, "config path is null");
        session->cfg = gvd::load_config(path);
    });
}

gvd_status gvd_session_set_config_json(gvd_session * session, const char * json_text) {
    return guarded(session, [&] {
        if (!json_text) throw gvd::error(gvd::error_kind::config, "config text is null");
        session->cfg = gvd::config_from_json_text(json_text);
    });
}

gvd_status gvd_session_set_seed(gvd_session * session, uint64_t master_seed) {
    return guarded(session, [&] { session->cfg.master_seed = master_seed; });
}

gvd_status gvd_session_set_out_dir(gvd_session * session, const char * path) {
    return guarded(session, [&] {
        if (!path || !*path) throw gvd::error(gvd::error_kind::config, "output directory is empty");
        session->cfg.out_dir = path;
    });
}

gvd_status gvd_session_set_workers(gvd_session * session, int workers) {
    return guarded(session, [&] {
        if (workers < 1) throw gvd::error(gvd::error_kind::config, "workers must be >= 1");
        session->cfg.workers = workers;
    });
}

const char * gvd_session_config_json(gvd_session * session) {
    if (!session) return "";
    session->config_text = session->cfg.to_json_text();
    return session->config_text.c_str();
}

const char * gvd_session_last_error(const gvd_session * session) {
    return session ? session->last_error.c_str() : "";
}

gvd_status gvd_run_synth(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::run_synth(session->cfg);
    });
}

gvd_status gvd_run_cluster(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::run_cluster(session->cfg);
    });
}

gvd_status gvd_run_distill(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::run_distill(session->cfg);
    });
}

gvd_status gvd_run_compose(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::run_compose(session->cfg);
    });
}

gvd_status gvd_run_eval(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::EvalReport report = gvd::run_eval(session->cfg);
        ordered_json j;
        j["labels"] = report.labels_used;
        j["runs"] = report.per_seed.size();
        j["accuracy_mean"] = report.accuracy_mean;
        j["accuracy_std"] = report.accuracy_std;
        j["per_seed"] = report.per_seed;
        j["representativeness"] = report.representativeness;
        session->eval_report = j.dump(2);
    });
}

gvd_status gvd_run_metrics(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::run_metrics(session->cfg);
    });
}

gvd_status gvd_run_sweep(gvd_session * session) {
    return guarded(session, [&] {
        session->cfg.validate();
        gvd::run_sweep(session->cfg);
    });
}

const char * gvd_session_eval_report(const gvd_session * session) {
    return session ? session->eval_report.c_str() : "";
}

gvd_dataset * gvd_dataset_open(const char * path) {
    t_open_error.clear();
    if (!path) {
        t_open_error = error_json("config", "dataset path is null", "", 2);
        return nullptr;
    }
    try {
        auto * d = new gvd_dataset();
        d->ds = gvd::load_dataset(path);
        return d;
    } catch (const gvd::error & e) {
        t_open_error = error_json(e.kind_name(), e.message(), e.context(), e.exit_code());
        return nullptr;
    } catch (const std::exception & e) {
        t_open_error = error_json("internal", e.what(), "", 1);
        return nullptr;
    }
}

const char * gvd_dataset_open_error(void) { return t_open_error.c_str(); }

void gvd_dataset_close(gvd_dataset * dataset) { delete dataset; }

int gvd_dataset_frames(const gvd_dataset * dataset) { return dataset ? dataset->ds.frames : -1; }

int gvd_dataset_dim(const gvd_dataset * dataset) { return dataset ? dataset->ds.dim : -1; }

int gvd_dataset_classes(const gvd_dataset * dataset) { return dataset ? dataset->ds.class_count : -1; }

uint64_t gvd_dataset_count(const gvd_dataset * dataset) {
    return dataset ? uint64_t(dataset->ds.records.size()) : 0;
}

int gvd_dataset_has_soft_labels(const gvd_dataset * dataset) {
    return dataset && dataset->ds.has_soft_labels() ? 1 : 0;
}

int gvd_dataset_class_of(const gvd_dataset * dataset, uint64_t index) {
    if (!dataset || index >= dataset->ds.records.size()) return -1;
    return int(dataset->ds.records[size_t(index)].class_id);
}

gvd_status gvd_dataset_copy_record(const gvd_dataset * dataset, uint64_t index, float * out,
                                   size_t out_len) {
    if (!dataset || !out) return GVD_ERR_CONFIG;
    if (index >= dataset->ds.records.size()) return GVD_ERR_CONFIG;
    size_t n = size_t(dataset->ds.flat_dim());
    if (out_len < n) return GVD_ERR_CONFIG;
    gvd::Vec flat = gvd::flatten(dataset->ds.records[size_t(index)].latent);
    for (size_t i = 0; i < n; ++i) out[i] = float(flat[Eigen::Index(i)]);
    return GVD_OK;
}

gvd_status gvd_dataset_copy_soft_labels(const gvd_dataset * dataset, uint64_t index, float * out,
                                        size_t out_len) {
    if (!dataset || !out) return GVD_ERR_CONFIG;
    if (!dataset->ds.has_soft_labels()) return GVD_ERR_CONFIG;
    if (index >= dataset->ds.soft_labels.size()) return GVD_ERR_CONFIG;
    size_t n = size_t(dataset->ds.class_count);
    if (out_len < n) return GVD_ERR_CONFIG;
    const gvd::Vec & row = dataset->ds.soft_labels[size_t(index)];
    for (size_t i = 0; i < n; ++i) out[i] = float(row[Eigen::Index(i)]);
    return GVD_OK;
}

}  // extern "C"
