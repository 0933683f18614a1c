// Command-line front end over the C API. Each subcommand maps to one
// pipeline stage; --seed/--out/--workers override the config file.
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "gvd.h"

namespace {

struct StageArgs {
    std::string config;
    uint64_t seed = 0;
    std::string out;
    int workers = 0;
    bool dump = false;
    CLI::App * cmd = nullptr;
};

int fail(gvd_session * session, gvd_status status) {
    std::fprintf(stderr, "%s\n", gvd_session_last_error(session));
    gvd_session_destroy(session);
    return int(status);
}

}  // namespace

int main(int argc, char ** argv) {
    CLI::App app{"latent-video dataset distillation pipeline"};
    app.require_subcommand(1);

    constexpr int n_stages = 7;
    const char * names[n_stages] = {"synth", "cluster", "distill", "compose", "eval", "metrics", "sweep"};
    const char * descs[n_stages] = {
        "generate the synthetic train/test datasets",
        "compute per-class prototypes",
        "cluster, sample, compose and label the distilled set",
        "re-compose previously sampled raw instances under the current plan",
        "train students on the distilled set and report accuracy",
        "compute diversity metrics against the train set",
        "run the configured guidance/composition sweep",
    };
    gvd_status (*runners[n_stages])(gvd_session *) = {
        gvd_run_synth, gvd_run_cluster, gvd_run_distill, gvd_run_compose,
        gvd_run_eval,  gvd_run_metrics, gvd_run_sweep,
    };

    StageArgs args[n_stages];
    for (int i = 0; i < n_stages; ++i) {
        CLI::App * sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", args[i].config, "experiment config JSON file");
        sub->add_option("--seed", args[i].seed, "master seed override");
        sub->add_option("--out", args[i].out, "output directory override");
        sub->add_option("--workers", args[i].workers, "worker thread count override");
        sub->add_flag("--dump-config", args[i].dump, "print the effective config and exit");
        args[i].cmd = sub;
    }

    CLI11_PARSE(app, argc, argv);

    int stage = -1;
    for (int i = 0; i < n_stages; ++i) {
        if (args[i].cmd->parsed()) stage = i;
    }
    if (stage < 0) return 2;
    const StageArgs & a = args[stage];

    gvd_session * session = gvd_session_create();
    if (!session) {
        std::fprintf(stderr, "{\"kind\":\"internal\",\"message\":\"out of memory\",\"exit_code\":1}\n");
        return 1;
    }

    gvd_status status = GVD_OK;
    if (!a.config.empty()) status = gvd_session_load_config(session, a.config.c_str());
    if (status == GVD_OK && a.cmd->count("--seed")) status = gvd_session_set_seed(session, a.seed);
    if (status == GVD_OK && a.cmd->count("--out")) status = gvd_session_set_out_dir(session, a.out.c_str());
    if (status == GVD_OK && a.cmd->count("--workers")) status = gvd_session_set_workers(session, a.workers);
    if (status != GVD_OK) return fail(session, status);

    if (a.dump) {
        std::fputs(gvd_session_config_json(session), stdout);
        gvd_session_destroy(session);
        return 0;
    }

    status = runners[stage](session);
    if (status != GVD_OK) return fail(session, status);
    if (runners[stage] == gvd_run_eval) std::printf("%s\n", gvd_session_eval_report(session));
    gvd_session_destroy(session);
    return 0;
}
