// Command-line front end; talks to the engine exclusively through the
// goblend C API.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "goblend/goblend.h"

namespace {

int fail(gb_status rc) {
    std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(rc), gb_last_error());
    return 1;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"goblend: persona imitation via archive-driven exploration of a 2D racing game"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "pipeline config JSON (defaults when omitted)");

    // generate
    auto* generate = app.add_subcommand("generate", "produce the synthetic playtrace cohort");
    std::string gen_out = "dataset.csv";
    generate->add_option("--out", gen_out, "output playtrace CSV");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster a cohort into persona artifacts");
    std::string cl_dataset, cl_out = "personas";
    cluster->add_option("--dataset", cl_dataset, "playtrace CSV")->required();
    cluster->add_option("--out-dir", cl_out, "persona artifact directory");

    // explore
    auto* explore = app.add_subcommand("explore", "run one exploration experiment");
    std::string ex_dataset, ex_persona, ex_weighting, ex_out = "run";
    double ex_lambda = -1.0;
    std::uint64_t ex_seed = 1;
    long long ex_iterations = 0;
    int ex_k = 0;
    explore->add_option("--dataset", ex_dataset, "playtrace CSV")->required();
    explore->add_option("--persona", ex_persona,
                        "persona artifact path, or 'winner' / 'random'")->required();
    explore->add_option("--lambda", ex_lambda, "blend weight in [0,1] (config default if unset)");
    explore->add_option("--seed", ex_seed, "run seed");
    explore->add_option("--iterations", ex_iterations, "exploration iterations (config default if 0)");
    explore->add_option("--k", ex_k, "kNN neighbor count (config default if 0)");
    explore->add_option("--weighting", ex_weighting, "dudani | inverse-distance | literal-prose");
    explore->add_option("--out-dir", ex_out, "run output directory");

    // matrix
    auto* matrix = app.add_subcommand("matrix", "run the full persona x lambda protocol");
    std::string mx_dataset, mx_personas = "personas", mx_out = "matrix";
    matrix->add_option("--dataset", mx_dataset, "playtrace CSV")->required();
    matrix->add_option("--personas-dir", mx_personas, "persona artifact directory");
    matrix->add_option("--out-dir", mx_out, "matrix output directory");

    // report
    auto* report = app.add_subcommand("report", "recompute the results table from per-seed files");
    std::string rp_runs, rp_out = "results.csv";
    report->add_option("--runs-dir", rp_runs, "matrix output directory")->required();
    report->add_option("--out", rp_out, "output CSV");

    // render
    auto* render = app.add_subcommand("render", "render a run's trajectory to SVG");
    std::string rd_json, rd_out = "trace.svg";
    render->add_option("--run-json", rd_json, "best.json or a per-seed JSON file")->required();
    render->add_option("--out", rd_out, "output SVG");

    CLI11_PARSE(app, argc, argv);

    gb_status rc = GB_OK;
    if (generate->parsed()) {
        rc = gb_generate_cohort(opt(config_path), gen_out.c_str());
        if (rc == GB_OK) std::printf("wrote %s\n", gen_out.c_str());
    } else if (cluster->parsed()) {
        rc = gb_cluster_personas(opt(config_path), cl_dataset.c_str(), cl_out.c_str());
        if (rc == GB_OK) std::printf("personas written under %s\n", cl_out.c_str());
    } else if (explore->parsed()) {
        rc = gb_explore(opt(config_path), ex_dataset.c_str(), ex_persona.c_str(), ex_lambda,
                        ex_seed, ex_iterations, ex_k, opt(ex_weighting), ex_out.c_str());
        if (rc == GB_OK) std::printf("run written under %s\n", ex_out.c_str());
    } else if (matrix->parsed()) {
        rc = gb_run_matrix(opt(config_path), mx_dataset.c_str(), mx_personas.c_str(),
                           mx_out.c_str());
        if (rc == GB_OK) std::printf("matrix written under %s\n", mx_out.c_str());
    } else if (report->parsed()) {
        rc = gb_report(rp_runs.c_str(), rp_out.c_str());
        if (rc == GB_OK) std::printf("wrote %s\n", rp_out.c_str());
    } else if (render->parsed()) {
        rc = gb_render_trace(rd_json.c_str(), opt(config_path), rd_out.c_str());
        if (rc == GB_OK) std::printf("wrote %s\n", rd_out.c_str());
    }
    return rc == GB_OK ? 0 : fail(rc);
}
