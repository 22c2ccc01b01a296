// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point. Subcommands: verify, decode, cost, train.
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaze/commands.hpp"
#include "gaze/run_config.hpp"

namespace {

const char* const kConfigHelp =
    "Configuration files are flat `key = value` lines; `#` starts a comment.\n"
    "Unknown or repeated keys are errors. Keys (with defaults):\n"
    "  frames (1), height (24), width (24)   visual token grid, one unit per frame\n"
    "  dim (32)                              key/value dimension\n"
    "  layers (1), heads (1)                 independent KV caches per layer*head\n"
    "  text_len (0)                          leading text rows in every cache\n"
    "  block_t (1), block_h (6), block_w (6) region tile extents\n"
    "  top_k (2)                             regions selected per query\n"
    "  context_tokens (2)                    learnable context tokens per unit\n"
    "  final_ratio (0.1)                     selection ratio after the decay\n"
    "  decay_end_fraction (0.6)              fraction of steps spent decaying\n"
    "  seed (7)                              RNG seed; fixes every output byte\n"
    "  steps (2000)                          decoding steps / training steps\n"
    "  noise (0.1)                           feature and query noise scale\n"
    "  precision (single|double)             KV storage precision\n"
    "  residency (persistent|reset_per_step) fast-tier behavior across steps\n"
    "  batch (16), lr (100)                  training batch size and step size\n"
    "  eval_every (100), holdout_tasks (500) hit-rate evaluation cadence and set\n"
    "  heatmap_layer (0), heatmap_head (0)   which head's weights are rendered\n"
    "A commented reference file ships in configs/reference.cfg.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaze: selective visual attention with per-query TopK region routing"};
    app.require_subcommand(1);
    app.footer(kConfigHelp);

    app.add_subcommand("verify", "run the built-in verification suites");

    std::string config_path;
    std::string out_dir;
    std::string dense_path;
    std::string gaze_path;
    std::vector<std::size_t> heatmap_steps;
    bool no_schedule = false;

    CLI::App* decode =
        app.add_subcommand("decode", "synthesize a seeded scene and trace routed decoding");
    decode->add_option("--config", config_path, "run configuration file")->required();
    decode->add_option("--heatmap-steps", heatmap_steps, "steps to render as PGM heatmaps")
        ->delimiter(',');
    decode->add_option("--out", out_dir, "output directory")->required();

    CLI::App* cost = app.add_subcommand("cost", "compare dense and gaze analytical costs");
    cost->add_option("--dense", dense_path, "dense-side configuration file")->required();
    cost->add_option("--gaze", gaze_path, "gaze-side configuration file")->required();
    cost->add_option("--out", out_dir, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "train the toy retrieval model");
    train->add_option("--config", config_path, "run configuration file")->required();
    train->add_flag("--no-schedule", no_schedule,
                    "hold the selection ratio at final_ratio from step 0");
    train->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("verify")) return gaze::cmd_verify(std::cout);
        if (app.got_subcommand(decode))
            return gaze::cmd_decode(gaze::load_run_config(config_path), heatmap_steps, out_dir,
                                    std::cout);
        if (app.got_subcommand(cost))
            return gaze::cmd_cost(dense_path, gaze_path, out_dir, std::cout);
        if (app.got_subcommand(train))
            return gaze::cmd_train(gaze::load_run_config(config_path), no_schedule, out_dir,
                                   std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
