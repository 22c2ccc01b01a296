// SPDX-License-Identifier: Apache-2.0
//
// The four CLI operations, callable in-process so tests can drive them
// without spawning the binary. Every command is deterministic for a fixed
// (config, seed): repeated runs produce byte-identical files.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gaze/cost_model.hpp"
#include "gaze/error.hpp"
#include "gaze/io.hpp"
#include "gaze/run_config.hpp"
#include "gaze/scene.hpp"
#include "gaze/trainer.hpp"
#include "gaze/verify.hpp"

namespace gaze {

inline int cmd_verify(std::ostream& out) {
    const bool ok = report_suites(run_all_suites(), out);
    out << (ok ? "verify: all suites passed\n" : "verify: FAILURES\n");
    return ok ? 0 : 1;
}

namespace detail {

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::ostringstream out;
    out << "step,layer,head,selected_region_ids,max_score\n";
    for (const TraceRow& row : rows) {
        out << row.step << "," << row.layer << "," << row.head << ",";
        for (std::size_t i = 0; i < row.selected_region_ids.size(); ++i) {
            if (i) out << ";";
            out << row.selected_region_ids[i];
        }
        out << "," << format_double(row.max_score) << "\n";
    }
    return out.str();
}

inline std::string transfer_csv(const std::vector<TransferRow>& rows,
                                std::uint64_t bytes_per_token) {
    std::ostringstream out;
    out << "step,new_bytes,newly_loaded_regions\n";
    std::uint64_t total_bytes = 0;
    std::uint64_t total_regions = 0;
    for (const TransferRow& row : rows) {
        out << row.step << "," << row.new_bytes << "," << row.newly_loaded << "\n";
        total_bytes += row.new_bytes;
        total_regions += row.newly_loaded;
    }
    out << "total," << total_bytes << "," << total_regions << "\n";
    out << "# bytes per token (key+value) = " << bytes_per_token << "\n";
    return out.str();
}

// Stack frames vertically; each frame is max-normalized on its own.
inline void write_heatmap(const std::string& path, const SceneLayout& layout,
                          const std::vector<double>& grid) {
    const std::size_t per_frame = layout.tokens_per_unit();
    std::vector<int> pixels;
    pixels.reserve(grid.size());
    for (std::size_t f = 0; f < layout.frames; ++f) {
        const std::vector<int> levels = grayscale_levels(
            std::span<const double>(grid.data() + f * per_frame, per_frame));
        pixels.insert(pixels.end(), levels.begin(), levels.end());
    }
    write_pgm(path, layout.width, layout.frames * layout.height, pixels);
}

template <class T>
int run_decode_command(const RunConfig& cfg, const std::vector<std::size_t>& heatmap_steps,
                       const std::string& out_dir, std::ostream& out) {
    SeededStream stream(cfg.seed);
    const DecodeScene scene =
        generate_scene(stream, cfg.scene_layout(), cfg.block(), cfg.dim, cfg.noise);
    DecodeParams params;
    params.layers = cfg.layers;
    params.heads = cfg.heads;
    params.top_k = cfg.top_k;
    params.steps = cfg.steps;
    params.reset_residency_per_step = cfg.residency == Residency::reset_per_step;
    params.heatmap_layer = cfg.heatmap_layer;
    params.heatmap_head = cfg.heatmap_head;
    const DecodeResult result = run_decode<T>(stream, scene, params, heatmap_steps);

    write_text_file(join_path(out_dir, "trace.csv"), trace_csv(result.trace));
    write_text_file(join_path(out_dir, "transfer.csv"),
                    transfer_csv(result.transfer,
                                 TierState(cfg.dim, sizeof(T)).bytes_per_token()));
    for (const auto& [step, grid] : result.heatmaps)
        write_heatmap(join_path(out_dir, "heatmap_step" + std::to_string(step) + ".pgm"),
                      scene.layout, grid);
    write_text_file(join_path(out_dir, "config.txt"), dump_run_config(cfg));
    out << "decode: " << cfg.steps << " steps, " << result.heatmaps.size() << " heatmaps -> "
        << out_dir << "\n";
    return 0;
}

}  // namespace detail

inline int cmd_decode(const RunConfig& cfg, const std::vector<std::size_t>& heatmap_steps,
                      const std::string& out_dir, std::ostream& out) {
    cfg.validate();
    for (std::size_t step : heatmap_steps)
        if (step >= cfg.steps)
            throw ConfigError("heatmap step " + std::to_string(step) +
                              " is beyond the run length");
    detail::ensure_dir(out_dir);
    if (cfg.precision == Precision::single_)
        return detail::run_decode_command<float>(cfg, heatmap_steps, out_dir, out);
    return detail::run_decode_command<double>(cfg, heatmap_steps, out_dir, out);
}

inline int cmd_cost(const std::string& dense_config_path, const std::string& gaze_config_path,
                    const std::string& out_dir, std::ostream& out) {
    const RunConfig dense_cfg = load_run_config(dense_config_path);
    const RunConfig gaze_cfg = load_run_config(gaze_config_path);
    const CostReport report = savings_report(dense_cfg.geometry(), gaze_cfg.geometry());
    detail::ensure_dir(out_dir);
    const std::string text = format_cost_report(report);
    write_text_file(detail::join_path(out_dir, "report.txt"), text);
    write_text_file(detail::join_path(out_dir, "report.csv"), cost_report_csv(report));
    out << text;
    return 0;
}

inline int cmd_train(const RunConfig& cfg, bool no_schedule, const std::string& out_dir,
                     std::ostream& out) {
    cfg.validate();
    detail::ensure_dir(out_dir);
    const TaskDims dims = cfg.task_dims();
    const TrainResult result = run_training(dims, cfg.train_options(!no_schedule));
    write_text_file(detail::join_path(out_dir, "train_log.csv"),
                    format_training_log(result.log));
    write_text_file(detail::join_path(out_dir, "config.txt"), dump_run_config(cfg));
    write_params_snapshot(detail::join_path(out_dir, "params.bin"), result.params);
    if (result.diverged) {
        out << "train: diverged at step " << result.diverged_step << "; last good step ";
        if (result.diverged_step == 0)
            out << "none";
        else
            out << result.diverged_step - 1;
        out << "\n";
        return 1;
    }
    out << "train: final loss " << format_double(result.final_loss) << ", final hit rate "
        << format_double(result.final_hit_rate) << " (K=" << result.final_k << ")\n";
    return 0;
}

}  // namespace gaze
