// SPDX-License-Identifier: Apache-2.0
//
// Flat `key = value` run configuration with `#` comments. The schema is
// closed: unknown or repeated keys are errors, so a typo cannot silently
// fall back to a default.
#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "gaze/cost_model.hpp"
#include "gaze/error.hpp"
#include "gaze/io.hpp"
#include "gaze/layout.hpp"
#include "gaze/routing.hpp"
#include "gaze/trainer.hpp"

namespace gaze {

enum class Precision { single_, double_ };

inline std::size_t precision_bytes(Precision p) { return p == Precision::single_ ? 4 : 8; }

enum class Residency { persistent, reset_per_step };

struct RunConfig {
    // scene geometry
    std::size_t frames = 1;
    std::size_t height = 24;
    std::size_t width = 24;
    std::size_t dim = 32;
    std::size_t layers = 1;
    std::size_t heads = 1;
    std::size_t text_len = 0;
    // routing
    std::size_t block_t = 1;
    std::size_t block_h = 6;
    std::size_t block_w = 6;
    std::size_t top_k = 2;
    std::size_t context_tokens = 2;
    double final_ratio = 0.1;
    double decay_end_fraction = 0.6;
    // run
    std::uint64_t seed = 7;
    std::size_t steps = 2000;
    double noise = 0.1;
    Precision precision = Precision::single_;
    Residency residency = Residency::persistent;
    // training
    std::size_t batch = 16;
    double lr = 100.0;
    std::size_t eval_every = 100;
    std::size_t holdout_tasks = 500;
    // visualization
    std::size_t heatmap_layer = 0;
    std::size_t heatmap_head = 0;

    BlockExtents block() const { return {block_t, block_h, block_w}; }

    SceneLayout scene_layout() const { return {text_len, frames, height, width, context_tokens}; }

    TaskDims task_dims() const {
        return {frames, height, width, block(), dim, dim, context_tokens};
    }

    ModelGeometry geometry() const {
        ModelGeometry geom;
        geom.layers = layers;
        geom.heads = heads;
        geom.dim = dim;
        geom.precision_bytes = precision_bytes(precision);
        geom.text_len = text_len;
        geom.units = frames;
        geom.tokens_per_unit = height * width;
        geom.region_tokens = block_t * block_h * block_w;
        geom.region_count = gaze::region_count(TokenVolume{frames, height, width, 0}, block());
        geom.top_k = top_k;
        geom.context_tokens = context_tokens;
        return geom;
    }

    ScheduleParams schedule() const { return {final_ratio, decay_end_fraction}; }

    TrainOptions train_options(bool use_schedule) const {
        TrainOptions opt;
        opt.steps = steps;
        opt.batch = batch;
        opt.lr = lr;
        opt.eval_every = eval_every;
        opt.holdout_tasks = holdout_tasks;
        opt.noise = noise;
        opt.seed = seed;
        opt.use_schedule = use_schedule;
        opt.schedule = schedule();
        return opt;
    }

    void validate() const {
        if (frames < 1 || height < 1 || width < 1 || dim < 1 || layers < 1 || heads < 1)
            throw ConfigError("config: frames/height/width/dim/layers/heads must be >= 1");
        if (block_t < 1 || block_h < 1 || block_w < 1)
            throw ConfigError("config: block extents must be >= 1");
        if (top_k < 1) throw ConfigError("config: top_k must be >= 1");
        if (!(final_ratio > 0.0 && final_ratio <= 1.0))
            throw ConfigError("config: final_ratio must be in (0, 1]");
        if (!(decay_end_fraction > 0.0 && decay_end_fraction <= 1.0))
            throw ConfigError("config: decay_end_fraction must be in (0, 1]");
        if (noise < 0.0) throw ConfigError("config: noise must be >= 0");
        if (batch < 1) throw ConfigError("config: batch must be >= 1");
        if (lr < 0.0) throw ConfigError("config: lr must be >= 0");
        if (eval_every < 1) throw ConfigError("config: eval_every must be >= 1");
        if (holdout_tasks < 1) throw ConfigError("config: holdout_tasks must be >= 1");
        if (heatmap_layer >= layers) throw ConfigError("config: heatmap_layer out of range");
        if (heatmap_head >= heads) throw ConfigError("config: heatmap_head out of range");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) ++begin;
    while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return s.substr(begin, end - begin);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    std::uint64_t parsed = 0;
    try {
        parsed = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" +
                          value + "'");
    }
    if (used != value.size() || value[0] == '-')
        throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + value +
                          "'");
    return parsed;
}

inline double parse_f64(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    return parsed;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key or value");
        if (entries.count(key))
            throw ConfigError("config: key '" + key + "' appears more than once");
        entries[key] = value;
    }

    RunConfig cfg;
    auto take = [&entries](const char* key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::string();
        std::string value = it->second;
        entries.erase(it);
        return value;
    };
    auto set_size = [&take](const char* key, std::size_t& field) {
        const std::string value = take(key);
        if (!value.empty()) field = static_cast<std::size_t>(detail::parse_u64(key, value));
    };
    auto set_f64 = [&take](const char* key, double& field) {
        const std::string value = take(key);
        if (!value.empty()) field = detail::parse_f64(key, value);
    };

    set_size("frames", cfg.frames);
    set_size("height", cfg.height);
    set_size("width", cfg.width);
    set_size("dim", cfg.dim);
    set_size("layers", cfg.layers);
    set_size("heads", cfg.heads);
    set_size("text_len", cfg.text_len);
    set_size("block_t", cfg.block_t);
    set_size("block_h", cfg.block_h);
    set_size("block_w", cfg.block_w);
    set_size("top_k", cfg.top_k);
    set_size("context_tokens", cfg.context_tokens);
    set_f64("final_ratio", cfg.final_ratio);
    set_f64("decay_end_fraction", cfg.decay_end_fraction);
    {
        const std::string value = take("seed");
        if (!value.empty()) cfg.seed = detail::parse_u64("seed", value);
    }
    set_size("steps", cfg.steps);
    set_f64("noise", cfg.noise);
    {
        const std::string value = take("precision");
        if (!value.empty()) {
            if (value == "single")
                cfg.precision = Precision::single_;
            else if (value == "double")
                cfg.precision = Precision::double_;
            else
                throw ConfigError("config: precision must be 'single' or 'double', got '" +
                                  value + "'");
        }
    }
    {
        const std::string value = take("residency");
        if (!value.empty()) {
            if (value == "persistent")
                cfg.residency = Residency::persistent;
            else if (value == "reset_per_step")
                cfg.residency = Residency::reset_per_step;
            else
                throw ConfigError(
                    "config: residency must be 'persistent' or 'reset_per_step', got '" + value +
                    "'");
        }
    }
    set_size("batch", cfg.batch);
    set_f64("lr", cfg.lr);
    set_size("eval_every", cfg.eval_every);
    set_size("holdout_tasks", cfg.holdout_tasks);
    set_size("heatmap_layer", cfg.heatmap_layer);
    set_size("heatmap_head", cfg.heatmap_head);

    if (!entries.empty())
        throw ConfigError("config: unknown key '" + entries.begin()->first + "'");
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_text_file(path));
}

// Canonical dump; parsing it back reproduces the same configuration.
inline std::string dump_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "frames = " << cfg.frames << "\n";
    out << "height = " << cfg.height << "\n";
    out << "width = " << cfg.width << "\n";
    out << "dim = " << cfg.dim << "\n";
    out << "layers = " << cfg.layers << "\n";
    out << "heads = " << cfg.heads << "\n";
    out << "text_len = " << cfg.text_len << "\n";
    out << "block_t = " << cfg.block_t << "\n";
    out << "block_h = " << cfg.block_h << "\n";
    out << "block_w = " << cfg.block_w << "\n";
    out << "top_k = " << cfg.top_k << "\n";
    out << "context_tokens = " << cfg.context_tokens << "\n";
    out << "final_ratio = " << format_double(cfg.final_ratio) << "\n";
    out << "decay_end_fraction = " << format_double(cfg.decay_end_fraction) << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "steps = " << cfg.steps << "\n";
    out << "noise = " << format_double(cfg.noise) << "\n";
    out << "precision = " << (cfg.precision == Precision::single_ ? "single" : "double") << "\n";
    out << "residency = "
        << (cfg.residency == Residency::persistent ? "persistent" : "reset_per_step") << "\n";
    out << "batch = " << cfg.batch << "\n";
    out << "lr = " << format_double(cfg.lr) << "\n";
    out << "eval_every = " << cfg.eval_every << "\n";
    out << "holdout_tasks = " << cfg.holdout_tasks << "\n";
    out << "heatmap_layer = " << cfg.heatmap_layer << "\n";
    out << "heatmap_head = " << cfg.heatmap_head << "\n";
    return out.str();
}

}  // namespace gaze
