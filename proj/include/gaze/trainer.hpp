// SPDX-License-Identifier: Apache-2.0
//
// Single-attention-layer toy model trained on a synthetic needle-in-region
// retrieval task. The needle region carries a shared signal vector; the
// query is a noisy copy of that signal; the target is the mean of the
// needle region's feature rows. Routing is never supervised directly: the
// only training signal is the prediction loss, and the TopK selection is
// held fixed inside each backward pass.
//
// The target lives in feature space, so the toy model ties the feature
// dimension to the key dimension (feature_dim == dim).
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gaze/attention.hpp"
#include "gaze/error.hpp"
#include "gaze/io.hpp"
#include "gaze/kv_store.hpp"
#include "gaze/layout.hpp"
#include "gaze/numerics.hpp"
#include "gaze/routing.hpp"

namespace gaze {

struct TaskDims {
    std::size_t frames = 1;  // one unit per frame
    std::size_t height = 1;
    std::size_t width = 1;
    BlockExtents block{1, 6, 6};
    std::size_t feature_dim = 32;
    std::size_t dim = 32;
    std::size_t context_tokens = 0;

    std::size_t tokens_per_unit() const { return height * width; }
    std::size_t visual_tokens() const { return frames * tokens_per_unit(); }
    std::size_t cache_stride() const { return tokens_per_unit() + context_tokens; }

    SceneLayout layout() const { return {0, frames, height, width, context_tokens}; }

    TokenVolume feature_volume() const { return {frames, height, width, 0}; }

    std::size_t region_count() const { return gaze::region_count(feature_volume(), block); }

    void validate() const {
        if (frames < 1 || height < 1 || width < 1 || feature_dim < 1 || dim < 1)
            throw DimensionError("TaskDims: all dims must be >= 1");
        if (feature_dim != dim)
            throw DimensionError("TaskDims: feature_dim must equal dim (target is a feature row)");
        if (block.t < 1 || block.h < 1 || block.w < 1)
            throw DimensionError("TaskDims: block extents must be >= 1");
    }
};

struct NeedleTask {
    Mat<double> features;  // visual_tokens x feature_dim, volume-flat row order
    std::size_t needle_region = 0;
    Vec query_feature;
    Vec target;  // mean of the needle region's feature rows
    double signal_scale = 1.0;
    double noise = 0.0;
};

// Draw order is fixed: signal direction, needle id, features region by
// region, then the query. Every row draws feature_dim normals regardless
// of whether it is a needle row, so the stream advances identically for
// every needle placement.
inline NeedleTask generate_task(SeededStream& stream, const TaskDims& dims, double noise,
                                double signal_scale = 1.0) {
    dims.validate();
    if (noise < 0.0) throw DimensionError("generate_task: noise must be >= 0");
    const std::vector<Region> regions =
        tile_regions(dims.feature_volume(), dims.block.t, dims.block.h, dims.block.w);

    Vec signal = stream.normal_vec(dims.feature_dim);
    const double norm = std::sqrt(dot(signal, signal));
    if (!(norm > 0.0)) throw NumericError("generate_task: degenerate signal draw");
    for (double& s : signal) s *= signal_scale / norm;

    NeedleTask task;
    task.noise = noise;
    task.signal_scale = signal_scale;
    task.needle_region = static_cast<std::size_t>(stream.below(regions.size()));
    task.features = Mat<double>(dims.visual_tokens(), dims.feature_dim);
    for (std::size_t g = 0; g < regions.size(); ++g)
        for (std::size_t index : regions[g].token_indices) {
            auto row = task.features.row(index);
            for (std::size_t j = 0; j < dims.feature_dim; ++j) {
                row[j] = noise * stream.normal();
                if (g == task.needle_region) row[j] += signal[j];
            }
        }
    task.query_feature = signal;
    for (std::size_t j = 0; j < dims.feature_dim; ++j)
        task.query_feature[j] += noise * stream.normal();

    const Region& needle = regions[task.needle_region];
    task.target.assign(dims.feature_dim, 0.0);
    for (std::size_t index : needle.token_indices) {
        const auto row = task.features.row(index);
        for (std::size_t j = 0; j < dims.feature_dim; ++j) task.target[j] += row[j];
    }
    const double inv = 1.0 / static_cast<double>(needle.token_indices.size());
    for (double& t : task.target) t *= inv;
    return task;
}

struct ToyParams {
    Mat<double> w_q;
    Mat<double> w_k;
    Mat<double> w_v;
    std::vector<Mat<double>> context_embeddings;  // per unit: context_tokens x feature_dim

    Projections projections() const { return {w_q, w_k, w_v}; }

    bool all_finite() const {
        if (!w_q.all_finite() || !w_k.all_finite() || !w_v.all_finite()) return false;
        for (const Mat<double>& c : context_embeddings)
            if (!c.all_finite()) return false;
        return true;
    }
};

inline ToyParams init_params(SeededStream& stream, const TaskDims& dims, double scale = 0.0) {
    dims.validate();
    if (scale <= 0.0) scale = 1.0 / std::sqrt(static_cast<double>(dims.feature_dim));
    ToyParams params;
    params.w_q = stream.normal_mat(dims.feature_dim, dims.dim, scale);
    params.w_k = stream.normal_mat(dims.feature_dim, dims.dim, scale);
    params.w_v = stream.normal_mat(dims.feature_dim, dims.dim, scale);
    for (std::size_t u = 0; u < dims.frames; ++u)
        params.context_embeddings.push_back(
            stream.normal_mat(dims.context_tokens, dims.feature_dim, scale));
    return params;
}

struct ParamGrads {
    Mat<double> w_q;
    Mat<double> w_k;
    Mat<double> w_v;
    std::vector<Mat<double>> context_embeddings;
};

inline ParamGrads zero_grads(const ToyParams& params) {
    ParamGrads grads;
    grads.w_q = Mat<double>(params.w_q.rows(), params.w_q.cols());
    grads.w_k = Mat<double>(params.w_k.rows(), params.w_k.cols());
    grads.w_v = Mat<double>(params.w_v.rows(), params.w_v.cols());
    for (const Mat<double>& c : params.context_embeddings)
        grads.context_embeddings.emplace_back(c.rows(), c.cols());
    return grads;
}

inline void accumulate(ParamGrads& into, const ParamGrads& grads) {
    auto add = [](Mat<double>& a, const Mat<double>& b) {
        for (std::size_t i = 0; i < a.flat().size(); ++i) a.flat()[i] += b.flat()[i];
    };
    add(into.w_q, grads.w_q);
    add(into.w_k, grads.w_k);
    add(into.w_v, grads.w_v);
    for (std::size_t u = 0; u < into.context_embeddings.size(); ++u)
        add(into.context_embeddings[u], grads.context_embeddings[u]);
}

// params += alpha * grads
inline void axpy_params(ToyParams& params, const ParamGrads& grads, double alpha) {
    auto add = [alpha](Mat<double>& a, const Mat<double>& b) {
        for (std::size_t i = 0; i < a.flat().size(); ++i) a.flat()[i] += alpha * b.flat()[i];
    };
    add(params.w_q, grads.w_q);
    add(params.w_k, grads.w_k);
    add(params.w_v, grads.w_v);
    for (std::size_t u = 0; u < params.context_embeddings.size(); ++u)
        add(params.context_embeddings[u], grads.context_embeddings[u]);
}

// Everything one task's forward produced, kept for the backward pass.
struct TaskForward {
    LayerHeadCache<double> cache;
    RegionTable<double> table;
    std::vector<ContextTrace> traces;
    Vec query;
    Selection selection;
    AttentionOutput attention;
    double loss = 0.0;
};

namespace detail {

inline std::vector<Mat<double>> split_units(const Mat<double>& features, const TaskDims& dims) {
    std::vector<Mat<double>> units;
    const std::size_t per_unit = dims.tokens_per_unit();
    for (std::size_t u = 0; u < dims.frames; ++u) {
        Mat<double> unit(per_unit, dims.feature_dim);
        for (std::size_t r = 0; r < per_unit; ++r) {
            const auto src = features.row(u * per_unit + r);
            auto dst = unit.row(r);
            for (std::size_t j = 0; j < dims.feature_dim; ++j) dst[j] = src[j];
        }
        units.push_back(std::move(unit));
    }
    return units;
}

struct ForwardCore {
    LayerHeadCache<double> cache;
    RegionTable<double> table;
    std::vector<ContextTrace> traces;
    Vec query;
};

inline ForwardCore forward_core(const ToyParams& params, const NeedleTask& task,
                                const TaskDims& dims) {
    dims.validate();
    if (task.features.rows() != dims.visual_tokens() ||
        task.features.cols() != dims.feature_dim)
        throw DimensionError("forward_core: task features do not match dims");
    LayerHeadCache<double> cache(0, 0, dims.dim);
    const Projections proj = params.projections();
    std::vector<ContextTrace> traces = prefill_with_context(
        cache, split_units(task.features, dims), params.context_embeddings, proj);
    RegionTable<double> table(dims.layout().cache_regions(dims.block), dims.dim);
    table.refresh(cache);
    Vec query = project(task.query_feature, params.w_q);
    return {std::move(cache), std::move(table), std::move(traces), std::move(query)};
}

inline TaskForward finish_forward(ForwardCore core, const NeedleTask& task,
                                  Selection selection) {
    AttentionOutput attention =
        gaze_attention(core.query, core.cache, core.table, selection);
    const double loss = mean_squared_error(attention.output, task.target);
    return {std::move(core.cache), std::move(core.table), std::move(core.traces),
            std::move(core.query), std::move(selection), std::move(attention), loss};
}

}  // namespace detail

// Full forward: route fresh for this query, attend, measure the loss.
inline TaskForward forward_task(const ToyParams& params, const NeedleTask& task,
                                const TaskDims& dims, std::size_t k) {
    detail::ForwardCore core = detail::forward_core(params, task, dims);
    Selection selection = route(core.query, core.table, k);
    return detail::finish_forward(std::move(core), task, std::move(selection));
}

// Forward under a caller-supplied frozen selection (finite-difference probes
// must not re-route, or the TopK kink contaminates the derivative).
inline TaskForward forward_task_with_selection(const ToyParams& params, const NeedleTask& task,
                                               const TaskDims& dims, const Selection& selection) {
    detail::ForwardCore core = detail::forward_core(params, task, dims);
    return detail::finish_forward(std::move(core), task, selection);
}

inline double task_loss_with_selection(const ToyParams& params, const NeedleTask& task,
                                       const TaskDims& dims, const Selection& selection) {
    return forward_task_with_selection(params, task, dims, selection).loss;
}

// Analytic gradients of the task loss at the forward's frozen selection.
// Gradient flows through the attention output into W_q/W_k/W_v and the
// context embeddings; context values chain back through earlier context
// tokens of the same unit (processed in reverse appending order). Nothing
// flows through the routing scores.
inline ParamGrads backward_task(const ToyParams& params, const NeedleTask& task,
                                const TaskDims& dims, const TaskForward& fwd) {
    const std::size_t d = dims.dim;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    ParamGrads grads = zero_grads(params);

    Vec g_out(d);
    for (std::size_t j = 0; j < d; ++j)
        g_out[j] = 2.0 * (fwd.attention.output[j] - task.target[j]) / static_cast<double>(d);

    const GazeAttentionGrads attn =
        gaze_attention_backward(std::span<const double>(fwd.query), fwd.cache, fwd.table,
                                fwd.selection, std::span<const double>(g_out));

    add_outer(grads.w_q, task.query_feature, attn.grads.d_query);

    // Per-unit upstream gradients for the context outputs (their cached
    // value rows), filled by the attended-row sweep below.
    std::vector<Mat<double>> d_ctx_out;
    for (std::size_t u = 0; u < dims.frames; ++u)
        d_ctx_out.emplace_back(dims.context_tokens, d);

    const std::size_t stride = dims.cache_stride();
    const std::size_t per_unit = dims.tokens_per_unit();
    for (std::size_t i = 0; i < attn.set.indices.size(); ++i) {
        const std::size_t position = attn.set.indices[i];
        const auto dk = attn.grads.d_keys.row(i);
        const auto dv = attn.grads.d_values.row(i);
        const std::size_t unit = position / stride;
        const std::size_t offset = position % stride;
        if (fwd.cache.segment(position) == Segment::visual) {
            const auto x = task.features.row(unit * per_unit + offset);
            add_outer(grads.w_k, x, dk);
            add_outer(grads.w_v, x, dv);
        } else {
            const std::size_t slot = offset - per_unit;
            const auto c = params.context_embeddings[unit].row(slot);
            add_outer(grads.w_k, c, dk);
            add_backproject(grads.context_embeddings[unit].row(slot), dk, params.w_k);
            auto out_grad = d_ctx_out[unit].row(slot);
            for (std::size_t j = 0; j < d; ++j) out_grad[j] += dv[j];
        }
    }

    // Context prefill chain, latest token first. For the sums over a unit's
    // visual rows the per-row outer products collapse to rank-one updates:
    // sum_i w_i (x_i g^T) = (sum_i w_i x_i) g^T.
    for (auto it = fwd.traces.rbegin(); it != fwd.traces.rend(); ++it) {
        const ContextTrace& trace = *it;
        const std::size_t unit = trace.unit;
        const auto g_o = d_ctx_out[unit].row(trace.slot);
        const auto c = params.context_embeddings[unit].row(trace.slot);
        const Vec q_ctx = project(c, params.w_q);
        const Vec v_own = project(c, params.w_v);

        const std::size_t n_att = trace.attended.size();  // self last
        Vec value_dots(n_att);
        double weighted = 0.0;
        for (std::size_t i = 0; i + 1 < n_att; ++i) {
            value_dots[i] = dot_mixed<double>(g_o, fwd.cache.value_row(trace.attended[i]));
            weighted += trace.weights[i] * value_dots[i];
        }
        value_dots[n_att - 1] = dot(g_o, v_own);
        weighted += trace.weights[n_att - 1] * value_dots[n_att - 1];

        Vec dq_ctx(d, 0.0);
        Vec score_feature(dims.feature_dim, 0.0);   // sum_i ds_i x_i over visual rows
        Vec weighted_feature(dims.feature_dim, 0.0);  // sum_i w_i x_i over visual rows
        for (std::size_t i = 0; i < n_att; ++i) {
            const double ds = trace.weights[i] * (value_dots[i] - weighted) * inv_sqrt_d;
            const std::size_t position = trace.attended[i];
            const auto key = fwd.cache.key_row(position);
            for (std::size_t j = 0; j < d; ++j) dq_ctx[j] += ds * key[j];
            const bool self = i + 1 == n_att;
            if (!self && fwd.cache.segment(position) == Segment::visual) {
                const std::size_t offset = position % stride;
                const auto x = task.features.row(unit * per_unit + offset);
                for (std::size_t j = 0; j < dims.feature_dim; ++j) {
                    score_feature[j] += ds * x[j];
                    weighted_feature[j] += trace.weights[i] * x[j];
                }
            } else {
                // context row: earlier token of this unit, or the token itself
                const std::size_t slot =
                    self ? trace.slot : (position % stride) - per_unit;
                const auto c_row = params.context_embeddings[unit].row(slot);
                Vec dk(d);
                for (std::size_t j = 0; j < d; ++j) dk[j] = ds * q_ctx[j];
                add_outer(grads.w_k, c_row, dk);
                add_backproject(grads.context_embeddings[unit].row(slot), dk, params.w_k);
                Vec dv(d);
                for (std::size_t j = 0; j < d; ++j) dv[j] = trace.weights[i] * g_o[j];
                if (self) {
                    add_outer(grads.w_v, c_row, dv);
                    add_backproject(grads.context_embeddings[unit].row(slot), dv, params.w_v);
                } else {
                    auto out_grad = d_ctx_out[unit].row(slot);
                    for (std::size_t j = 0; j < d; ++j) out_grad[j] += dv[j];
                }
            }
        }
        add_outer(grads.w_k, score_feature, q_ctx);  // ds already carries 1/sqrt(d)
        add_outer(grads.w_v, weighted_feature, g_o);
        add_outer(grads.w_q, c, dq_ctx);
        add_backproject(grads.context_embeddings[unit].row(trace.slot), dq_ctx, params.w_q);
    }
    return grads;
}

struct StepStats {
    double ratio = 1.0;
    std::size_t k = 1;
    double loss = 0.0;
};

// One gradient-descent step over a batch. K comes from the progressive
// schedule (or stays at final_ratio when the schedule is disabled); each
// task routes fresh, and its selection is frozen for its backward.
inline StepStats train_step(ToyParams& params, std::span<const NeedleTask> batch, double lr,
                            std::size_t step, std::size_t total_steps, const TaskDims& dims,
                            const ScheduleParams& schedule, bool use_schedule = true) {
    if (batch.empty()) throw DimensionError("train_step: empty batch");
    if (lr < 0.0) throw DimensionError("train_step: lr must be >= 0");
    StepStats stats;
    stats.ratio = use_schedule ? schedule_ratio(step, total_steps, schedule)
                               : schedule.final_ratio;
    stats.k = ratio_to_k(stats.ratio, dims.region_count());

    ParamGrads total = zero_grads(params);
    double loss_sum = 0.0;
    for (const NeedleTask& task : batch) {
        const TaskForward fwd = forward_task(params, task, dims, stats.k);
        loss_sum += fwd.loss;
        accumulate(total, backward_task(params, task, dims, fwd));
    }
    stats.loss = loss_sum / static_cast<double>(batch.size());
    if (!std::isfinite(stats.loss)) throw NumericError("train_step: non-finite loss");
    axpy_params(params, total, -lr / static_cast<double>(batch.size()));
    if (!params.all_finite()) throw NumericError("train_step: non-finite parameters");
    return stats;
}

// Fraction of tasks whose TopK selection contains the needle region.
inline double routing_hit_rate(const ToyParams& params, std::span<const NeedleTask> tasks,
                               const TaskDims& dims, std::size_t k) {
    if (tasks.empty()) throw DimensionError("routing_hit_rate: empty task set");
    std::size_t hits = 0;
    for (const NeedleTask& task : tasks) {
        const detail::ForwardCore core = detail::forward_core(params, task, dims);
        const Selection selection = route(core.query, core.table, k);
        if (selection.contains(task.needle_region)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(tasks.size());
}

inline double mean_task_loss(const ToyParams& params, std::span<const NeedleTask> tasks,
                             const TaskDims& dims, std::size_t k) {
    if (tasks.empty()) throw DimensionError("mean_task_loss: empty task set");
    double sum = 0.0;
    for (const NeedleTask& task : tasks) sum += forward_task(params, task, dims, k).loss;
    return sum / static_cast<double>(tasks.size());
}

struct TrainOptions {
    std::size_t steps = 2000;
    std::size_t batch = 16;
    double lr = 100.0;
    std::size_t eval_every = 100;
    std::size_t holdout_tasks = 500;
    double noise = 0.1;
    std::uint64_t seed = 7;
    bool use_schedule = true;
    ScheduleParams schedule;
};

struct LogRow {
    std::size_t step = 0;
    double ratio = 1.0;
    std::size_t k = 1;
    double loss = 0.0;
    std::optional<double> hit_rate;  // evaluated every eval_every steps and at the end
};

struct TrainResult {
    ToyParams params;
    std::vector<LogRow> log;
    double step0_loss = 0.0;
    double final_loss = 0.0;
    double final_hit_rate = 0.0;
    std::size_t final_k = 1;
    bool diverged = false;
    std::size_t diverged_step = 0;  // meaningful only when diverged
};

// Deterministic training run. Parameters and batches come from a stream
// seeded with opt.seed; the held-out evaluation set comes from a stream
// seeded with opt.seed + 1 and is generated once up front.
inline TrainResult run_training(const TaskDims& dims, const TrainOptions& opt) {
    dims.validate();
    if (opt.batch < 1) throw DimensionError("run_training: batch must be >= 1");
    if (opt.eval_every < 1) throw DimensionError("run_training: eval_every must be >= 1");
    if (opt.holdout_tasks < 1) throw DimensionError("run_training: holdout_tasks must be >= 1");
    SeededStream train_stream(opt.seed);
    SeededStream holdout_stream(opt.seed + 1);

    TrainResult result;
    result.params = init_params(train_stream, dims);
    std::vector<NeedleTask> holdout;
    holdout.reserve(opt.holdout_tasks);
    for (std::size_t i = 0; i < opt.holdout_tasks; ++i)
        holdout.push_back(generate_task(holdout_stream, dims, opt.noise));

    result.final_k = ratio_to_k(opt.schedule.final_ratio, dims.region_count());

    if (opt.steps == 0) {
        result.final_hit_rate = routing_hit_rate(result.params, holdout, dims, result.final_k);
        result.step0_loss = result.final_loss =
            mean_task_loss(result.params, holdout, dims, result.final_k);
        return result;
    }

    std::vector<NeedleTask> batch;
    for (std::size_t step = 0; step < opt.steps; ++step) {
        batch.clear();
        for (std::size_t b = 0; b < opt.batch; ++b)
            batch.push_back(generate_task(train_stream, dims, opt.noise));
        StepStats stats;
        try {
            stats = train_step(result.params, batch, opt.lr, step, opt.steps, dims,
                               opt.schedule, opt.use_schedule);
        } catch (const NumericError&) {
            result.diverged = true;
            result.diverged_step = step;
            return result;
        }
        LogRow row{step, stats.ratio, stats.k, stats.loss, std::nullopt};
        const bool last = step + 1 == opt.steps;
        if (step % opt.eval_every == 0 || last)
            row.hit_rate = routing_hit_rate(result.params, holdout, dims, result.final_k);
        if (step == 0) result.step0_loss = stats.loss;
        if (last) {
            result.final_loss = stats.loss;
            result.final_hit_rate = *row.hit_rate;
        }
        result.log.push_back(row);
    }
    return result;
}

inline std::string format_training_log(const std::vector<LogRow>& log) {
    std::ostringstream out;
    out << "step,ratio,K,loss,hit_rate\n";
    for (const LogRow& row : log) {
        out << row.step << "," << format_double(row.ratio) << "," << row.k << ","
            << format_double(row.loss) << ",";
        if (row.hit_rate) out << format_double(*row.hit_rate);
        out << "\n";
    }
    return out.str();
}

// Parameter snapshot, little-endian: magic "GZTP", version, dims, then
// W_q, W_k, W_v and the per-unit context embeddings, all row-major f64.
inline void write_params_snapshot(const std::string& path, const ToyParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_params_snapshot: cannot open " + path);
    out.write("GZTP", 4);
    write_u32_le(out, 1);
    write_u32_le(out, static_cast<std::uint32_t>(params.w_q.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(params.w_q.cols()));
    write_u32_le(out, static_cast<std::uint32_t>(params.context_embeddings.size()));
    const std::uint32_t ctx_rows = params.context_embeddings.empty()
                                       ? 0
                                       : static_cast<std::uint32_t>(
                                             params.context_embeddings.front().rows());
    write_u32_le(out, ctx_rows);
    auto write_mat = [&out](const Mat<double>& m) {
        for (double v : m.flat()) write_f64_le(out, v);
    };
    write_mat(params.w_q);
    write_mat(params.w_k);
    write_mat(params.w_v);
    for (const Mat<double>& c : params.context_embeddings) write_mat(c);
    if (!out) throw IoError("write_params_snapshot: write failed for " + path);
}

inline ToyParams read_params_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_params_snapshot: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "GZTP")
        throw IoError("read_params_snapshot: bad magic in " + path);
    if (read_u32_le(in) != 1) throw IoError("read_params_snapshot: unsupported version");
    const std::uint32_t d_in = read_u32_le(in);
    const std::uint32_t d = read_u32_le(in);
    const std::uint32_t units = read_u32_le(in);
    const std::uint32_t ctx_rows = read_u32_le(in);
    auto read_mat = [&in](std::size_t rows, std::size_t cols) {
        Mat<double> m(rows, cols);
        for (double& v : m.flat()) v = read_f64_le(in);
        return m;
    };
    ToyParams params;
    params.w_q = read_mat(d_in, d);
    params.w_k = read_mat(d_in, d);
    params.w_v = read_mat(d_in, d);
    for (std::uint32_t u = 0; u < units; ++u)
        params.context_embeddings.push_back(read_mat(ctx_rows, d_in));
    if (!in) throw IoError("read_params_snapshot: truncated file " + path);
    return params;
}

}  // namespace gaze
