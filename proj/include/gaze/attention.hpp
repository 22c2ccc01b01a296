// SPDX-License-Identifier: Apache-2.0
//
// Attention forward and backward. Dense attention over an explicit index
// list is the oracle; gaze attention restricts it to the assembled key set
// (all text rows, all context rows, the selected regions' visual rows).
// The backward pass holds the selection fixed: rows outside the gaze set
// receive exactly zero gradient.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gaze/error.hpp"
#include "gaze/kv_store.hpp"
#include "gaze/numerics.hpp"
#include "gaze/routing.hpp"

namespace gaze {

template <class T>
inline double dot_mixed(std::span<const double> a, std::span<const T> b) {
    if (a.size() != b.size()) throw DimensionError("dot_mixed: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * static_cast<double>(b[i]);
    return acc;
}

// Output vector plus the attention weights aligned with the attended index
// list (kept for visualization and tests).
struct AttentionOutput {
    Vec output;
    Vec weights;
};

// Ordered index list attended by one gaze query: every text position, then
// every context position (both in cache order), then the selected regions'
// visual positions in region-id order.
struct GazeKeySet {
    std::vector<std::size_t> indices;
    std::size_t text_count = 0;
    std::size_t context_count = 0;
    std::size_t visual_count = 0;
};

// Softmax(q K^T / sqrt(d)) V over the attended rows.
template <class T>
inline AttentionOutput dense_attention(std::span<const double> query,
                                       const LayerHeadCache<T>& cache,
                                       std::span<const std::size_t> attended) {
    if (attended.empty()) throw ContractError("dense_attention: empty attended list");
    if (query.size() != cache.dim())
        throw DimensionError("dense_attention: query dimension mismatch");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cache.dim()));
    Vec scores(attended.size());
    for (std::size_t i = 0; i < attended.size(); ++i)
        scores[i] = dot_mixed(query, cache.key_row(attended[i])) * inv_sqrt_d;
    AttentionOutput result;
    result.weights = softmax_stable(scores);
    result.output.assign(cache.dim(), 0.0);
    for (std::size_t i = 0; i < attended.size(); ++i) {
        const double w = result.weights[i];
        const auto value = cache.value_row(attended[i]);
        for (std::size_t j = 0; j < cache.dim(); ++j)
            result.output[j] += w * static_cast<double>(value[j]);
    }
    return result;
}

template <class T>
inline std::vector<std::size_t> all_positions(const LayerHeadCache<T>& cache) {
    std::vector<std::size_t> indices(cache.size());
    for (std::size_t i = 0; i < cache.size(); ++i) indices[i] = i;
    return indices;
}

template <class T>
inline GazeKeySet assemble_gaze_set(const LayerHeadCache<T>& cache, const Selection& selection,
                                    const RegionTable<T>& table) {
    GazeKeySet set;
    for (std::size_t i = 0; i < cache.size(); ++i)
        if (cache.segment(i) == Segment::text) {
            set.indices.push_back(i);
            ++set.text_count;
        }
    for (std::size_t i = 0; i < cache.size(); ++i)
        if (cache.segment(i) == Segment::context) {
            set.indices.push_back(i);
            ++set.context_count;
        }
    for (std::size_t id : selection.region_ids) {
        if (id >= table.size())
            throw IndexError("assemble_gaze_set: selection references unknown region " +
                             std::to_string(id));
        for (std::size_t index : table.region(id).token_indices) {
            set.indices.push_back(index);
            ++set.visual_count;
        }
    }
    return set;
}

template <class T>
inline AttentionOutput gaze_attention(std::span<const double> query,
                                      const LayerHeadCache<T>& cache,
                                      const RegionTable<T>& table, const Selection& selection) {
    const GazeKeySet set = assemble_gaze_set(cache, selection, table);
    return dense_attention(query, cache, std::span<const std::size_t>(set.indices));
}

template <class T>
struct RoutedAttention {
    Selection selection;
    AttentionOutput attention;
};

// Route fresh (scores + TopK) for this query, then attend the gaze set.
template <class T>
inline RoutedAttention<T> gaze_attention_routed(std::span<const double> query,
                                                const LayerHeadCache<T>& cache,
                                                const RegionTable<T>& table, std::size_t k) {
    RoutedAttention<T> out;
    out.selection = route(query, table, k);
    out.attention = gaze_attention(query, cache, table, out.selection);
    return out;
}

// Gradients aligned with an attended index list: row i of d_keys/d_values
// belongs to cache position attended[i].
struct AttentionGrads {
    Vec d_query;
    Mat<double> d_keys;
    Mat<double> d_values;
};

// Analytic backward of dense_attention at fixed attended set.
template <class T>
inline AttentionGrads attention_backward(std::span<const double> query,
                                         const LayerHeadCache<T>& cache,
                                         std::span<const std::size_t> attended,
                                         std::span<const double> upstream) {
    if (upstream.size() != cache.dim())
        throw DimensionError("attention_backward: upstream dimension mismatch");
    const AttentionOutput forward = dense_attention(query, cache, attended);
    const std::size_t n = attended.size();
    const std::size_t d = cache.dim();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    // a_i = g . v_i ; ds_i = w_i (a_i - sum_j w_j a_j)
    Vec value_dots(n);
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        value_dots[i] = dot_mixed(upstream, cache.value_row(attended[i]));
        weighted += forward.weights[i] * value_dots[i];
    }
    AttentionGrads grads;
    grads.d_query.assign(d, 0.0);
    grads.d_keys = Mat<double>(n, d);
    grads.d_values = Mat<double>(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double ds = forward.weights[i] * (value_dots[i] - weighted) * inv_sqrt_d;
        const auto key = cache.key_row(attended[i]);
        auto dk = grads.d_keys.row(i);
        auto dv = grads.d_values.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            grads.d_query[j] += ds * static_cast<double>(key[j]);
            dk[j] = ds * query[j];
            dv[j] = forward.weights[i] * upstream[j];
        }
    }
    return grads;
}

struct GazeAttentionGrads {
    GazeKeySet set;
    AttentionGrads grads;  // rows aligned with set.indices
};

// Backward of gaze attention with the forward's selection held fixed (the
// TopK itself is treated as non-differentiable; no gradient flows through
// the routing scores). Positions outside the gaze set get zero gradient.
template <class T>
inline GazeAttentionGrads gaze_attention_backward(std::span<const double> query,
                                                  const LayerHeadCache<T>& cache,
                                                  const RegionTable<T>& table,
                                                  const Selection& selection,
                                                  std::span<const double> upstream) {
    if (selection.region_ids.empty() && selection.scores.empty()) {
        // legal: attend text+context only
    } else if (selection.region_ids.size() != selection.scores.size()) {
        throw ContractError("gaze_attention_backward: selection ids/scores out of sync");
    }
    for (std::size_t i = 0; i + 1 < selection.region_ids.size(); ++i)
        if (selection.region_ids[i] >= selection.region_ids[i + 1])
            throw ContractError("gaze_attention_backward: selection ids not strictly ascending");
    GazeAttentionGrads out;
    out.set = assemble_gaze_set(cache, selection, table);
    out.grads = attention_backward(query, cache,
                                   std::span<const std::size_t>(out.set.indices), upstream);
    return out;
}

// Expand per-attended-row gradients to a full N x d matrix, zero elsewhere.
inline Mat<double> scatter_rows(std::size_t cache_size, std::span<const std::size_t> indices,
                                const Mat<double>& rows) {
    Mat<double> full(cache_size, rows.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = rows.row(i);
        auto dst = full.row(indices[i]);
        for (std::size_t j = 0; j < rows.cols(); ++j) dst[j] += src[j];
    }
    return full;
}

// Learnable projections shared by text, visual, and context rows.
struct Projections {
    Mat<double> w_q;
    Mat<double> w_k;
    Mat<double> w_v;

    std::size_t input_dim() const { return w_q.rows(); }
    std::size_t dim() const { return w_q.cols(); }

    void validate() const {
        if (w_k.rows() != w_q.rows() || w_v.rows() != w_q.rows() || w_k.cols() != w_q.cols() ||
            w_v.cols() != w_q.cols())
            throw DimensionError("Projections: w_q/w_k/w_v shapes differ");
    }
};

// Masked attention record for one context token during prefill. attended
// holds the cache positions it saw ({its unit's visual rows} then {its
// unit's earlier context rows} then {itself, last}); weights align with it.
struct ContextTrace {
    std::size_t unit = 0;
    std::size_t slot = 0;
    std::vector<std::size_t> attended;
    Vec weights;
    Vec output;
};

// Project feature rows and append them as text rows.
template <class T>
inline void append_text_rows(LayerHeadCache<T>& cache, const Mat<double>& text_features,
                             const Projections& proj) {
    for (std::size_t r = 0; r < text_features.rows(); ++r) {
        const Vec key = project(text_features.row(r), proj.w_k);
        const Vec value = project(text_features.row(r), proj.w_v);
        std::vector<T> k(key.begin(), key.end());
        std::vector<T> v(value.begin(), value.end());
        cache.append(std::span<const T>(k), std::span<const T>(v), Segment::text);
    }
}

// Prefill one scene into the cache: for each unit, project and append its
// visual rows, then run its context tokens one by one. A context token
// attends only to its own unit's visual rows, the unit's earlier context
// rows, and itself; its stored key is the projected embedding and its
// stored value is that masked attention output, so the cached row carries
// a summary of the unit. Appends only; nothing is overwritten.
template <class T>
inline std::vector<ContextTrace> prefill_with_context(
    LayerHeadCache<T>& cache, const std::vector<Mat<double>>& unit_features,
    const std::vector<Mat<double>>& context_embeddings, const Projections& proj) {
    proj.validate();
    if (context_embeddings.size() != unit_features.size())
        throw DimensionError("prefill_with_context: per-unit embedding count mismatch");
    const std::size_t d = proj.dim();
    if (cache.dim() != d) throw DimensionError("prefill_with_context: cache dimension mismatch");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<ContextTrace> traces;
    for (std::size_t unit = 0; unit < unit_features.size(); ++unit) {
        const Mat<double>& features = unit_features[unit];
        if (features.rows() == 0)
            throw LayoutError("prefill_with_context: unit " + std::to_string(unit) +
                              " has no visual rows");
        std::vector<std::size_t> unit_positions;
        unit_positions.reserve(features.rows());
        for (std::size_t r = 0; r < features.rows(); ++r) {
            const Vec key = project(features.row(r), proj.w_k);
            const Vec value = project(features.row(r), proj.w_v);
            std::vector<T> k(key.begin(), key.end());
            std::vector<T> v(value.begin(), value.end());
            unit_positions.push_back(cache.append(std::span<const T>(k), std::span<const T>(v),
                                                  Segment::visual,
                                                  static_cast<std::int32_t>(unit)));
        }
        std::vector<std::size_t> earlier_context;
        const Mat<double>& embeddings = context_embeddings[unit];
        for (std::size_t slot = 0; slot < embeddings.rows(); ++slot) {
            const auto embedding = embeddings.row(slot);
            const Vec q_ctx = project(embedding, proj.w_q);
            const Vec k_ctx = project(embedding, proj.w_k);
            const Vec v_own = project(embedding, proj.w_v);

            ContextTrace trace;
            trace.unit = unit;
            trace.slot = slot;
            trace.attended = unit_positions;
            trace.attended.insert(trace.attended.end(), earlier_context.begin(),
                                  earlier_context.end());
            // scores over cached rows, then the token itself (not yet cached)
            Vec scores;
            scores.reserve(trace.attended.size() + 1);
            for (std::size_t index : trace.attended)
                scores.push_back(dot_mixed<T>(q_ctx, cache.key_row(index)) * inv_sqrt_d);
            scores.push_back(dot(q_ctx, k_ctx) * inv_sqrt_d);
            trace.weights = softmax_stable(scores);
            trace.output.assign(d, 0.0);
            for (std::size_t i = 0; i < trace.attended.size(); ++i) {
                const auto value = cache.value_row(trace.attended[i]);
                for (std::size_t j = 0; j < d; ++j)
                    trace.output[j] += trace.weights[i] * static_cast<double>(value[j]);
            }
            const double self_weight = trace.weights.back();
            for (std::size_t j = 0; j < d; ++j) trace.output[j] += self_weight * v_own[j];

            std::vector<T> k(k_ctx.begin(), k_ctx.end());
            std::vector<T> v(trace.output.begin(), trace.output.end());
            const std::size_t position = cache.append(std::span<const T>(k),
                                                      std::span<const T>(v), Segment::context,
                                                      static_cast<std::int32_t>(unit));
            earlier_context.push_back(position);
            trace.attended.push_back(position);  // self, last
            traces.push_back(std::move(trace));
        }
    }
    return traces;
}

}  // namespace gaze
