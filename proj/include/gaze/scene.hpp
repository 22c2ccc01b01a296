// SPDX-License-Identifier: Apache-2.0
//
// Synthetic decode scene and the decoding engine behind `decode`. Every
// region carries its own unit signal direction; each decoding step draws a
// target region and a noisy query toward that region's signal, so routing
// has real content to track without any training. Query and key share one
// projection per layer/head (a random map preserves dot products well
// enough for the demo); values use a separate projection.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaze/attention.hpp"
#include "gaze/error.hpp"
#include "gaze/kv_store.hpp"
#include "gaze/layout.hpp"
#include "gaze/numerics.hpp"
#include "gaze/routing.hpp"

namespace gaze {

struct DecodeScene {
    SceneLayout layout;
    BlockExtents block{1, 6, 6};
    std::size_t dim = 32;
    double noise = 0.1;
    Mat<double> signals;        // region_count x dim, unit length each
    Mat<double> features;       // visual_tokens x dim, volume-flat row order
    Mat<double> text_features;  // text_len x dim
    std::vector<Mat<double>> context_embeddings;  // per unit: ctx_per_unit x dim

    std::size_t region_count() const {
        return gaze::region_count(layout.volume(), block);
    }
};

// Draw order: region signals, feature rows region by region, text rows,
// per-unit context embeddings.
inline DecodeScene generate_scene(SeededStream& stream, const SceneLayout& layout,
                                  const BlockExtents& block, std::size_t dim, double noise) {
    if (dim < 1) throw DimensionError("generate_scene: dim must be >= 1");
    if (noise < 0.0) throw DimensionError("generate_scene: noise must be >= 0");
    DecodeScene scene;
    scene.layout = layout;
    scene.block = block;
    scene.dim = dim;
    scene.noise = noise;

    const std::vector<Region> regions =
        tile_regions(layout.volume(), block.t, block.h, block.w);
    scene.signals = Mat<double>(regions.size(), dim);
    for (std::size_t g = 0; g < regions.size(); ++g) {
        Vec signal = stream.normal_vec(dim);
        const double norm = std::sqrt(dot(signal, signal));
        if (!(norm > 0.0)) throw NumericError("generate_scene: degenerate signal draw");
        auto row = scene.signals.row(g);
        for (std::size_t j = 0; j < dim; ++j) row[j] = signal[j] / norm;
    }

    scene.features = Mat<double>(layout.visual_tokens(), dim);
    for (std::size_t g = 0; g < regions.size(); ++g) {
        const auto signal = scene.signals.row(g);
        for (std::size_t index : regions[g].token_indices) {
            auto row = scene.features.row(index);
            for (std::size_t j = 0; j < dim; ++j) row[j] = signal[j] + noise * stream.normal();
        }
    }

    scene.text_features = stream.normal_mat(layout.text_len, dim, noise);
    for (std::size_t u = 0; u < layout.frames; ++u)
        scene.context_embeddings.push_back(stream.normal_mat(layout.ctx_per_unit, dim));
    return scene;
}

struct DecodeQuery {
    std::size_t target_region = 0;
    Vec query_feature;
};

inline DecodeQuery next_query(SeededStream& stream, const DecodeScene& scene) {
    DecodeQuery query;
    query.target_region = static_cast<std::size_t>(stream.below(scene.region_count()));
    const auto signal = scene.signals.row(query.target_region);
    query.query_feature.assign(scene.dim, 0.0);
    for (std::size_t j = 0; j < scene.dim; ++j)
        query.query_feature[j] = signal[j] + scene.noise * stream.normal();
    return query;
}

template <class T>
struct HeadState {
    Projections proj;  // w_q and w_k tied
    LayerHeadCache<T> cache;
    RegionTable<T> table;
    TierState tier;
    std::vector<std::size_t> sizes;  // tokens per region
};

// Draws the head's projections, prefills its cache (text rows, then each
// unit's visual rows and context tokens), and pools the region descriptors.
template <class T>
inline HeadState<T> build_head_state(SeededStream& stream, const DecodeScene& scene,
                                     std::uint32_t layer, std::uint32_t head) {
    const std::size_t d = scene.dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Projections proj;
    proj.w_q = stream.normal_mat(d, d, scale);
    proj.w_k = proj.w_q;
    proj.w_v = stream.normal_mat(d, d, scale);

    LayerHeadCache<T> cache(layer, head, d);
    append_text_rows(cache, scene.text_features, proj);
    std::vector<Mat<double>> units;
    const std::size_t per_unit = scene.layout.tokens_per_unit();
    for (std::size_t u = 0; u < scene.layout.frames; ++u) {
        Mat<double> unit(per_unit, d);
        for (std::size_t r = 0; r < per_unit; ++r) {
            const auto src = scene.features.row(u * per_unit + r);
            auto dst = unit.row(r);
            for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
        }
        units.push_back(std::move(unit));
    }
    prefill_with_context(cache, units, scene.context_embeddings, proj);

    RegionTable<T> table(scene.layout.cache_regions(scene.block), d);
    table.refresh(cache);
    std::vector<std::size_t> sizes = region_sizes(table.regions());
    return {std::move(proj), std::move(cache), std::move(table), TierState(d, sizeof(T)),
            std::move(sizes)};
}

struct TraceRow {
    std::size_t step = 0;
    std::size_t layer = 0;
    std::size_t head = 0;
    std::vector<std::size_t> selected_region_ids;
    double max_score = 0.0;
};

struct TransferRow {
    std::size_t step = 0;
    std::uint64_t new_bytes = 0;
    std::uint64_t newly_loaded = 0;
};

struct DecodeParams {
    std::size_t layers = 1;
    std::size_t heads = 1;
    std::size_t top_k = 2;
    std::size_t steps = 8;
    bool reset_residency_per_step = false;
    std::size_t heatmap_layer = 0;
    std::size_t heatmap_head = 0;
};

struct DecodeResult {
    std::vector<TraceRow> trace;       // step-major, then layer, then head
    std::vector<TransferRow> transfer;  // per step, summed over layers and heads
    // step -> per-cell attention mass on the visual grid (frames*height*width),
    // taken from the configured layer/head; unattended cells stay 0
    std::map<std::size_t, std::vector<double>> heatmaps;
};

// Scatter one query's attention weights onto the visual grid.
inline std::vector<double> heatmap_weights(const DecodeScene& scene, const GazeKeySet& set,
                                           const Vec& weights) {
    const SceneLayout& layout = scene.layout;
    std::vector<double> grid(layout.visual_tokens(), 0.0);
    const std::size_t stride = layout.tokens_per_unit() + layout.ctx_per_unit;
    for (std::size_t i = 0; i < set.indices.size(); ++i) {
        const std::size_t position = set.indices[i];
        if (position < layout.text_len) continue;
        const std::size_t rel = position - layout.text_len;
        const std::size_t offset = rel % stride;
        if (offset >= layout.tokens_per_unit()) continue;  // context row
        grid[(rel / stride) * layout.tokens_per_unit() + offset] = weights[i];
    }
    return grid;
}

template <class T>
inline DecodeResult run_decode(SeededStream& stream, const DecodeScene& scene,
                               const DecodeParams& params,
                               const std::vector<std::size_t>& heatmap_steps) {
    if (params.layers < 1 || params.heads < 1)
        throw DimensionError("run_decode: layers and heads must be >= 1");
    if (params.heatmap_layer >= params.layers || params.heatmap_head >= params.heads)
        throw DimensionError("run_decode: heatmap layer/head out of range");

    std::vector<HeadState<T>> states;
    states.reserve(params.layers * params.heads);
    for (std::size_t l = 0; l < params.layers; ++l)
        for (std::size_t h = 0; h < params.heads; ++h)
            states.push_back(build_head_state<T>(stream, scene, static_cast<std::uint32_t>(l),
                                                 static_cast<std::uint32_t>(h)));

    DecodeResult result;
    for (std::size_t step = 0; step < params.steps; ++step) {
        const DecodeQuery query = next_query(stream, scene);
        TransferRow transfer{step, 0, 0};
        const bool want_heatmap =
            std::find(heatmap_steps.begin(), heatmap_steps.end(), step) != heatmap_steps.end();
        for (std::size_t l = 0; l < params.layers; ++l)
            for (std::size_t h = 0; h < params.heads; ++h) {
                HeadState<T>& state = states[l * params.heads + h];
                if (params.reset_residency_per_step) state.tier.reset_residency();
                const Vec q = project(query.query_feature, state.proj.w_q);
                const Selection selection = route(q, state.table, params.top_k);
                const TierState::LoadStats loaded = state.tier.load_regions(
                    std::span<const std::size_t>(selection.region_ids), state.sizes);
                transfer.new_bytes += loaded.new_bytes;
                transfer.newly_loaded += loaded.newly_loaded;
                const GazeKeySet set = assemble_gaze_set(state.cache, selection, state.table);
                const AttentionOutput attn = dense_attention(
                    std::span<const double>(q), state.cache,
                    std::span<const std::size_t>(set.indices));
                result.trace.push_back(
                    {step, l, h, selection.region_ids, selection.max_score()});
                if (want_heatmap && l == params.heatmap_layer && h == params.heatmap_head)
                    result.heatmaps[step] = heatmap_weights(scene, set, attn.weights);
            }
        result.transfer.push_back(transfer);
    }
    return result;
}

}  // namespace gaze
