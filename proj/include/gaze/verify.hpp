// SPDX-License-Identifier: Apache-2.0
//
// Self-check suites behind `verify`: full-selection equivalence against
// dense attention, TopK against a full-sort oracle (including crafted
// ties), analytic gradients against central differences, tiling partition
// properties, and the worked cost example. Each suite is independent and
// reports one pass/fail line.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "gaze/attention.hpp"
#include "gaze/cost_model.hpp"
#include "gaze/error.hpp"
#include "gaze/layout.hpp"
#include "gaze/routing.hpp"
#include "gaze/scene.hpp"
#include "gaze/trainer.hpp"

namespace gaze {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Full-sort reference for TopK: rank by score descending, id ascending,
// then report the chosen ids in ascending order.
inline std::vector<std::size_t> topk_oracle(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> ids(scores.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    ids.resize(std::min(k, ids.size()));
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline SuiteResult suite_full_selection() {
    SuiteResult result{"full_selection_equivalence", false, ""};
    try {
        std::size_t checked = 0;
        double worst = 0.0;
        for (std::size_t dim : {std::size_t{8}, std::size_t{64}})
            for (std::size_t side : {std::size_t{6}, std::size_t{24}})
                for (std::size_t text_len : {std::size_t{0}, std::size_t{7}})
                    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
                        SeededStream stream(seed);
                        const SceneLayout layout{text_len, 1, side, side, 0};
                        const BlockExtents block{1, 3, 3};
                        const DecodeScene scene =
                            generate_scene(stream, layout, block, dim, 0.25);
                        HeadState<double> state = build_head_state<double>(stream, scene, 0, 0);
                        const DecodeQuery query = next_query(stream, scene);
                        const Vec q = project(query.query_feature, state.proj.w_q);
                        const std::size_t region_total = state.table.size();
                        const RoutedAttention<double> routed =
                            gaze_attention_routed(std::span<const double>(q), state.cache,
                                                  state.table, region_total);
                        const std::vector<std::size_t> everything = all_positions(state.cache);
                        const AttentionOutput dense = dense_attention(
                            std::span<const double>(q), state.cache,
                            std::span<const std::size_t>(everything));
                        for (std::size_t j = 0; j < dim; ++j) {
                            const double err =
                                std::abs(routed.attention.output[j] - dense.output[j]);
                            if (err > worst) worst = err;
                        }
                        ++checked;
                    }
        result.passed = worst <= 1e-10;
        result.detail = std::to_string(checked) + " instances, max |gaze - dense| = " +
                        format_double(worst);
    } catch (const std::exception& e) {
        result.detail = std::string("exception: ") + e.what();
    }
    return result;
}

inline SuiteResult suite_topk_oracle() {
    SuiteResult result{"topk_oracle", false, ""};
    try {
        SeededStream stream(99);
        std::size_t checked = 0;
        std::size_t mismatches = 0;
        // crafted boundary tie: ids 1 and 2 share the score, k cuts between them
        {
            const Vec scores{1.0, 0.5, 0.5, 0.2};
            const Selection selection = top_k(scores, 2);
            const std::vector<std::size_t> expected{0, 1};
            if (selection.region_ids != expected) ++mismatches;
            ++checked;
        }
        for (std::size_t trial = 0; trial < 400; ++trial) {
            const std::size_t count = 1 + static_cast<std::size_t>(stream.below(257));
            const std::size_t k = 1 + static_cast<std::size_t>(stream.below(count));
            Vec scores(count);
            const bool quantized = trial % 2 == 0;  // force heavy ties on half the trials
            for (double& s : scores)
                s = quantized ? std::floor(stream.uniform() * 5.0) : stream.normal();
            const Selection selection = top_k(scores, k);
            if (selection.region_ids != topk_oracle(scores, k)) ++mismatches;
            ++checked;
        }
        result.passed = mismatches == 0;
        result.detail = std::to_string(checked) + " score vectors, " +
                        std::to_string(mismatches) + " mismatches vs full sort";
    } catch (const std::exception& e) {
        result.detail = std::string("exception: ") + e.what();
    }
    return result;
}

inline SuiteResult suite_gradients() {
    SuiteResult result{"gradient_check", false, ""};
    try {
        double worst = 0.0;
        std::size_t bad = 0;
        std::size_t coords = 0;
        bool outside_clean = true;
        for (std::size_t context_tokens : {std::size_t{0}, std::size_t{2}})
            for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
                TaskDims dims;
                dims.frames = 1;
                dims.height = 4;
                dims.width = 4;
                dims.block = {1, 2, 2};
                dims.feature_dim = 8;
                dims.dim = 8;
                dims.context_tokens = context_tokens;
                SeededStream stream(seed);
                ToyParams params = init_params(stream, dims);
                const NeedleTask task = generate_task(stream, dims, 0.3);
                const TaskForward fwd = forward_task(params, task, dims, 2);
                const Selection selection = fwd.selection;
                const ParamGrads grads = backward_task(params, task, dims, fwd);

                const double h = 1e-5;
                auto check = [&](Mat<double>& live, const Mat<double>& grad) {
                    for (std::size_t i = 0; i < live.flat().size(); ++i) {
                        const double orig = live.flat()[i];
                        live.flat()[i] = orig + h;
                        const double above =
                            task_loss_with_selection(params, task, dims, selection);
                        live.flat()[i] = orig - h;
                        const double below =
                            task_loss_with_selection(params, task, dims, selection);
                        live.flat()[i] = orig;
                        const double fd = (above - below) / (2.0 * h);
                        const double analytic = grad.flat()[i];
                        const double err = std::abs(fd - analytic);
                        const double tol = std::max(1e-7, 1e-5 * std::abs(analytic));
                        if (err > tol) ++bad;
                        if (err > worst) worst = err;
                        ++coords;
                    }
                };
                check(params.w_q, grads.w_q);
                check(params.w_k, grads.w_k);
                check(params.w_v, grads.w_v);
                for (std::size_t u = 0; u < params.context_embeddings.size(); ++u)
                    check(params.context_embeddings[u], grads.context_embeddings[u]);

                // rows outside the gaze set must carry exactly zero gradient
                Vec upstream(dims.dim, 0.5);
                const GazeAttentionGrads attn = gaze_attention_backward(
                    std::span<const double>(fwd.query), fwd.cache, fwd.table, selection,
                    std::span<const double>(upstream));
                const Mat<double> full_k =
                    scatter_rows(fwd.cache.size(),
                                 std::span<const std::size_t>(attn.set.indices),
                                 attn.grads.d_keys);
                const Mat<double> full_v =
                    scatter_rows(fwd.cache.size(),
                                 std::span<const std::size_t>(attn.set.indices),
                                 attn.grads.d_values);
                std::vector<bool> in_set(fwd.cache.size(), false);
                for (std::size_t index : attn.set.indices) in_set[index] = true;
                for (std::size_t p = 0; p < fwd.cache.size(); ++p) {
                    if (in_set[p]) continue;
                    for (std::size_t j = 0; j < dims.dim; ++j)
                        if (full_k.at(p, j) != 0.0 || full_v.at(p, j) != 0.0)
                            outside_clean = false;
                }
            }
        result.passed = bad == 0 && outside_clean;
        result.detail = std::to_string(coords) + " coordinates, " + std::to_string(bad) +
                        " outside tolerance, max |fd - analytic| = " + format_double(worst) +
                        (outside_clean ? ", unselected rows zero" : ", NONZERO unselected grads");
    } catch (const std::exception& e) {
        result.detail = std::string("exception: ") + e.what();
    }
    return result;
}

inline SuiteResult suite_partition() {
    SuiteResult result{"tiling_partition", false, ""};
    try {
        std::size_t tilings = 0;
        std::size_t violations = 0;
        for (std::size_t t = 1; t <= 3; ++t)
            for (std::size_t h = 1; h <= 6; ++h)
                for (std::size_t w = 1; w <= 6; ++w) {
                    const TokenVolume volume{t, h, w, 0};
                    for (std::size_t rt = 1; rt <= t; ++rt)
                        for (std::size_t rh = 1; rh <= h; ++rh)
                            for (std::size_t rw = 1; rw <= w; ++rw) {
                                const std::vector<Region> regions =
                                    tile_regions(volume, rt, rh, rw);
                                if (regions.size() !=
                                    region_count(volume, BlockExtents{rt, rh, rw}))
                                    ++violations;
                                std::vector<std::size_t> hits(volume.total_tokens(), 0);
                                for (const Region& region : regions)
                                    for (std::size_t index : region.token_indices) {
                                        if (index >= hits.size()) {
                                            ++violations;
                                            continue;
                                        }
                                        ++hits[index];
                                    }
                                for (std::size_t count : hits)
                                    if (count != 1) ++violations;
                                ++tilings;
                            }
                }
        result.passed = violations == 0;
        result.detail = std::to_string(tilings) + " tilings, " + std::to_string(violations) +
                        " cover violations";
    } catch (const std::exception& e) {
        result.detail = std::string("exception: ") + e.what();
    }
    return result;
}

inline SuiteResult suite_cost_example() {
    SuiteResult result{"cost_worked_example", false, ""};
    try {
        ModelGeometry gaze;
        gaze.units = 8;
        gaze.tokens_per_unit = 576;
        gaze.region_tokens = 36;
        gaze.region_count = 128;
        gaze.top_k = 20;
        gaze.context_tokens = 4;
        gaze.dim = 128;
        ModelGeometry dense = gaze;
        dense.top_k = 128;
        dense.context_tokens = 0;

        std::vector<std::string> problems;
        if (attended_visual_count(gaze) != 752) problems.push_back("attended != 752");
        if (format_fraction(attended_visual_count(gaze), gaze.visual_tokens()) !=
            "752/4608 = 16.3%")
            problems.push_back("fraction line mismatch");
        ModelGeometry unit;
        if (attention_flops(1, unit) != 9) problems.push_back("unit attention flops != 9");
        ModelGeometry route_geom;
        route_geom.region_count = 128;
        route_geom.dim = 128;
        if (routing_flops(route_geom) != 33664) problems.push_back("routing flops != 33664");

        const CostReport report = savings_report(dense, gaze);
        // linearity: flops ratio equals the attended-row ratio exactly
        if (report.gaze_attn_flops * (dense.visual_tokens() + dense.text_len) !=
            report.dense_attn_flops * (attended_visual_count(gaze) + gaze.text_len))
            problems.push_back("attention flops not proportional to attended rows");
        if (!report.attn_savings_pct || *report.attn_savings_pct != 83.7)
            problems.push_back("attention savings != 83.7");
        const ParsedCostCsv parsed = parse_cost_csv(cost_report_csv(report));
        if (parsed.gaze_attn_flops != report.gaze_attn_flops ||
            parsed.dense_attn_flops != report.dense_attn_flops ||
            parsed.routing_flops != report.routing_flops ||
            parsed.context_flops != report.context_flops ||
            parsed.gaze_resident_kv_bytes != report.gaze_resident_kv_bytes ||
            parsed.attn_savings_pct != report.attn_savings_pct)
            problems.push_back("csv round trip mismatch");

        result.passed = problems.empty();
        if (problems.empty()) {
            result.detail = "752/4608 = 16.3%, savings 83.7%, csv round-trips";
        } else {
            for (const std::string& p : problems) {
                if (!result.detail.empty()) result.detail += "; ";
                result.detail += p;
            }
        }
    } catch (const std::exception& e) {
        result.detail = std::string("exception: ") + e.what();
    }
    return result;
}

inline std::vector<SuiteResult> run_all_suites() {
    return {suite_full_selection(), suite_topk_oracle(), suite_gradients(), suite_partition(),
            suite_cost_example()};
}

inline bool report_suites(const std::vector<SuiteResult>& suites, std::ostream& out) {
    bool all_passed = true;
    for (const SuiteResult& suite : suites) {
        out << "suite " << suite.name << ": " << (suite.passed ? "PASS" : "FAIL") << " ("
            << suite.detail << ")\n";
        if (!suite.passed) all_passed = false;
    }
    return all_passed;
}

}  // namespace gaze
