// SPDX-License-Identifier: Apache-2.0
//
// Query-to-region routing: dot-product scores against region descriptors,
// TopK selection with deterministic tie-breaking, and the progressive
// selection-ratio schedule used during training.
//
// Scores are raw dot products, without the 1/sqrt(d) factor used inside
// the attention softmax; TopK selection is invariant to positive scaling
// of the query. Ties at the selection boundary are broken toward the lower
// region id so the chosen set is the lexicographically smallest one.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "gaze/error.hpp"
#include "gaze/kv_store.hpp"
#include "gaze/layout.hpp"
#include "gaze/numerics.hpp"

namespace gaze {

// Progressive selection-ratio schedule: starts at 1.0, decays linearly to
// final_ratio by decay_end_fraction of the total steps, then stays fixed.
struct ScheduleParams {
    double final_ratio = 0.1;
    double decay_end_fraction = 0.6;
};

struct RoutingConfig {
    std::size_t top_k = 1;
    BlockExtents block{1, 6, 6};
    std::size_t context_tokens = 4;
    ScheduleParams schedule;

    void validate() const {
        if (top_k < 1) throw ConfigError("RoutingConfig: top_k must be >= 1");
        if (!(schedule.final_ratio > 0.0 && schedule.final_ratio <= 1.0))
            throw ConfigError("RoutingConfig: final_ratio must be in (0, 1]");
        if (!(schedule.decay_end_fraction > 0.0 && schedule.decay_end_fraction <= 1.0))
            throw ConfigError("RoutingConfig: decay_end_fraction must be in (0, 1]");
    }
};

// One head's chosen regions for one decoding step. Ids are distinct and
// stored ascending; scores are aligned with the ids.
struct Selection {
    std::vector<std::size_t> region_ids;
    std::vector<double> scores;

    bool contains(std::size_t region_id) const {
        return std::binary_search(region_ids.begin(), region_ids.end(), region_id);
    }
    double max_score() const {
        double hi = -std::numeric_limits<double>::infinity();
        for (double s : scores)
            if (s > hi) hi = s;
        return hi;
    }
};

// score[g] = query . descriptor[g]; no normalization, no temperature.
template <class T>
inline Vec score_regions(std::span<const double> query, const RegionTable<T>& table) {
    if (query.size() != table.dim())
        throw DimensionError("score_regions: query dimension " + std::to_string(query.size()) +
                             " does not match descriptors (d=" + std::to_string(table.dim()) +
                             ")");
    Vec scores(table.size());
    for (std::size_t g = 0; g < table.size(); ++g)
        scores[g] = dot(query, table.descriptor(g));
    return scores;
}

// Select min(k, G) region ids with the highest scores. Boundary ties go to
// the lower region id.
inline Selection top_k(std::span<const double> scores, std::size_t k) {
    if (scores.empty()) throw DimensionError("top_k: empty score vector");
    if (k == 0) throw DimensionError("top_k: k must be >= 1");
    const std::size_t count = std::min(k, scores.size());
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto better = [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
#ifdef GAZE_INVERT_TIEBREAK
        return a > b;  // fault-injection build: inverted tie rule
#else
        return a < b;
#endif
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                      order.end(), better);
    Selection selection;
    selection.region_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(selection.region_ids.begin(), selection.region_ids.end());
    selection.scores.reserve(count);
    for (std::size_t id : selection.region_ids) selection.scores.push_back(scores[id]);
    return selection;
}

// Selection ratio at a training step. Endpoints are exact: step 0 gives
// 1.0 and every step at or past decay_end_fraction * total_steps gives
// final_ratio itself.
inline double schedule_ratio(std::size_t step, std::size_t total_steps,
                             const ScheduleParams& schedule = {}) {
    if (total_steps < 1) throw DimensionError("schedule_ratio: total_steps must be >= 1");
    if (step == 0) return 1.0;
    const double edge = schedule.decay_end_fraction * static_cast<double>(total_steps);
    if (static_cast<double>(step) >= edge) return schedule.final_ratio;
    const double t = static_cast<double>(step) / edge;
    return 1.0 - (1.0 - schedule.final_ratio) * t;
}

// Integer K realized from a selection ratio: ceil(ratio * G), at least 1.
inline std::size_t ratio_to_k(double ratio, std::size_t region_count) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw DimensionError("ratio_to_k: ratio must be in (0, 1]");
    if (region_count < 1) throw DimensionError("ratio_to_k: region count must be >= 1");
    const auto k = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(region_count)));
    return std::max<std::size_t>(1, std::min(k, region_count));
}

// Fresh per-query routing: score every descriptor, then TopK.
template <class T>
inline Selection route(std::span<const double> query, const RegionTable<T>& table,
                       std::size_t k) {
    return top_k(score_regions(query, table), k);
}

}  // namespace gaze
