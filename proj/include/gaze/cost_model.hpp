// SPDX-License-Identifier: Apache-2.0
//
// Analytical cost accounting. All raw figures are exact unsigned integers
// under documented conventions; the conventions are printed into every
// report so the numbers are reproducible from the geometry alone.
//
//   attention flops, per query:  layers * heads * (4*n*d + 5*n)
//                                (2nd scores + 2nd weighted sum + 5n softmax)
//   routing flops, per query:    layers * heads * (2*G*d + G*ceil(log2 G))
//   context prefill flops (Lct): layers * heads * sum over context tokens of
//                                4*n_att*d + 5*n_att, where token j of a unit
//                                attends n_att = tokens_per_unit + j + 1 rows
//   kv cache bytes (resident):   layers * heads * tokens * d * precision * 2
//
// Both sides of a savings report are evaluated with the same formulas on
// their own geometry, so identical geometries always give 0.0% savings. A
// plain dense configuration is expressed as K = G, |C| = 0, for which the
// resident set is exactly the full visual sequence.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaze/error.hpp"

namespace gaze {

struct ModelGeometry {
    std::uint64_t layers = 1;
    std::uint64_t heads = 1;
    std::uint64_t dim = 1;
    std::uint64_t precision_bytes = 4;
    std::uint64_t text_len = 0;
    std::uint64_t units = 1;            // U
    std::uint64_t tokens_per_unit = 1;  // N_v / U
    std::uint64_t region_tokens = 1;    // m
    std::uint64_t region_count = 1;     // G
    std::uint64_t top_k = 1;            // K
    std::uint64_t context_tokens = 0;   // |C| per unit

    std::uint64_t visual_tokens() const { return units * tokens_per_unit; }

    void validate() const {
        if (layers < 1 || heads < 1 || dim < 1 || precision_bytes < 1 || units < 1 ||
            tokens_per_unit < 1 || region_tokens < 1 || region_count < 1 || top_k < 1)
            throw DimensionError("ModelGeometry: all counts must be >= 1 (|C| may be 0)");
        if (region_tokens * region_count < visual_tokens())
            throw DimensionError("ModelGeometry: m*G must cover the visual sequence");
    }

    // K >= G with no context tokens: nothing to select, nothing to summarize.
    bool effectively_dense() const { return top_k >= region_count && context_tokens == 0; }
};

inline std::uint64_t ceil_log2(std::uint64_t n) {
    if (n < 1) throw DimensionError("ceil_log2: n must be >= 1");
    std::uint64_t bits = 0;
    std::uint64_t value = 1;
    while (value < n) {
        value *= 2;
        ++bits;
    }
    return bits;
}

// K*m + |C|*U: visual-side rows one gaze query attends (text excluded).
inline std::uint64_t attended_visual_count(const ModelGeometry& geom) {
    geom.validate();
    return geom.top_k * geom.region_tokens + geom.context_tokens * geom.units;
}

inline std::uint64_t attention_flops(std::uint64_t n_attended, const ModelGeometry& geom) {
    geom.validate();
    if (n_attended < 1) throw DimensionError("attention_flops: n_attended must be >= 1");
    return geom.layers * geom.heads * (4 * n_attended * geom.dim + 5 * n_attended);
}

inline std::uint64_t routing_flops(const ModelGeometry& geom) {
    geom.validate();
    return geom.layers * geom.heads *
           (2 * geom.region_count * geom.dim + geom.region_count * ceil_log2(geom.region_count));
}

// One-time prefill cost of the context tokens.
inline std::uint64_t lct_flops(const ModelGeometry& geom) {
    geom.validate();
    std::uint64_t per_unit = 0;
    for (std::uint64_t j = 0; j < geom.context_tokens; ++j) {
        const std::uint64_t n_att = geom.tokens_per_unit + j + 1;
        per_unit += 4 * n_att * geom.dim + 5 * n_att;
    }
    return geom.layers * geom.heads * geom.units * per_unit;
}

// Fast-tier residency: selected regions plus context tokens, keys and values.
inline std::uint64_t resident_kv_bytes(const ModelGeometry& geom) {
    return geom.layers * geom.heads * attended_visual_count(geom) * geom.dim *
           geom.precision_bytes * 2;
}

struct CostReport {
    ModelGeometry dense;
    ModelGeometry gaze;

    std::uint64_t dense_attn_flops = 0;
    std::uint64_t gaze_attn_flops = 0;
    std::uint64_t dense_routing_flops = 0;
    std::uint64_t routing_flops = 0;  // gaze side
    std::uint64_t dense_context_flops = 0;
    std::uint64_t context_flops = 0;  // gaze side
    std::uint64_t dense_kv_bytes = 0;
    std::uint64_t gaze_resident_kv_bytes = 0;

    // percentages rounded to one decimal at construction; absent when the
    // dense side has no such cost to compare against
    std::optional<double> attn_savings_pct;
    std::optional<double> route_savings_pct;
    std::optional<double> lct_savings_pct;
    std::optional<double> kv_savings_pct;
};

inline double round_one_decimal(double value) { return std::round(value * 10.0) / 10.0; }

inline std::optional<double> savings_pct(std::uint64_t dense, std::uint64_t gaze) {
    if (dense == gaze) return 0.0;
    if (dense == 0) return std::nullopt;
    const double fraction = 1.0 - static_cast<double>(gaze) / static_cast<double>(dense);
    return round_one_decimal(100.0 * fraction);
}

inline CostReport savings_report(const ModelGeometry& dense, const ModelGeometry& gaze) {
    dense.validate();
    gaze.validate();
    if (dense.layers != gaze.layers || dense.heads != gaze.heads || dense.dim != gaze.dim ||
        dense.precision_bytes != gaze.precision_bytes)
        throw ContractError("savings_report: geometries must share layers/heads/dim/precision");
    CostReport report;
    report.dense = dense;
    report.gaze = gaze;
    report.dense_attn_flops = attention_flops(dense.text_len + attended_visual_count(dense), dense);
    report.gaze_attn_flops = attention_flops(gaze.text_len + attended_visual_count(gaze), gaze);
    report.dense_routing_flops = dense.effectively_dense() ? 0 : routing_flops(dense);
    report.routing_flops = gaze.effectively_dense() ? 0 : routing_flops(gaze);
    report.dense_context_flops = lct_flops(dense);
    report.context_flops = lct_flops(gaze);
    report.dense_kv_bytes = resident_kv_bytes(dense);
    report.gaze_resident_kv_bytes = resident_kv_bytes(gaze);
    report.attn_savings_pct = savings_pct(report.dense_attn_flops, report.gaze_attn_flops);
    report.route_savings_pct = savings_pct(report.dense_routing_flops, report.routing_flops);
    report.lct_savings_pct = savings_pct(report.dense_context_flops, report.context_flops);
    report.kv_savings_pct = savings_pct(report.dense_kv_bytes, report.gaze_resident_kv_bytes);
    return report;
}

inline std::string format_u64(std::uint64_t value) { return std::to_string(value); }

inline std::string format_pct(double pct) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.1f%%", pct);
    return buffer;
}

inline std::string format_pct_cell(const std::optional<double>& pct) {
    return pct ? format_pct(*pct) : std::string("--");
}

// n/total with the percentage to one decimal, e.g. "752/4608 = 16.3%".
inline std::string format_fraction(std::uint64_t n, std::uint64_t total) {
    const double pct = 100.0 * static_cast<double>(n) / static_cast<double>(total);
    char buffer[96];
    std::snprintf(buffer, sizeof buffer, "%llu/%llu = %.1f%%",
                  static_cast<unsigned long long>(n), static_cast<unsigned long long>(total), pct);
    return buffer;
}

inline std::string format_geometry(const ModelGeometry& g) {
    std::ostringstream out;
    out << "layers=" << g.layers << " heads=" << g.heads << " d=" << g.dim
        << " text=" << g.text_len << " units=" << g.units
        << " tokens/unit=" << g.tokens_per_unit << " m=" << g.region_tokens
        << " G=" << g.region_count << " K=" << g.top_k << " C=" << g.context_tokens
        << " precision_bytes=" << g.precision_bytes;
    return out.str();
}

namespace detail {

inline std::string pad_cell(const std::string& s, std::size_t width) {
    std::string out = s;
    while (out.size() < width) out.push_back(' ');
    return out;
}

}  // namespace detail

// Aligned plain-text table: columns Attn / Route / Lct / KV Cache, rows
// dense / gaze / savings, plus the conventions and attended-set fractions.
inline std::string format_cost_report(const CostReport& report) {
    const std::string dense_cells[4] = {
        format_u64(report.dense_attn_flops),
        report.dense.effectively_dense() ? "--" : format_u64(report.dense_routing_flops),
        report.dense.context_tokens == 0 ? "--" : format_u64(report.dense_context_flops),
        format_u64(report.dense_kv_bytes)};
    const std::string gaze_cells[4] = {
        format_u64(report.gaze_attn_flops),
        report.gaze.effectively_dense() ? "--" : format_u64(report.routing_flops),
        report.gaze.context_tokens == 0 ? "--" : format_u64(report.context_flops),
        format_u64(report.gaze_resident_kv_bytes)};
    const std::string savings_cells[4] = {
        format_pct_cell(report.attn_savings_pct), format_pct_cell(report.route_savings_pct),
        format_pct_cell(report.lct_savings_pct), format_pct_cell(report.kv_savings_pct)};
    const std::string headers[4] = {"Attn", "Route", "Lct", "KV Cache"};
    const std::string labels[3] = {"dense", "gaze", "savings"};

    std::size_t label_width = 7;
    std::size_t widths[4];
    for (int c = 0; c < 4; ++c) {
        widths[c] = headers[c].size();
        widths[c] = std::max(widths[c], dense_cells[c].size());
        widths[c] = std::max(widths[c], gaze_cells[c].size());
        widths[c] = std::max(widths[c], savings_cells[c].size());
    }

    std::ostringstream out;
    out << "cost report\n";
    out << "flop convention: attention per query = layers*heads*(4*n*d + 5*n)\n";
    out << "flop convention: routing per query = layers*heads*(2*G*d + G*ceil(log2 G))\n";
    out << "flop convention: context prefill (Lct) = layers*heads*sum_j(4*n_att*d + 5*n_att), "
           "n_att = tokens/unit + j + 1\n";
    out << "kv convention: resident bytes = layers*heads*(K*m + C*U)*d*precision*2\n";
    out << "\n";
    out << "geometry dense: " << format_geometry(report.dense) << "\n";
    out << "geometry gaze:  " << format_geometry(report.gaze) << "\n";
    out << "\n";
    out << "attended visual per query (dense): "
        << format_fraction(attended_visual_count(report.dense), report.dense.visual_tokens())
        << "\n";
    out << "attended visual per query (gaze): "
        << format_fraction(attended_visual_count(report.gaze), report.gaze.visual_tokens())
        << "\n";
    out << "\n";
    out << detail::pad_cell("", label_width);
    for (int c = 0; c < 4; ++c) out << "  " << detail::pad_cell(headers[c], widths[c]);
    out << "\n";
    const std::string* rows[3] = {dense_cells, gaze_cells, savings_cells};
    for (int r = 0; r < 3; ++r) {
        out << detail::pad_cell(labels[r], label_width);
        for (int c = 0; c < 4; ++c) out << "  " << detail::pad_cell(rows[r][c], widths[c]);
        out << "\n";
    }
    out << "\n";
    // Two readings of the vision-KV saving: selected regions alone, and
    // selected regions plus the context rows that ride along with them.
    const std::uint64_t dense_regions = report.dense.top_k * report.dense.region_tokens;
    const std::uint64_t gaze_regions = report.gaze.top_k * report.gaze.region_tokens;
    out << "vision kv savings excluding context tokens: "
        << format_pct_cell(savings_pct(dense_regions, gaze_regions)) << " (" << gaze_regions
        << " of " << dense_regions << " region tokens resident)\n";
    out << "vision kv savings including context tokens: "
        << format_pct_cell(
               savings_pct(attended_visual_count(report.dense), attended_visual_count(report.gaze)))
        << " (" << attended_visual_count(report.gaze) << " of "
        << attended_visual_count(report.dense) << " tokens resident)\n";
    return out.str();
}

inline std::string cost_report_csv(const CostReport& report) {
    std::ostringstream out;
    out << "row,attn_flops,route_flops,lct_flops,kv_bytes\n";
    out << "dense," << report.dense_attn_flops << "," << report.dense_routing_flops << ","
        << report.dense_context_flops << "," << report.dense_kv_bytes << "\n";
    out << "gaze," << report.gaze_attn_flops << "," << report.routing_flops << ","
        << report.context_flops << "," << report.gaze_resident_kv_bytes << "\n";
    out << "savings_pct,";
    const std::optional<double> cells[4] = {report.attn_savings_pct, report.route_savings_pct,
                                            report.lct_savings_pct, report.kv_savings_pct};
    for (int c = 0; c < 4; ++c) {
        if (cells[c]) {
            char buffer[64];
            std::snprintf(buffer, sizeof buffer, "%.1f", *cells[c]);
            out << buffer;
        }
        if (c < 3) out << ",";
    }
    out << "\n";
    return out.str();
}

struct ParsedCostCsv {
    std::uint64_t dense_attn_flops = 0, dense_routing_flops = 0, dense_context_flops = 0,
                  dense_kv_bytes = 0;
    std::uint64_t gaze_attn_flops = 0, routing_flops = 0, context_flops = 0,
                  gaze_resident_kv_bytes = 0;
    std::optional<double> attn_savings_pct, route_savings_pct, lct_savings_pct, kv_savings_pct;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

inline ParsedCostCsv parse_cost_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ParsedCostCsv parsed;
    bool saw_dense = false, saw_gaze = false, saw_savings = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields[0] == "row") continue;
        if (fields.size() != 5) throw IoError("parse_cost_csv: expected 5 fields per row");
        if (fields[0] == "dense") {
            parsed.dense_attn_flops = std::stoull(fields[1]);
            parsed.dense_routing_flops = std::stoull(fields[2]);
            parsed.dense_context_flops = std::stoull(fields[3]);
            parsed.dense_kv_bytes = std::stoull(fields[4]);
            saw_dense = true;
        } else if (fields[0] == "gaze") {
            parsed.gaze_attn_flops = std::stoull(fields[1]);
            parsed.routing_flops = std::stoull(fields[2]);
            parsed.context_flops = std::stoull(fields[3]);
            parsed.gaze_resident_kv_bytes = std::stoull(fields[4]);
            saw_gaze = true;
        } else if (fields[0] == "savings_pct") {
            std::optional<double>* cells[4] = {&parsed.attn_savings_pct,
                                               &parsed.route_savings_pct,
                                               &parsed.lct_savings_pct, &parsed.kv_savings_pct};
            for (int c = 0; c < 4; ++c)
                if (!fields[c + 1].empty()) *cells[c] = std::stod(fields[c + 1]);
            saw_savings = true;
        } else {
            throw IoError("parse_cost_csv: unknown row label '" + fields[0] + "'");
        }
    }
    if (!saw_dense || !saw_gaze || !saw_savings)
        throw IoError("parse_cost_csv: missing dense/gaze/savings rows");
    return parsed;
}

}  // namespace gaze
