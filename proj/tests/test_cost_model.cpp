// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "gaze/cost_model.hpp"

using namespace gaze;

namespace {

// Desk-scale video reference point: 8 units of 24x24 tokens, 6x6 blocks.
ModelGeometry video_gaze() {
    ModelGeometry g;
    g.layers = 1;
    g.heads = 1;
    g.dim = 128;
    g.precision_bytes = 4;
    g.text_len = 0;
    g.units = 8;
    g.tokens_per_unit = 576;
    g.region_tokens = 36;
    g.region_count = 128;
    g.top_k = 20;
    g.context_tokens = 4;
    return g;
}

ModelGeometry video_dense() {
    ModelGeometry g = video_gaze();
    g.top_k = g.region_count;
    g.context_tokens = 0;
    return g;
}

}  // namespace

TEST_CASE("ceil_log2") {
    CHECK(ceil_log2(1) == 0);
    CHECK(ceil_log2(2) == 1);
    CHECK(ceil_log2(3) == 2);
    CHECK(ceil_log2(128) == 7);
    CHECK(ceil_log2(129) == 8);
    CHECK(ceil_log2(4096) == 12);
    CHECK_THROWS_AS(ceil_log2(0), DimensionError);
}

TEST_CASE("attended visual count for the video reference point") {
    CHECK(attended_visual_count(video_gaze()) == 752);
    CHECK(video_gaze().visual_tokens() == 4608);
    CHECK(attended_visual_count(video_dense()) == 4608);
    CHECK(format_fraction(752, 4608) == "752/4608 = 16.3%");
}

TEST_CASE("attention flops formula") {
    ModelGeometry unit;
    unit.dim = 1;
    CHECK(attention_flops(1, unit) == 9);  // 4*1*1 + 5*1

    ModelGeometry g = video_gaze();
    CHECK(attention_flops(752, g) == 752u * (4u * 128u + 5u));
    // linear in n and in layers*heads
    CHECK(attention_flops(752, g) * 4608u == attention_flops(4608, g) * 752u);
    g.layers = 3;
    g.heads = 5;
    CHECK(attention_flops(10, g) == 15u * attention_flops(10, video_gaze()));
    CHECK_THROWS_AS(attention_flops(0, g), DimensionError);
}

TEST_CASE("routing flops formula") {
    CHECK(routing_flops(video_gaze()) == 33664);  // 2*128*128 + 128*7
    ModelGeometry g = video_gaze();
    g.layers = 2;
    g.heads = 3;
    CHECK(routing_flops(g) == 6u * 33664u);
}

TEST_CASE("context prefill flops sum over growing attended sets") {
    ModelGeometry g;
    g.layers = 2;
    g.heads = 3;
    g.dim = 4;
    g.units = 2;
    g.tokens_per_unit = 3;
    g.region_tokens = 3;
    g.region_count = 2;
    g.top_k = 1;
    g.context_tokens = 2;
    // j=0 attends 4 rows: 4*4*4+5*4 = 84; j=1 attends 5: 4*5*4+5*5 = 105
    CHECK(lct_flops(g) == 2u * 3u * 2u * (84u + 105u));

    g.context_tokens = 0;
    CHECK(lct_flops(g) == 0);
}

TEST_CASE("resident kv bytes") {
    CHECK(resident_kv_bytes(video_gaze()) == 752u * 128u * 4u * 2u);
    ModelGeometry g = video_gaze();
    g.layers = 4;
    g.heads = 2;
    g.precision_bytes = 2;
    CHECK(resident_kv_bytes(g) == 4u * 2u * 752u * 128u * 2u * 2u);
}

TEST_CASE("geometry validation") {
    ModelGeometry g = video_gaze();
    g.validate();
    g.region_count = 127;  // 36*127 < 4608
    CHECK_THROWS_AS(g.validate(), DimensionError);
    g = video_gaze();
    g.top_k = 0;
    CHECK_THROWS_AS(g.validate(), DimensionError);
    g = video_gaze();
    g.dim = 0;
    CHECK_THROWS_AS(g.validate(), DimensionError);

    CHECK(video_dense().effectively_dense());
    CHECK_FALSE(video_gaze().effectively_dense());
    ModelGeometry with_ctx = video_dense();
    with_ctx.context_tokens = 1;
    CHECK_FALSE(with_ctx.effectively_dense());
}

TEST_CASE("savings report for the video reference point") {
    const CostReport report = savings_report(video_dense(), video_gaze());
    CHECK(report.dense_attn_flops == attention_flops(4608, video_dense()));
    CHECK(report.gaze_attn_flops == attention_flops(752, video_gaze()));
    // 1 - 752/4608 = 83.68%; rounded once, at construction
    REQUIRE(report.attn_savings_pct.has_value());
    CHECK(*report.attn_savings_pct == 83.7);
    REQUIRE(report.kv_savings_pct.has_value());
    CHECK(*report.kv_savings_pct == 83.7);

    // the dense side neither routes nor prefills context tokens
    CHECK(report.dense_routing_flops == 0);
    CHECK(report.routing_flops == 33664);
    CHECK_FALSE(report.route_savings_pct.has_value());
    CHECK(report.dense_context_flops == 0);
    CHECK(report.context_flops > 0);
    CHECK_FALSE(report.lct_savings_pct.has_value());
}

TEST_CASE("identical geometries always report 0.0% savings") {
    const CostReport report = savings_report(video_gaze(), video_gaze());
    REQUIRE(report.attn_savings_pct.has_value());
    CHECK(*report.attn_savings_pct == 0.0);
    REQUIRE(report.route_savings_pct.has_value());
    CHECK(*report.route_savings_pct == 0.0);
    REQUIRE(report.lct_savings_pct.has_value());
    CHECK(*report.lct_savings_pct == 0.0);
    REQUIRE(report.kv_savings_pct.has_value());
    CHECK(*report.kv_savings_pct == 0.0);
}

TEST_CASE("savings_report rejects mismatched shared dimensions") {
    ModelGeometry other = video_gaze();
    other.dim = 64;
    other.region_tokens = 72;  // keep m*G covering N_v
    CHECK_THROWS_AS(savings_report(video_dense(), other), ContractError);
    other = video_gaze();
    other.layers = 2;
    CHECK_THROWS_AS(savings_report(video_dense(), other), ContractError);
}

TEST_CASE("savings_pct edge cases") {
    CHECK(savings_pct(100, 100) == 0.0);
    CHECK_FALSE(savings_pct(0, 5).has_value());
    CHECK(savings_pct(4608, 752) == 83.7);
    CHECK(savings_pct(100, 150) == -50.0);
    CHECK(savings_pct(0, 0) == 0.0);
}

TEST_CASE("report text carries conventions, fractions, and the table") {
    const CostReport report = savings_report(video_dense(), video_gaze());
    const std::string text = format_cost_report(report);
    CHECK(text.find("4*n*d + 5*n") != std::string::npos);
    CHECK(text.find("2*G*d + G*ceil(log2 G)") != std::string::npos);
    CHECK(text.find("(K*m + C*U)*d*precision*2") != std::string::npos);
    CHECK(text.find("752/4608 = 16.3%") != std::string::npos);
    CHECK(text.find("4608/4608 = 100.0%") != std::string::npos);
    CHECK(text.find("Attn") != std::string::npos);
    CHECK(text.find("Route") != std::string::npos);
    CHECK(text.find("Lct") != std::string::npos);
    CHECK(text.find("KV Cache") != std::string::npos);
    CHECK(text.find("83.7%") != std::string::npos);
    CHECK(text.find("--") != std::string::npos);  // dense Route/Lct cells
    CHECK(text.find("vision kv savings excluding context tokens") != std::string::npos);
    CHECK(text.find("vision kv savings including context tokens") != std::string::npos);

    // reproducible: same inputs, same bytes
    CHECK(format_cost_report(savings_report(video_dense(), video_gaze())) == text);
}

TEST_CASE("csv round-trips every figure") {
    const CostReport report = savings_report(video_dense(), video_gaze());
    const std::string csv = cost_report_csv(report);
    const ParsedCostCsv parsed = parse_cost_csv(csv);
    CHECK(parsed.dense_attn_flops == report.dense_attn_flops);
    CHECK(parsed.dense_routing_flops == report.dense_routing_flops);
    CHECK(parsed.dense_context_flops == report.dense_context_flops);
    CHECK(parsed.dense_kv_bytes == report.dense_kv_bytes);
    CHECK(parsed.gaze_attn_flops == report.gaze_attn_flops);
    CHECK(parsed.routing_flops == report.routing_flops);
    CHECK(parsed.context_flops == report.context_flops);
    CHECK(parsed.gaze_resident_kv_bytes == report.gaze_resident_kv_bytes);
    CHECK(parsed.attn_savings_pct == report.attn_savings_pct);
    CHECK(parsed.route_savings_pct == report.route_savings_pct);  // both empty
    CHECK(parsed.lct_savings_pct == report.lct_savings_pct);
    CHECK(parsed.kv_savings_pct == report.kv_savings_pct);

    CHECK_THROWS_AS(parse_cost_csv("row,a,b,c,d\nmystery,1,2,3,4\n"), IoError);
    CHECK_THROWS_AS(parse_cost_csv("dense,1,2,3,4\n"), IoError);
    CHECK_THROWS_AS(parse_cost_csv("dense,1,2\ngaze,1,2\nsavings_pct,,\n"), IoError);
}
