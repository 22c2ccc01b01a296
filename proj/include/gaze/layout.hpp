// SPDX-License-Identifier: Apache-2.0
//
// Visual token geometry: a (frames x height x width) token volume, its
// flat-index mapping into the KV sequence, block tiling into gaze regions,
// and the cache layout used when context rows are interleaved per unit.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gaze/error.hpp"

namespace gaze {

struct GridCoord {
    std::size_t t = 0;
    std::size_t h = 0;
    std::size_t w = 0;
};

// Block extents (r^t, r^h, r^w) of one gaze region.
struct BlockExtents {
    std::size_t t = 1;
    std::size_t h = 1;
    std::size_t w = 1;

    std::size_t tokens() const { return t * h * w; }
};

// The (T, H, W) grid of visual tokens for one input, with the position of
// its first token in the full KV sequence. The flat mapping
//   flat(t, h, w) = sequence_offset + t*H*W + h*W + w
// is a bijection onto [sequence_offset, sequence_offset + T*H*W).
struct TokenVolume {
    std::size_t frames = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t sequence_offset = 0;

    std::size_t total_tokens() const { return frames * height * width; }

    std::size_t flat_index(std::size_t t, std::size_t h, std::size_t w) const {
        if (t >= frames || h >= height || w >= width)
            throw IndexError("TokenVolume::flat_index: coordinate (" + std::to_string(t) + "," +
                             std::to_string(h) + "," + std::to_string(w) + ") outside " +
                             std::to_string(frames) + "x" + std::to_string(height) + "x" +
                             std::to_string(width));
        return sequence_offset + t * height * width + h * width + w;
    }

    GridCoord coords_at(std::size_t flat) const {
        if (flat < sequence_offset || flat >= sequence_offset + total_tokens())
            throw IndexError("TokenVolume::coords_at: position " + std::to_string(flat) +
                             " outside volume range");
        const std::size_t local = flat - sequence_offset;
        const std::size_t per_frame = height * width;
        return {local / per_frame, (local % per_frame) / width, local % width};
    }
};

// One gaze region: a block of visual tokens and the flat KV positions it
// covers. Edge blocks may realize smaller extents than requested.
struct Region {
    std::size_t region_id = 0;
    std::size_t unit_begin = 0;  // first frame covered
    std::size_t unit_end = 0;    // one past the last frame covered
    BlockExtents realized;       // extents actually covered at this block
    std::vector<std::size_t> token_indices;  // sorted, duplicate-free flat positions
};

// Partition the volume into blocks of (r_t, r_h, r_w) tokens, enumerated
// t-major, then h, then w. Dimensions that do not divide evenly leave
// smaller ragged regions at the edges; no padding is introduced.
inline std::vector<Region> tile_regions(const TokenVolume& volume, std::size_t r_t,
                                        std::size_t r_h, std::size_t r_w) {
    if (r_t == 0 || r_h == 0 || r_w == 0)
        throw DimensionError("tile_regions: block extents must be >= 1");
    std::vector<Region> regions;
    std::size_t next_id = 0;
    for (std::size_t t0 = 0; t0 < volume.frames; t0 += r_t) {
        const std::size_t t1 = std::min(t0 + r_t, volume.frames);
        for (std::size_t h0 = 0; h0 < volume.height; h0 += r_h) {
            const std::size_t h1 = std::min(h0 + r_h, volume.height);
            for (std::size_t w0 = 0; w0 < volume.width; w0 += r_w) {
                const std::size_t w1 = std::min(w0 + r_w, volume.width);
                Region region;
                region.region_id = next_id++;
                region.unit_begin = t0;
                region.unit_end = t1;
                region.realized = {t1 - t0, h1 - h0, w1 - w0};
                region.token_indices.reserve(region.realized.tokens());
                for (std::size_t t = t0; t < t1; ++t)
                    for (std::size_t h = h0; h < h1; ++h)
                        for (std::size_t w = w0; w < w1; ++w)
                            region.token_indices.push_back(volume.flat_index(t, h, w));
                regions.push_back(std::move(region));
            }
        }
    }
    return regions;
}

inline std::size_t region_count(const TokenVolume& volume, const BlockExtents& block) {
    const auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
    return ceil_div(volume.frames, block.t) * ceil_div(volume.height, block.h) *
           ceil_div(volume.width, block.w);
}

// Cache layout for one scene. Rows are appended in the order
//   [text] [unit0 visual][unit0 context] [unit1 visual][unit1 context] ...
// so each unit's context rows directly follow its visual rows. Visual grid
// positions therefore map to cache positions with a gap of ctx_per_unit
// rows after every frame.
struct SceneLayout {
    std::size_t text_len = 0;
    std::size_t frames = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t ctx_per_unit = 0;

    std::size_t tokens_per_unit() const { return height * width; }
    std::size_t visual_tokens() const { return frames * tokens_per_unit(); }
    std::size_t total_positions() const {
        return text_len + frames * (tokens_per_unit() + ctx_per_unit);
    }

    // Geometry of the visual grid in volume-local coordinates.
    TokenVolume volume() const { return {frames, height, width, 0}; }

    std::size_t visual_position(std::size_t t, std::size_t h, std::size_t w) const {
        const std::size_t local = volume().flat_index(t, h, w);
        return text_len + local + t * ctx_per_unit;
    }

    std::size_t context_position(std::size_t unit, std::size_t slot) const {
        if (unit >= frames || slot >= ctx_per_unit)
            throw IndexError("SceneLayout::context_position: unit/slot out of range");
        return text_len + unit * (tokens_per_unit() + ctx_per_unit) + tokens_per_unit() + slot;
    }

    // Tile the visual grid and translate each region's token indices into
    // cache positions (skipping the interleaved context rows).
    std::vector<Region> cache_regions(const BlockExtents& block) const {
        const TokenVolume vol = volume();
        std::vector<Region> regions = tile_regions(vol, block.t, block.h, block.w);
        const std::size_t per_frame = tokens_per_unit();
        for (Region& region : regions)
            for (std::size_t& index : region.token_indices) {
                const std::size_t frame = index / per_frame;
                index = text_len + index + frame * ctx_per_unit;
            }
        return regions;
    }
};

}  // namespace gaze
