// SPDX-License-Identifier: Apache-2.0
//
// Per-layer, per-head KV cache with segment labels, mean-pooled region
// descriptors, and the two-tier residency model that accounts for KV bytes
// moved when selected regions are loaded. The cache is append-only: rows
// are never evicted or overwritten; regions are re-selected per query.
#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gaze/error.hpp"
#include "gaze/io.hpp"
#include "gaze/layout.hpp"
#include "gaze/numerics.hpp"

namespace gaze {

enum class Segment : std::uint8_t { text = 0, visual = 1, context = 2 };

inline const char* segment_name(Segment s) {
    switch (s) {
        case Segment::text: return "text";
        case Segment::visual: return "visual";
        case Segment::context: return "context";
    }
    return "?";
}

// Key/value rows for one (layer, head), with per-position segment labels
// and unit ids (-1 for text rows).
template <class T = double>
class LayerHeadCache {
public:
    LayerHeadCache(std::size_t layer, std::size_t head, std::size_t dim)
        : layer_(layer), head_(head), dim_(dim) {}

    std::size_t layer() const { return layer_; }
    std::size_t head() const { return head_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return segments_.size(); }

    // Append one row at the end. Returns its cache position.
    std::size_t append(std::span<const T> key_row, std::span<const T> value_row, Segment segment,
                       std::int32_t unit_id = -1) {
        if (key_row.size() != dim_ || value_row.size() != dim_)
            throw DimensionError("LayerHeadCache::append: row width " +
                                 std::to_string(key_row.size()) + " does not match d=" +
                                 std::to_string(dim_));
        keys_.insert(keys_.end(), key_row.begin(), key_row.end());
        values_.insert(values_.end(), value_row.begin(), value_row.end());
        segments_.push_back(segment);
        unit_ids_.push_back(unit_id);
        return segments_.size() - 1;
    }

    std::size_t append_rows(const Mat<T>& key_rows, const Mat<T>& value_rows, Segment segment,
                            std::int32_t unit_id = -1) {
        if (key_rows.rows() != value_rows.rows())
            throw DimensionError("LayerHeadCache::append_rows: key/value row count mismatch");
        std::size_t first = size();
        for (std::size_t r = 0; r < key_rows.rows(); ++r)
            append(key_rows.row(r), value_rows.row(r), segment, unit_id);
        return first;
    }

    std::span<const T> key_row(std::size_t i) const {
        check(i);
        return {keys_.data() + i * dim_, dim_};
    }
    std::span<const T> value_row(std::size_t i) const {
        check(i);
        return {values_.data() + i * dim_, dim_};
    }
    Segment segment(std::size_t i) const {
        check(i);
        return segments_[i];
    }
    std::int32_t unit_id(std::size_t i) const {
        check(i);
        return unit_ids_[i];
    }

    std::vector<std::size_t> positions_with(Segment segment) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < segments_.size(); ++i)
            if (segments_[i] == segment) out.push_back(i);
        return out;
    }

private:
    void check(std::size_t i) const {
        if (i >= segments_.size())
            throw IndexError("LayerHeadCache: position " + std::to_string(i) +
                             " out of range (N=" + std::to_string(segments_.size()) + ")");
    }

    std::size_t layer_;
    std::size_t head_;
    std::size_t dim_;
    std::vector<T> keys_;
    std::vector<T> values_;
    std::vector<Segment> segments_;
    std::vector<std::int32_t> unit_ids_;
};

// Regions of one (layer, head) plus their descriptors. A descriptor is the
// arithmetic mean of the region's key rows, accumulated in double in row
// order, so refreshing an unchanged region is bitwise reproducible.
template <class T = double>
class RegionTable {
public:
    RegionTable(std::vector<Region> regions, std::size_t dim)
        : regions_(std::move(regions)),
          dim_(dim),
          descriptors_(regions_.size(), dim),
          dirty_(regions_.size(), true) {}

    std::size_t size() const { return regions_.size(); }
    std::size_t dim() const { return dim_; }
    const Region& region(std::size_t g) const {
        if (g >= regions_.size()) throw IndexError("RegionTable::region: id out of range");
        return regions_[g];
    }
    const std::vector<Region>& regions() const { return regions_; }

    std::span<const double> descriptor(std::size_t g) const {
        if (g >= regions_.size()) throw IndexError("RegionTable::descriptor: id out of range");
        return descriptors_.row(g);
    }

    void mark_dirty(std::size_t g) {
        if (g >= regions_.size()) throw IndexError("RegionTable::mark_dirty: id out of range");
        dirty_[g] = true;
    }

    void refresh(const LayerHeadCache<T>& cache) {
        if (cache.dim() != dim_)
            throw DimensionError("RegionTable::refresh: cache dimension mismatch");
        for (std::size_t g = 0; g < regions_.size(); ++g) {
            if (!dirty_[g]) continue;
            const Region& region = regions_[g];
            if (region.token_indices.empty())
                throw LayoutError("RegionTable::refresh: region " + std::to_string(g) +
                                  " has no tokens");
            auto descriptor = descriptors_.row(g);
            for (std::size_t j = 0; j < dim_; ++j) descriptor[j] = 0.0;
            for (std::size_t index : region.token_indices) {
                if (index >= cache.size())
                    throw IndexError("RegionTable::refresh: token index " +
                                     std::to_string(index) + " outside cache");
                if (cache.segment(index) != Segment::visual)
                    throw LayoutError("RegionTable::refresh: region " + std::to_string(g) +
                                      " references a non-visual position " +
                                      std::to_string(index));
                const auto key = cache.key_row(index);
                for (std::size_t j = 0; j < dim_; ++j)
                    descriptor[j] += static_cast<double>(key[j]);
            }
            const double inv = 1.0 / static_cast<double>(region.token_indices.size());
            for (std::size_t j = 0; j < dim_; ++j) descriptor[j] *= inv;
            dirty_[g] = false;
        }
    }

private:
    std::vector<Region> regions_;
    std::size_t dim_;
    Mat<double> descriptors_;
    std::vector<bool> dirty_;
};

// Build a table and compute every descriptor.
template <class T>
inline RegionTable<T> refresh_descriptors(const LayerHeadCache<T>& cache,
                                          std::vector<Region> regions) {
    RegionTable<T> table(std::move(regions), cache.dim());
    table.refresh(cache);
    return table;
}

// Two-tier residency model. The full cache lives in the slow tier; loading
// a region into the fast tier charges tokens * d * precision_bytes * 2
// (keys and values). Counters only ever grow.
class TierState {
public:
    struct LoadStats {
        std::uint64_t new_bytes = 0;
        std::size_t newly_loaded = 0;
    };

    TierState(std::size_t dim, std::size_t precision_bytes)
        : dim_(dim), precision_bytes_(precision_bytes) {}

    std::uint64_t bytes_per_token() const {
        return static_cast<std::uint64_t>(dim_) * precision_bytes_ * 2;
    }

    LoadStats load_regions(std::span<const std::size_t> selection,
                           std::span<const std::size_t> region_sizes) {
        LoadStats stats;
        for (std::size_t id : selection) {
            if (id >= region_sizes.size())
                throw IndexError("TierState::load_regions: region id " + std::to_string(id) +
                                 " out of range");
            if (resident_.count(id)) continue;
            resident_.insert(id);
            stats.new_bytes += region_sizes[id] * bytes_per_token();
            stats.newly_loaded += 1;
        }
        total_bytes_transferred_ += stats.new_bytes;
        total_load_events_ += stats.newly_loaded;
        return stats;
    }

    void reset_residency() { resident_.clear(); }

    bool resident(std::size_t region_id) const { return resident_.count(region_id) != 0; }
    std::size_t resident_count() const { return resident_.size(); }
    std::uint64_t total_bytes_transferred() const { return total_bytes_transferred_; }
    std::uint64_t total_load_events() const { return total_load_events_; }

private:
    std::size_t dim_;
    std::size_t precision_bytes_;
    std::set<std::size_t> resident_;
    std::uint64_t total_bytes_transferred_ = 0;
    std::uint64_t total_load_events_ = 0;
};

inline std::vector<std::size_t> region_sizes(const std::vector<Region>& regions) {
    std::vector<std::size_t> sizes(regions.size());
    for (std::size_t g = 0; g < regions.size(); ++g) sizes[g] = regions[g].token_indices.size();
    return sizes;
}

// Cache snapshot file: little-endian binary with header
//   magic "GZKV" | u32 version | u32 layer | u32 head | u64 N | u32 d |
//   u32 precision_bytes
// followed by row-major keys (N*d), row-major values (N*d), N segment
// bytes, and N little-endian int32 unit ids. Element width follows the
// precision field (8 = double, 4 = float).
inline constexpr char kCacheSnapshotMagic[4] = {'G', 'Z', 'K', 'V'};
inline constexpr std::uint32_t kCacheSnapshotVersion = 1;

template <class T>
inline void write_cache_snapshot(const std::string& path, const LayerHeadCache<T>& cache) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_cache_snapshot: cannot open " + path);
    out.write(kCacheSnapshotMagic, 4);
    write_u32_le(out, kCacheSnapshotVersion);
    write_u32_le(out, static_cast<std::uint32_t>(cache.layer()));
    write_u32_le(out, static_cast<std::uint32_t>(cache.head()));
    write_u64_le(out, cache.size());
    write_u32_le(out, static_cast<std::uint32_t>(cache.dim()));
    write_u32_le(out, static_cast<std::uint32_t>(sizeof(T)));
    const auto write_row = [&out](std::span<const T> row) {
        for (T v : row) {
            if constexpr (sizeof(T) == 8)
                write_f64_le(out, static_cast<double>(v));
            else
                write_f32_le(out, static_cast<float>(v));
        }
    };
    for (std::size_t i = 0; i < cache.size(); ++i) write_row(cache.key_row(i));
    for (std::size_t i = 0; i < cache.size(); ++i) write_row(cache.value_row(i));
    for (std::size_t i = 0; i < cache.size(); ++i) {
        const char b = static_cast<char>(cache.segment(i));
        out.write(&b, 1);
    }
    for (std::size_t i = 0; i < cache.size(); ++i) write_i32_le(out, cache.unit_id(i));
    if (!out) throw IoError("write_cache_snapshot: write failed for " + path);
}

template <class T = double>
inline LayerHeadCache<T> read_cache_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_cache_snapshot: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCacheSnapshotMagic, 4) != 0)
        throw IoError("read_cache_snapshot: bad magic in " + path);
    const std::uint32_t version = read_u32_le(in);
    if (version != kCacheSnapshotVersion)
        throw IoError("read_cache_snapshot: unsupported version " + std::to_string(version));
    const std::uint32_t layer = read_u32_le(in);
    const std::uint32_t head = read_u32_le(in);
    const std::uint64_t n = read_u64_le(in);
    const std::uint32_t dim = read_u32_le(in);
    const std::uint32_t precision = read_u32_le(in);
    if (precision != sizeof(T))
        throw IoError("read_cache_snapshot: precision " + std::to_string(precision) +
                      " does not match requested element width");
    LayerHeadCache<T> cache(layer, head, dim);
    Mat<T> keys(static_cast<std::size_t>(n), dim);
    Mat<T> values(static_cast<std::size_t>(n), dim);
    const auto read_value = [&in]() -> T {
        if constexpr (sizeof(T) == 8)
            return static_cast<T>(read_f64_le(in));
        else
            return static_cast<T>(read_f32_le(in));
    };
    for (auto& v : keys.flat()) v = read_value();
    for (auto& v : values.flat()) v = read_value();
    std::vector<Segment> segments(n);
    for (auto& s : segments) {
        char b;
        if (!in.read(&b, 1)) throw IoError("read_cache_snapshot: truncated segments");
        s = static_cast<Segment>(b);
    }
    std::vector<std::int32_t> units(n);
    for (auto& u : units) u = read_i32_le(in);
    for (std::size_t i = 0; i < n; ++i)
        cache.append(keys.row(i), values.row(i), segments[i], units[i]);
    return cache;
}

}  // namespace gaze
