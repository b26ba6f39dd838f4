// Copyright (c) 2026 the fieldseg authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fieldseg {

static_assert(std::endian::native == std::endian::little,
              "fieldseg assumes a little-endian host");

/// Error thrown by all fieldseg operations on contract violations and I/O failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Affine map from pixel indices to geographic coordinates.
///
/// geo(col, row) = (origin_x + col * pixel_size_x, origin_y + row * pixel_size_y).
/// pixel_size_y is negative for north-up rasters. When `identity` is set the
/// raster lives in plain pixel space and coordinates pass through unchanged.
struct GeoTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size_x = 1.0;
    double pixel_size_y = 1.0;
    bool identity = true;

    static GeoTransform make(double ox, double oy, double psx, double psy) {
        if (psx == 0.0 || psy == 0.0)
            throw Error("GeoTransform: pixel size must be nonzero");
        GeoTransform gt;
        gt.origin_x = ox;
        gt.origin_y = oy;
        gt.pixel_size_x = psx;
        gt.pixel_size_y = psy;
        gt.identity = (ox == 0.0 && oy == 0.0 && psx == 1.0 && psy == 1.0);
        return gt;
    }

    std::pair<double, double> geo(double col, double row) const {
        if (identity) return {col, row};
        return {origin_x + col * pixel_size_x, origin_y + row * pixel_size_y};
    }

    std::pair<double, double> pixel(double x, double y) const {
        if (identity) return {x, y};
        return {(x - origin_x) / pixel_size_x, (y - origin_y) / pixel_size_y};
    }

    /// Geographic area of one pixel, always positive.
    double pixel_area() const { return std::abs(pixel_size_x * pixel_size_y); }

    bool operator==(const GeoTransform&) const = default;
};

/// Multiband float32 raster with a per-pixel validity mask.
///
/// Band data is stored band-sequential, row-major within each band. Pixels
/// flagged in `nodata` are invalid and must be skipped by every consumer;
/// their stored values are preserved verbatim for bit-exact round-trips but
/// carry no meaning.
struct Raster {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::vector<float> data;      // bands * width * height
    std::vector<uint8_t> nodata;  // width * height, 1 = invalid
    GeoTransform gt;
    std::optional<float> nodata_value;  // explicit file-level nodata, if any

    Raster() = default;

    Raster(int w, int h, int b, float fill = 0.0f) : width(w), height(h), bands(b) {
        if (w < 1 || h < 1 || b < 1)
            throw Error("Raster: width, height and bands must be >= 1");
        data.assign(static_cast<size_t>(b) * w * h, fill);
        nodata.assign(static_cast<size_t>(w) * h, 0);
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    size_t idx(int row, int col) const { return static_cast<size_t>(row) * width + col; }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }

    float at(int band, int row, int col) const {
        return data[static_cast<size_t>(band) * pixel_count() + idx(row, col)];
    }

    float& at(int band, int row, int col) {
        return data[static_cast<size_t>(band) * pixel_count() + idx(row, col)];
    }

    bool valid(int row, int col) const { return nodata[idx(row, col)] == 0; }

    void set_nodata(int row, int col) { nodata[idx(row, col)] = 1; }

    std::span<const float> band(int b) const {
        return {data.data() + static_cast<size_t>(b) * pixel_count(), pixel_count()};
    }

    std::span<float> band(int b) {
        return {data.data() + static_cast<size_t>(b) * pixel_count(), pixel_count()};
    }

    /// Copy of band `b` as a single-band raster sharing mask and geotransform.
    Raster extract_band(int b) const {
        if (b < 0 || b >= bands) throw Error("extract_band: band index out of range");
        Raster out(width, height, 1);
        auto src = band(b);
        std::copy(src.begin(), src.end(), out.data.begin());
        out.nodata = nodata;
        out.gt = gt;
        return out;
    }

    /// Marks every non-finite value and every value equal to `nodata_value`
    /// as invalid. Called after filling `data` from a file.
    void refresh_mask_from_values() {
        size_t np = pixel_count();
        for (size_t p = 0; p < np; ++p) {
            bool bad = false;
            for (int b = 0; b < bands && !bad; ++b) {
                float v = data[static_cast<size_t>(b) * np + p];
                if (!std::isfinite(v)) bad = true;
                if (nodata_value && v == *nodata_value) bad = true;
            }
            if (bad) nodata[p] = 1;
        }
    }
};

/// Binary per-pixel raster. Used for both Canny edge masks and fused
/// boundary masks; carries the source nodata mask and geotransform so
/// downstream stages can keep excluding invalid pixels.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;    // 1 = set
    std::vector<uint8_t> nodata;  // 1 = invalid in the source raster
    GeoTransform gt;

    Mask() = default;

    Mask(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) throw Error("Mask: dimensions must be >= 1");
        data.assign(static_cast<size_t>(w) * h, 0);
        nodata.assign(static_cast<size_t>(w) * h, 0);
    }

    size_t idx(int row, int col) const { return static_cast<size_t>(row) * width + col; }

    bool get(int row, int col) const { return data[idx(row, col)] != 0; }
    void set(int row, int col, bool v = true) { data[idx(row, col)] = v ? 1 : 0; }
    bool valid(int row, int col) const { return nodata[idx(row, col)] == 0; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += (v != 0);
        return n;
    }
};

using EdgeMask = Mask;
using BoundaryMask = Mask;

/// Per-pixel region labeling. Label -1 marks nodata or filtered pixels;
/// valid labels are dense in [0, cluster_count). `cluster_means` holds the
/// mean spectral vector per label (empty when the labeling has no spectral
/// source, e.g. connected components of a binary mask).
struct LabelImage {
    int width = 0;
    int height = 0;
    std::vector<int32_t> labels;
    int cluster_count = 0;
    std::vector<std::vector<double>> cluster_means;
    std::vector<int64_t> cluster_sizes;
    GeoTransform gt;

    LabelImage() = default;

    LabelImage(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) throw Error("LabelImage: dimensions must be >= 1");
        labels.assign(static_cast<size_t>(w) * h, -1);
    }

    size_t idx(int row, int col) const { return static_cast<size_t>(row) * width + col; }

    int32_t label(int row, int col) const { return labels[idx(row, col)]; }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }
};

namespace detail {

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open file: " + path);
    f.seekg(0, std::ios::end);
    std::streamoff n = f.tellg();
    f.seekg(0, std::ios::beg);
    std::vector<uint8_t> buf(static_cast<size_t>(n));
    if (n > 0) f.read(reinterpret_cast<char*>(buf.data()), n);
    if (!f) throw Error("short read: " + path);
    return buf;
}

inline void write_file_bytes(const std::string& path, const void* data, size_t n) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open file for writing: " + path);
    f.write(reinterpret_cast<const char*>(data), static_cast<std::streamoff>(n));
    if (!f) throw Error("short write: " + path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BSQ test format: raw band-sequential float32 little-endian payload plus a
// JSON sidecar at <path>.json holding {width, height, bands, nodata_value,
// geotransform}. The payload round-trips bit-exactly.
// ---------------------------------------------------------------------------

inline std::string bsq_sidecar_path(const std::string& path) { return path + ".json"; }

inline void write_bsq(const Raster& r, const std::string& path) {
    if (r.width < 1 || r.height < 1 || r.bands < 1)
        throw Error("write_bsq: empty raster");
    detail::write_file_bytes(path, r.data.data(), r.data.size() * sizeof(float));

    nlohmann::json side;
    side["width"] = r.width;
    side["height"] = r.height;
    side["bands"] = r.bands;
    if (r.nodata_value)
        side["nodata_value"] = *r.nodata_value;
    else
        side["nodata_value"] = nullptr;
    if (r.gt.identity) {
        side["geotransform"] = nullptr;
    } else {
        side["geotransform"] = {{"origin_x", r.gt.origin_x},
                                {"origin_y", r.gt.origin_y},
                                {"pixel_size_x", r.gt.pixel_size_x},
                                {"pixel_size_y", r.gt.pixel_size_y}};
    }
    std::string text = side.dump(2);
    text.push_back('\n');
    detail::write_file_bytes(bsq_sidecar_path(path), text.data(), text.size());
}

inline Raster read_bsq(const std::string& path) {
    nlohmann::json side;
    {
        auto bytes = detail::read_file_bytes(bsq_sidecar_path(path));
        side = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, true);
    }
    int w = side.at("width").get<int>();
    int h = side.at("height").get<int>();
    int b = side.at("bands").get<int>();
    if (w < 1 || h < 1 || b < 1) throw Error("read_bsq: invalid dimensions in sidecar");

    Raster r(w, h, b);
    if (side.contains("nodata_value") && !side["nodata_value"].is_null())
        r.nodata_value = side["nodata_value"].get<float>();
    if (side.contains("geotransform") && !side["geotransform"].is_null()) {
        const auto& g = side["geotransform"];
        r.gt = GeoTransform::make(g.at("origin_x").get<double>(), g.at("origin_y").get<double>(),
                                  g.at("pixel_size_x").get<double>(),
                                  g.at("pixel_size_y").get<double>());
    }

    auto bytes = detail::read_file_bytes(path);
    size_t expected = static_cast<size_t>(b) * w * h * sizeof(float);
    if (bytes.size() != expected)
        throw Error("read_bsq: payload size " + std::to_string(bytes.size()) +
                    " does not match sidecar dimensions (" + std::to_string(expected) + ")");
    std::memcpy(r.data.data(), bytes.data(), expected);
    r.refresh_mask_from_values();
    return r;
}

}  // namespace fieldseg
