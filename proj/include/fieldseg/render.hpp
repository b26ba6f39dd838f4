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

#include <algorithm>
#include <array>
#include <cmath>

#include <zlib.h>

#include "fieldseg/raster.hpp"

namespace fieldseg {

namespace pngdetail {

inline void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_chunk(std::vector<uint8_t>& out, const char type[4],
                      const std::vector<uint8_t>& payload) {
    put_u32_be(out, static_cast<uint32_t>(payload.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uLong crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32_be(out, static_cast<uint32_t>(crc));
}

}  // namespace pngdetail

/// Encodes 8-bit RGB pixels (row-major, 3 bytes per pixel) as a PNG.
/// Fixed filter and compression settings keep the output byte-stable for
/// identical input.
inline std::vector<uint8_t> encode_png_rgb8(int width, int height,
                                            const std::vector<uint8_t>& rgb) {
    if (width < 1 || height < 1) throw Error("encode_png: empty image");
    if (rgb.size() != static_cast<size_t>(width) * height * 3)
        throw Error("encode_png: pixel buffer size mismatch");

    // filter byte 0 (None) per scanline
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(height) * (1 + static_cast<size_t>(width) * 3));
    for (int r = 0; r < height; ++r) {
        raw.push_back(0);
        const uint8_t* row = rgb.data() + static_cast<size_t>(r) * width * 3;
        raw.insert(raw.end(), row, row + static_cast<size_t>(width) * 3);
    }
    uLongf comp_len = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(comp_len);
    if (::compress2(compressed.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()),
                    6) != Z_OK)
        throw Error("encode_png: compression failed");
    compressed.resize(comp_len);

    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<uint8_t> ihdr;
    pngdetail::put_u32_be(ihdr, static_cast<uint32_t>(width));
    pngdetail::put_u32_be(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    pngdetail::put_chunk(out, "IHDR", ihdr);
    pngdetail::put_chunk(out, "IDAT", compressed);
    pngdetail::put_chunk(out, "IEND", {});
    return out;
}

namespace renderdetail {

// Greyscale stretch of band 0 to the 2nd-98th percentile of valid values.
// Constant or fully-masked inputs render mid-grey.
inline std::vector<uint8_t> stretch_grey(const Raster& base) {
    size_t np = base.pixel_count();
    auto b0 = base.band(0);
    std::vector<float> vals;
    vals.reserve(np);
    for (size_t p = 0; p < np; ++p)
        if (base.nodata[p] == 0 && std::isfinite(b0[p])) vals.push_back(b0[p]);

    float lo = 0.0f, hi = 0.0f;
    if (!vals.empty()) {
        std::sort(vals.begin(), vals.end());
        auto q = [&](double f) {
            size_t i = static_cast<size_t>(std::llround(f * static_cast<double>(vals.size() - 1)));
            return vals[i];
        };
        lo = q(0.02);
        hi = q(0.98);
    }

    std::vector<uint8_t> grey(np, 0);
    for (size_t p = 0; p < np; ++p) {
        if (base.nodata[p] != 0 || !std::isfinite(b0[p])) {
            grey[p] = 0;
        } else if (hi <= lo) {
            grey[p] = 128;
        } else {
            double t = (b0[p] - lo) / (hi - lo);
            grey[p] = static_cast<uint8_t>(std::clamp(t, 0.0, 1.0) * 255.0 + 0.5);
        }
    }
    return grey;
}

// Deterministic palette: golden-ratio hue walk keyed on the label id.
inline std::array<uint8_t, 3> label_color(int32_t label) {
    double h = std::fmod(static_cast<double>(label) * 0.61803398874989485, 1.0) * 6.0;
    double s = 0.65, v = 0.95;
    int i = static_cast<int>(h);
    double f = h - i;
    double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r, g, b;
    switch (i % 6) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    return {static_cast<uint8_t>(r * 255 + 0.5), static_cast<uint8_t>(g * 255 + 0.5),
            static_cast<uint8_t>(b * 255 + 0.5)};
}

}  // namespace renderdetail

constexpr std::array<uint8_t, 3> kBoundaryHighlight = {255, 0, 0};

/// Writes a PNG of `base` in stretched greyscale with mask pixels drawn in
/// the fixed highlight color.
inline void render_overlay(const Raster& base, const Mask& mask, const std::string& path) {
    if (mask.width != base.width || mask.height != base.height)
        throw Error("render_overlay: mask dimensions do not match base");
    auto grey = renderdetail::stretch_grey(base);
    size_t np = base.pixel_count();
    std::vector<uint8_t> rgb(np * 3);
    for (size_t p = 0; p < np; ++p) {
        if (mask.data[p]) {
            rgb[p * 3 + 0] = kBoundaryHighlight[0];
            rgb[p * 3 + 1] = kBoundaryHighlight[1];
            rgb[p * 3 + 2] = kBoundaryHighlight[2];
        } else {
            rgb[p * 3 + 0] = rgb[p * 3 + 1] = rgb[p * 3 + 2] = grey[p];
        }
    }
    auto png = encode_png_rgb8(base.width, base.height, rgb);
    detail::write_file_bytes(path, png.data(), png.size());
}

/// Writes a PNG of `base` with each label drawn in a color derived from its
/// id; unlabeled pixels show the greyscale base.
inline void render_overlay(const Raster& base, const LabelImage& labels,
                           const std::string& path) {
    if (labels.width != base.width || labels.height != base.height)
        throw Error("render_overlay: label dimensions do not match base");
    auto grey = renderdetail::stretch_grey(base);
    size_t np = base.pixel_count();
    std::vector<uint8_t> rgb(np * 3);
    for (size_t p = 0; p < np; ++p) {
        int32_t lab = labels.labels[p];
        if (lab >= 0) {
            auto c = renderdetail::label_color(lab);
            rgb[p * 3 + 0] = c[0];
            rgb[p * 3 + 1] = c[1];
            rgb[p * 3 + 2] = c[2];
        } else {
            rgb[p * 3 + 0] = rgb[p * 3 + 1] = rgb[p * 3 + 2] = grey[p];
        }
    }
    auto png = encode_png_rgb8(base.width, base.height, rgb);
    detail::write_file_bytes(path, png.data(), png.size());
}

}  // namespace fieldseg
