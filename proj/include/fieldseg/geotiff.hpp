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

#include <cctype>
#include <cstdlib>
#include <map>

#include <zlib.h>

#include "fieldseg/raster.hpp"

namespace fieldseg {

/// Options for GeoTIFF ingestion. uint16 samples are interpreted as scaled
/// surface reflectance and divided by `reflectance_scale` (the Sentinel-2
/// L2A convention); float32 samples pass through unchanged.
struct GeoTiffOptions {
    float reflectance_scale = 10000.0f;
};

namespace tiffdetail {

// Deliberately narrow classic-TIFF support: uint16/float32 samples,
// uncompressed or deflate, striped or tiled, chunky or planar. Anything
// else is rejected with a descriptive error rather than guessed at.

constexpr uint16_t TAG_IMAGE_WIDTH = 256;
constexpr uint16_t TAG_IMAGE_LENGTH = 257;
constexpr uint16_t TAG_BITS_PER_SAMPLE = 258;
constexpr uint16_t TAG_COMPRESSION = 259;
constexpr uint16_t TAG_STRIP_OFFSETS = 273;
constexpr uint16_t TAG_SAMPLES_PER_PIXEL = 277;
constexpr uint16_t TAG_ROWS_PER_STRIP = 278;
constexpr uint16_t TAG_STRIP_BYTE_COUNTS = 279;
constexpr uint16_t TAG_PLANAR_CONFIG = 284;
constexpr uint16_t TAG_PREDICTOR = 317;
constexpr uint16_t TAG_TILE_WIDTH = 322;
constexpr uint16_t TAG_TILE_LENGTH = 323;
constexpr uint16_t TAG_TILE_OFFSETS = 324;
constexpr uint16_t TAG_TILE_BYTE_COUNTS = 325;
constexpr uint16_t TAG_SAMPLE_FORMAT = 339;
constexpr uint16_t TAG_MODEL_PIXEL_SCALE = 33550;
constexpr uint16_t TAG_MODEL_TIEPOINT = 33922;
constexpr uint16_t TAG_MODEL_TRANSFORMATION = 34264;
constexpr uint16_t TAG_GDAL_NODATA = 42113;

struct Entry {
    uint16_t type = 0;
    uint32_t count = 0;
    std::vector<double> values;  // numeric types
    std::string ascii;           // ASCII type
};

class Reader {
public:
    Reader(const std::vector<uint8_t>& buf, bool swap) : buf_(buf), swap_(swap) {}

    uint16_t u16(size_t off) const {
        check(off, 2);
        uint16_t v;
        std::memcpy(&v, buf_.data() + off, 2);
        return swap_ ? __builtin_bswap16(v) : v;
    }

    uint32_t u32(size_t off) const {
        check(off, 4);
        uint32_t v;
        std::memcpy(&v, buf_.data() + off, 4);
        return swap_ ? __builtin_bswap32(v) : v;
    }

    float f32(size_t off) const {
        uint32_t v = u32(off);
        return std::bit_cast<float>(v);
    }

    double f64(size_t off) const {
        check(off, 8);
        uint64_t v;
        std::memcpy(&v, buf_.data() + off, 8);
        if (swap_) v = __builtin_bswap64(v);
        return std::bit_cast<double>(v);
    }

    const uint8_t* at(size_t off, size_t n) const {
        check(off, n);
        return buf_.data() + off;
    }

    size_t size() const { return buf_.size(); }
    bool swapped() const { return swap_; }

private:
    void check(size_t off, size_t n) const {
        if (off + n > buf_.size()) throw Error("GeoTIFF: truncated file");
    }
    const std::vector<uint8_t>& buf_;
    bool swap_;
};

inline size_t type_size(uint16_t type) {
    switch (type) {
        case 1: case 2: case 6: case 7: return 1;   // BYTE, ASCII, SBYTE, UNDEFINED
        case 3: case 8: return 2;                   // SHORT, SSHORT
        case 4: case 9: case 11: return 4;          // LONG, SLONG, FLOAT
        case 5: case 10: case 12: return 8;         // RATIONAL, SRATIONAL, DOUBLE
        default: return 0;
    }
}

inline Entry parse_entry(const Reader& r, size_t off) {
    Entry e;
    e.type = r.u16(off + 2);
    e.count = r.u32(off + 4);
    size_t ts = type_size(e.type);
    if (ts == 0) return e;  // unknown type, ignore
    size_t total = ts * e.count;
    size_t val_off = (total <= 4) ? off + 8 : r.u32(off + 8);

    if (e.type == 2) {
        const uint8_t* p = r.at(val_off, e.count);
        e.ascii.assign(reinterpret_cast<const char*>(p), e.count);
        while (!e.ascii.empty() && e.ascii.back() == '\0') e.ascii.pop_back();
        return e;
    }
    e.values.reserve(e.count);
    for (uint32_t i = 0; i < e.count; ++i) {
        size_t o = val_off + i * ts;
        switch (e.type) {
            case 1: case 7: e.values.push_back(*r.at(o, 1)); break;
            case 3: e.values.push_back(r.u16(o)); break;
            case 4: e.values.push_back(r.u32(o)); break;
            case 5: {
                double num = r.u32(o), den = r.u32(o + 4);
                e.values.push_back(den != 0 ? num / den : 0.0);
                break;
            }
            case 11: e.values.push_back(r.f32(o)); break;
            case 12: e.values.push_back(r.f64(o)); break;
            default: e.values.push_back(0.0); break;
        }
    }
    return e;
}

using Ifd = std::map<uint16_t, Entry>;

inline std::vector<uint8_t> inflate_block(const uint8_t* src, size_t n, size_t expected) {
    std::vector<uint8_t> out(expected);
    uLongf dst_len = static_cast<uLongf>(expected);
    int rc = ::uncompress(out.data(), &dst_len, src, static_cast<uLong>(n));
    if (rc != Z_OK) throw Error("GeoTIFF: deflate decompression failed");
    out.resize(dst_len);
    return out;
}

inline void swap_samples(std::vector<uint8_t>& bytes, size_t sample_bytes) {
    if (sample_bytes == 2) {
        for (size_t i = 0; i + 1 < bytes.size(); i += 2) std::swap(bytes[i], bytes[i + 1]);
    } else if (sample_bytes == 4) {
        for (size_t i = 0; i + 3 < bytes.size(); i += 4) {
            std::swap(bytes[i], bytes[i + 3]);
            std::swap(bytes[i + 1], bytes[i + 2]);
        }
    }
}

struct IfdImage {
    int width = 0, height = 0, samples = 1;
    std::vector<std::vector<float>> planes;  // one per sample
};

inline double tag_value(const Ifd& ifd, uint16_t tag, double fallback) {
    auto it = ifd.find(tag);
    if (it == ifd.end() || it->second.values.empty()) return fallback;
    return it->second.values[0];
}

// Decodes one IFD into per-sample float planes.
inline IfdImage decode_ifd(const Reader& r, const Ifd& ifd, const GeoTiffOptions& opt) {
    IfdImage img;
    img.width = static_cast<int>(tag_value(ifd, TAG_IMAGE_WIDTH, 0));
    img.height = static_cast<int>(tag_value(ifd, TAG_IMAGE_LENGTH, 0));
    if (img.width < 1 || img.height < 1) throw Error("GeoTIFF: missing image dimensions");

    img.samples = static_cast<int>(tag_value(ifd, TAG_SAMPLES_PER_PIXEL, 1));
    int compression = static_cast<int>(tag_value(ifd, TAG_COMPRESSION, 1));
    int planar = static_cast<int>(tag_value(ifd, TAG_PLANAR_CONFIG, 1));
    int predictor = static_cast<int>(tag_value(ifd, TAG_PREDICTOR, 1));
    int sample_format = static_cast<int>(tag_value(ifd, TAG_SAMPLE_FORMAT, 1));
    int bits = static_cast<int>(tag_value(ifd, TAG_BITS_PER_SAMPLE, 1));

    if (compression != 1 && compression != 8 && compression != 32946)
        throw Error("GeoTIFF: unsupported compression " + std::to_string(compression) +
                    " (only none and deflate are supported)");
    if (predictor != 1)
        throw Error("GeoTIFF: unsupported predictor " + std::to_string(predictor));

    bool is_u16 = (sample_format == 1 && bits == 16);
    bool is_f32 = (sample_format == 3 && bits == 32);
    if (!is_u16 && !is_f32)
        throw Error("GeoTIFF: unsupported sample type (sample_format=" +
                    std::to_string(sample_format) + ", bits=" + std::to_string(bits) +
                    "); only uint16 and float32 are supported");
    size_t sample_bytes = is_u16 ? 2 : 4;

    img.planes.assign(img.samples,
                      std::vector<float>(static_cast<size_t>(img.width) * img.height, 0.0f));

    bool tiled = ifd.count(TAG_TILE_OFFSETS) > 0;
    const Entry* offsets;
    const Entry* counts;
    if (tiled) {
        offsets = &ifd.at(TAG_TILE_OFFSETS);
        if (!ifd.count(TAG_TILE_BYTE_COUNTS)) throw Error("GeoTIFF: missing TileByteCounts");
        counts = &ifd.at(TAG_TILE_BYTE_COUNTS);
    } else {
        if (!ifd.count(TAG_STRIP_OFFSETS)) throw Error("GeoTIFF: missing StripOffsets");
        offsets = &ifd.at(TAG_STRIP_OFFSETS);
        if (!ifd.count(TAG_STRIP_BYTE_COUNTS)) throw Error("GeoTIFF: missing StripByteCounts");
        counts = &ifd.at(TAG_STRIP_BYTE_COUNTS);
    }
    if (offsets->values.size() != counts->values.size())
        throw Error("GeoTIFF: offset/bytecount tag length mismatch");

    auto convert = [&](const uint8_t* p) -> float {
        if (is_u16) {
            uint16_t v;
            std::memcpy(&v, p, 2);
            return static_cast<float>(v) / opt.reflectance_scale;
        }
        float v;
        std::memcpy(&v, p, 4);
        return v;
    };

    // Fetches block i, decompressed and byte-swapped to host order.
    auto fetch_block = [&](size_t i, size_t expected) {
        size_t off = static_cast<size_t>(offsets->values[i]);
        size_t len = static_cast<size_t>(counts->values[i]);
        std::vector<uint8_t> block;
        if (compression == 1) {
            const uint8_t* p = r.at(off, len);
            block.assign(p, p + len);
        } else {
            block = inflate_block(r.at(off, len), len, expected);
        }
        if (block.size() < expected)
            throw Error("GeoTIFF: data block shorter than expected");
        if (r.swapped()) swap_samples(block, sample_bytes);
        return block;
    };

    if (!tiled) {
        size_t rows_per_strip = static_cast<size_t>(
            tag_value(ifd, TAG_ROWS_PER_STRIP, static_cast<double>(img.height)));
        if (rows_per_strip == 0) rows_per_strip = img.height;
        size_t strips_per_plane = (img.height + rows_per_strip - 1) / rows_per_strip;
        size_t nstrips = offsets->values.size();
        bool strip_planar = (planar == 2 && img.samples > 1);
        size_t expected_strips = strip_planar ? strips_per_plane * img.samples : strips_per_plane;
        if (nstrips != expected_strips)
            throw Error("GeoTIFF: unexpected strip count");

        for (size_t s = 0; s < nstrips; ++s) {
            size_t plane0 = strip_planar ? s / strips_per_plane : 0;
            size_t strip_in_plane = strip_planar ? s % strips_per_plane : s;
            size_t row0 = strip_in_plane * rows_per_strip;
            size_t nrows = std::min(rows_per_strip, static_cast<size_t>(img.height) - row0);
            size_t vals_per_px = strip_planar ? 1 : static_cast<size_t>(img.samples);
            size_t expected = nrows * img.width * vals_per_px * sample_bytes;
            auto block = fetch_block(s, expected);
            const uint8_t* p = block.data();
            for (size_t row = row0; row < row0 + nrows; ++row) {
                for (int col = 0; col < img.width; ++col) {
                    size_t px = row * img.width + col;
                    if (strip_planar) {
                        img.planes[plane0][px] = convert(p);
                        p += sample_bytes;
                    } else {
                        for (int smp = 0; smp < img.samples; ++smp) {
                            img.planes[smp][px] = convert(p);
                            p += sample_bytes;
                        }
                    }
                }
            }
        }
    } else {
        int tw = static_cast<int>(tag_value(ifd, TAG_TILE_WIDTH, 0));
        int th = static_cast<int>(tag_value(ifd, TAG_TILE_LENGTH, 0));
        if (tw < 16 || th < 16 || tw % 16 || th % 16)
            throw Error("GeoTIFF: invalid tile dimensions");
        size_t tiles_x = (img.width + tw - 1) / tw;
        size_t tiles_y = (img.height + th - 1) / th;
        size_t tiles_per_plane = tiles_x * tiles_y;
        bool tile_planar = (planar == 2 && img.samples > 1);
        size_t ntiles = offsets->values.size();
        size_t expected_tiles = tile_planar ? tiles_per_plane * img.samples : tiles_per_plane;
        if (ntiles != expected_tiles)
            throw Error("GeoTIFF: unexpected tile count");

        for (size_t t = 0; t < ntiles; ++t) {
            size_t plane0 = tile_planar ? t / tiles_per_plane : 0;
            size_t tile_in_plane = tile_planar ? t % tiles_per_plane : t;
            size_t ty = tile_in_plane / tiles_x;
            size_t tx = tile_in_plane % tiles_x;
            size_t vals_per_px = tile_planar ? 1 : static_cast<size_t>(img.samples);
            size_t expected = static_cast<size_t>(tw) * th * vals_per_px * sample_bytes;
            auto block = fetch_block(t, expected);
            const uint8_t* p = block.data();
            for (int trow = 0; trow < th; ++trow) {
                for (int tcol = 0; tcol < tw; ++tcol) {
                    size_t row = ty * th + trow;
                    size_t col = tx * tw + tcol;
                    bool inside = row < static_cast<size_t>(img.height) &&
                                  col < static_cast<size_t>(img.width);
                    size_t px = row * img.width + col;
                    if (tile_planar) {
                        if (inside) img.planes[plane0][px] = convert(p);
                        p += sample_bytes;
                    } else {
                        for (int smp = 0; smp < img.samples; ++smp) {
                            if (inside) img.planes[smp][px] = convert(p);
                            p += sample_bytes;
                        }
                    }
                }
            }
        }
    }
    return img;
}

inline GeoTransform geotransform_from_tags(const Ifd& ifd) {
    auto scale_it = ifd.find(TAG_MODEL_PIXEL_SCALE);
    auto tie_it = ifd.find(TAG_MODEL_TIEPOINT);
    if (scale_it != ifd.end() && tie_it != ifd.end() &&
        scale_it->second.values.size() >= 2 && tie_it->second.values.size() >= 5) {
        double sx = scale_it->second.values[0];
        double sy = scale_it->second.values[1];
        const auto& tp = tie_it->second.values;  // i, j, k, x, y, z
        if (sx != 0.0 && sy != 0.0)
            return GeoTransform::make(tp[3] - tp[0] * sx, tp[4] + tp[1] * sy, sx, -sy);
    }
    auto tr_it = ifd.find(TAG_MODEL_TRANSFORMATION);
    if (tr_it != ifd.end() && tr_it->second.values.size() >= 16) {
        const auto& m = tr_it->second.values;  // 4x4 row-major
        if (m[1] != 0.0 || m[4] != 0.0)
            throw Error("GeoTIFF: rotated geotransforms are not supported");
        if (m[0] != 0.0 && m[5] != 0.0)
            return GeoTransform::make(m[3], m[7], m[0], m[5]);
    }
    return GeoTransform{};  // identity
}

}  // namespace tiffdetail

/// Reads a GeoTIFF file into a Raster. Bands come from SamplesPerPixel > 1
/// within one image, from the IFD chain (one image per band), or both.
/// All bands must share dimensions. Missing geo tags yield an identity
/// geotransform; a GDAL_NODATA tag sets the explicit nodata value.
inline Raster read_geotiff(const std::string& path, const GeoTiffOptions& opt = {}) {
    using namespace tiffdetail;
    auto buf = detail::read_file_bytes(path);
    if (buf.size() < 8) throw Error("GeoTIFF: file too small: " + path);

    bool le = buf[0] == 'I' && buf[1] == 'I';
    bool be = buf[0] == 'M' && buf[1] == 'M';
    if (!le && !be) throw Error("GeoTIFF: not a TIFF file: " + path);
    Reader r(buf, be);  // host is little-endian

    uint16_t magic = r.u16(2);
    if (magic == 43) throw Error("GeoTIFF: BigTIFF is not supported");
    if (magic != 42) throw Error("GeoTIFF: bad magic number");

    std::vector<Ifd> ifds;
    size_t ifd_off = r.u32(4);
    while (ifd_off != 0) {
        if (ifds.size() > 512) throw Error("GeoTIFF: IFD chain too long");
        uint16_t n = r.u16(ifd_off);
        Ifd ifd;
        for (uint16_t i = 0; i < n; ++i) {
            size_t eoff = ifd_off + 2 + static_cast<size_t>(i) * 12;
            uint16_t tag = r.u16(eoff);
            ifd[tag] = parse_entry(r, eoff);
        }
        ifds.push_back(std::move(ifd));
        ifd_off = r.u32(ifd_off + 2 + static_cast<size_t>(n) * 12);
    }
    if (ifds.empty()) throw Error("GeoTIFF: no images in file");

    std::vector<IfdImage> images;
    for (const auto& ifd : ifds) images.push_back(decode_ifd(r, ifd, opt));

    int w = images[0].width, h = images[0].height;
    int total_bands = 0;
    for (const auto& img : images) {
        if (img.width != w || img.height != h)
            throw Error("GeoTIFF: band dimension mismatch (" + std::to_string(w) + "x" +
                        std::to_string(h) + " vs " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + ")");
        total_bands += img.samples;
    }

    Raster out(w, h, total_bands);
    int b = 0;
    for (const auto& img : images)
        for (const auto& plane : img.planes)
            std::copy(plane.begin(), plane.end(), out.band(b++).begin());

    out.gt = geotransform_from_tags(ifds[0]);
    auto nd_it = ifds[0].find(TAG_GDAL_NODATA);
    if (nd_it != ifds[0].end() && !nd_it->second.ascii.empty()) {
        const std::string& s = nd_it->second.ascii;
        char* end = nullptr;
        float v = std::strtof(s.c_str(), &end);
        if (end != s.c_str()) out.nodata_value = v;
    }
    out.refresh_mask_from_values();
    return out;
}

/// Raster input formats understood by read_raster.
enum class RasterFormat { geotiff, bsq };

/// Reads a raster file, dispatching on the format hint.
inline Raster read_raster(const std::string& path, RasterFormat format,
                          const GeoTiffOptions& opt = {}) {
    switch (format) {
        case RasterFormat::geotiff: return read_geotiff(path, opt);
        case RasterFormat::bsq: return read_bsq(path);
    }
    throw Error("read_raster: unknown format");
}

/// Guesses the format from the file extension (.tif/.tiff vs anything else).
inline RasterFormat guess_format(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "tif" || ext == "tiff") return RasterFormat::geotiff;
    return RasterFormat::bsq;
}

}  // namespace fieldseg
