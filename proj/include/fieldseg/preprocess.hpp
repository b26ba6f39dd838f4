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
#include <cmath>
#include <limits>
#include <set>

#include "fieldseg/raster.hpp"

namespace fieldseg {

/// QA60-style cloud bits: 10 = opaque cloud, 11 = cirrus.
inline const std::set<int>& default_cloud_bits() {
    static const std::set<int> bits = {10, 11};
    return bits;
}

/// Marks every pixel whose QA value has any of the given bits set as nodata.
/// QA values are read as non-negative integers; all other pixels pass
/// through unchanged.
inline Raster apply_qa_mask(const Raster& image, const Raster& qa,
                            const std::set<int>& cloud_bits = default_cloud_bits()) {
    if (qa.width != image.width || qa.height != image.height)
        throw Error("apply_qa_mask: QA dimensions do not match image");
    if (qa.bands != 1) throw Error("apply_qa_mask: QA raster must be single-band");

    uint64_t bitmask = 0;
    for (int b : cloud_bits) {
        if (b < 0 || b > 63) throw Error("apply_qa_mask: cloud bit out of range");
        bitmask |= uint64_t{1} << b;
    }

    Raster out = image;
    auto qv = qa.band(0);
    size_t np = image.pixel_count();
    for (size_t p = 0; p < np; ++p) {
        if (qa.nodata[p]) continue;
        double v = qv[p];
        if (v < 0) continue;
        uint64_t q = static_cast<uint64_t>(std::llround(v));
        if ((q & bitmask) == 0) continue;
        out.nodata[p] = 1;
        for (int b = 0; b < out.bands; ++b) {
            out.data[static_cast<size_t>(b) * np + p] =
                out.nodata_value ? *out.nodata_value : std::numeric_limits<float>::quiet_NaN();
        }
    }
    return out;
}

/// Picks default red/NIR band indices by band count: a 4+ band stack is
/// assumed to be B2,B3,B4,B8 order (red = index 2, NIR = index 3); a 2-band
/// stack is (red, nir). Anything else needs explicit indices.
inline std::pair<int, int> default_red_nir(int bands) {
    if (bands >= 4) return {2, 3};
    if (bands == 2) return {0, 1};
    throw Error("band roles ambiguous for " + std::to_string(bands) +
                "-band input; set red/NIR band indices explicitly");
}

/// NDVI = (nir - red) / (nir + red), clamped to [-1, 1]. Pixels where
/// either band is nodata, or where red + nir = 0, become nodata (NaN).
inline Raster compute_ndvi(const Raster& image, int red_band, int nir_band) {
    if (red_band < 0 || red_band >= image.bands || nir_band < 0 || nir_band >= image.bands)
        throw Error("compute_ndvi: band index out of range");

    Raster out(image.width, image.height, 1);
    out.gt = image.gt;
    auto red = image.band(red_band);
    auto nir = image.band(nir_band);
    size_t np = image.pixel_count();
    for (size_t p = 0; p < np; ++p) {
        double r = red[p], n = nir[p];
        if (image.nodata[p] || r + n == 0.0) {
            out.data[p] = std::numeric_limits<float>::quiet_NaN();
            out.nodata[p] = 1;
        } else {
            double v = (n - r) / (n + r);
            out.data[p] = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    }
    return out;
}

/// Two-raster convenience form for pre-split band files.
inline Raster compute_ndvi(const Raster& red, const Raster& nir) {
    if (red.width != nir.width || red.height != nir.height)
        throw Error("compute_ndvi: red and NIR dimensions do not match");
    if (red.bands != 1 || nir.bands != 1)
        throw Error("compute_ndvi: expected single-band red and NIR rasters");
    Raster stacked(red.width, red.height, 2);
    stacked.gt = red.gt;
    size_t np = red.pixel_count();
    std::copy(red.data.begin(), red.data.end(), stacked.data.begin());
    std::copy(nir.data.begin(), nir.data.end(), stacked.data.begin() + np);
    for (size_t p = 0; p < np; ++p)
        stacked.nodata[p] = (red.nodata[p] || nir.nodata[p]) ? 1 : 0;
    return compute_ndvi(stacked, 0, 1);
}

}  // namespace fieldseg
