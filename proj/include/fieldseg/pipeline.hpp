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
#include <limits>
#include <optional>
#include <set>

#include <json.hpp>

#include "fieldseg/boundary.hpp"
#include "fieldseg/canny.hpp"
#include "fieldseg/preprocess.hpp"
#include "fieldseg/raster.hpp"
#include "fieldseg/snic.hpp"

namespace fieldseg {

struct PipelineParams {
    SnicParams snic;
    CannyParams canny;
    int close_kernel = 3;
    int64_t min_area_px = 50;
    std::set<int> cloud_bits = {10, 11};
    int qa_band = -1;    // -1 = no QA band present
    int red_band = -1;   // -1 = pick by band count
    int nir_band = -1;
    double min_contrast = 0.1;   // 0 keeps every cluster interface
    bool auto_threshold = false;
    double threshold_q_low = 0.90;
    double threshold_q_high = 0.97;

    void validate() const {
        snic.validate();
        canny.validate();
        if (close_kernel < 1 || close_kernel % 2 == 0)
            throw Error("close kernel must be odd and >= 1");
        if (min_area_px < 0) throw Error("min area must be >= 0");
        if (min_contrast < 0) throw Error("min contrast must be >= 0");
    }
};

/// The six workflow parameters, serialized under their canonical names.
inline nlohmann::json paper_param_json(const PipelineParams& p = PipelineParams{}) {
    return nlohmann::json{{"size", p.snic.size},
                          {"compactness", p.snic.compactness},
                          {"sigma", p.canny.sigma},
                          {"low", p.canny.low_threshold},
                          {"high", p.canny.high_threshold},
                          {"close_kernel", p.close_kernel}};
}

/// Precomputed stage inputs; a set field skips the stages that produce it.
struct StageOverrides {
    std::optional<Raster> ndvi;
    std::optional<Mask> snic_boundaries;
    std::optional<Mask> edges;
};

struct PipelineResult {
    Raster ndvi{1, 1, 1};
    LabelImage labels;
    Mask snic_boundaries;
    Mask edges;
    Mask fused;
    Mask closed;
    LabelImage regions;
    FieldSet fields;
    double low_used = 0;
    double high_used = 0;
};

/// Full chain: QA mask -> NDVI -> SNIC -> cluster boundaries -> Canny ->
/// fuse -> close -> extract. A single-band input with no QA band is taken
/// to be NDVI already.
inline PipelineResult run_pipeline(const Raster& input, const PipelineParams& params,
                                   const StageOverrides& overrides = {}) {
    params.validate();
    PipelineResult res;

    if (overrides.ndvi) {
        res.ndvi = *overrides.ndvi;
    } else {
        Raster working = input;
        if (params.qa_band >= 0) {
            if (params.qa_band >= input.bands) throw Error("QA band index out of range");
            Raster qa = input.extract_band(params.qa_band);
            working = Raster(input.width, input.height, input.bands - 1);
            working.gt = input.gt;
            working.nodata_value = input.nodata_value;
            working.nodata = input.nodata;
            int out_b = 0;
            for (int b = 0; b < input.bands; ++b) {
                if (b == params.qa_band) continue;
                auto src = input.band(b);
                std::copy(src.begin(), src.end(),
                          working.data.begin() + static_cast<size_t>(out_b) * working.pixel_count());
                ++out_b;
            }
            working = apply_qa_mask(working, qa, params.cloud_bits);
        }
        if (working.bands == 1) {
            res.ndvi = working;
        } else {
            int red = params.red_band, nir = params.nir_band;
            if (red < 0 || nir < 0) {
                auto [dr, dn] = default_red_nir(working.bands);
                if (red < 0) red = dr;
                if (nir < 0) nir = dn;
            }
            res.ndvi = compute_ndvi(working, red, nir);
        }
    }

    if (overrides.snic_boundaries) {
        res.snic_boundaries = *overrides.snic_boundaries;
        if (res.snic_boundaries.width != res.ndvi.width ||
            res.snic_boundaries.height != res.ndvi.height)
            throw Error("boundary override dimensions do not match input");
    } else {
        res.labels = snic_segment(res.ndvi, params.snic);
        res.snic_boundaries = contrast_boundaries(res.labels, params.min_contrast);
    }

    res.low_used = params.canny.low_threshold;
    res.high_used = params.canny.high_threshold;
    if (overrides.edges) {
        res.edges = *overrides.edges;
        if (res.edges.width != res.ndvi.width || res.edges.height != res.ndvi.height)
            throw Error("edge override dimensions do not match input");
    } else if (params.auto_threshold) {
        Raster smoothed = gaussian_smooth(res.ndvi, params.canny.sigma);
        GradientField g = gradient(smoothed);
        auto [lo, hi] =
            percentile_thresholds(g.magnitude, params.threshold_q_low, params.threshold_q_high);
        res.low_used = lo;
        res.high_used = hi;
        res.edges = hysteresis(g.magnitude, nms_suppress(g), lo, hi);
    } else {
        res.edges = canny_edges(res.ndvi, params.canny);
    }

    res.fused = fuse(res.snic_boundaries, res.edges);
    res.closed = morph_close(res.fused, params.close_kernel);
    res.closed.nodata = res.ndvi.nodata;
    res.closed.gt = res.ndvi.gt;
    auto [regions, fields] = extract_fields(res.closed, params.min_area_px);
    res.regions = std::move(regions);
    res.fields = std::move(fields);
    return res;
}

/// Binary mask as a one-band 0/1 raster for BSQ persistence.
inline Raster mask_to_raster(const Mask& m) {
    Raster out(m.width, m.height, 1);
    out.gt = m.gt;
    for (size_t p = 0; p < m.data.size(); ++p) out.data[p] = m.data[p] ? 1.0f : 0.0f;
    return out;
}

inline Mask raster_to_mask(const Raster& r) {
    if (r.bands != 1) throw Error("raster_to_mask: expected single band");
    Mask out(r.width, r.height);
    out.gt = r.gt;
    for (size_t p = 0; p < out.data.size(); ++p) {
        out.data[p] = (!r.nodata[p] && r.data[p] != 0.0f) ? 1 : 0;
        out.nodata[p] = r.nodata[p];
    }
    return out;
}

/// Labels as a one-band raster; -1 entries become NaN/nodata. Exact for
/// label values below 2^24.
inline Raster labels_to_raster(const LabelImage& li) {
    Raster out(li.width, li.height, 1);
    out.gt = li.gt;
    for (size_t p = 0; p < li.labels.size(); ++p) {
        if (li.labels[p] < 0) {
            out.data[p] = std::numeric_limits<float>::quiet_NaN();
            out.nodata[p] = 1;
        } else {
            out.data[p] = static_cast<float>(li.labels[p]);
        }
    }
    return out;
}

inline LabelImage raster_to_labels(const Raster& r) {
    if (r.bands != 1) throw Error("raster_to_labels: expected single band");
    LabelImage out(r.width, r.height);
    out.gt = r.gt;
    int32_t max_label = -1;
    for (size_t p = 0; p < out.labels.size(); ++p) {
        if (r.nodata[p]) continue;
        out.labels[p] = static_cast<int32_t>(std::llround(r.data[p]));
        max_label = std::max(max_label, out.labels[p]);
    }
    out.cluster_count = max_label + 1;
    out.cluster_sizes.assign(static_cast<size_t>(out.cluster_count), 0);
    for (int32_t lab : out.labels)
        if (lab >= 0) ++out.cluster_sizes[lab];
    return out;
}

}  // namespace fieldseg
