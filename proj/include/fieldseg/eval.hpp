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
#include <iostream>
#include <map>
#include <vector>

#include <json.hpp>

#include "fieldseg/fields.hpp"
#include "fieldseg/raster.hpp"

namespace fieldseg {

namespace evaldetail {

// Even-odd crossing count of a horizontal ray from (x, y) towards +x.
inline bool point_in_rings(double x, double y, const FieldPolygon& poly) {
    int crossings = 0;
    auto count_ring = [&](const Ring& ring) {
        for (size_t i = 0; i + 1 < ring.size(); ++i) {
            double x1 = ring[i][0], y1 = ring[i][1];
            double x2 = ring[i + 1][0], y2 = ring[i + 1][1];
            if ((y1 > y) == (y2 > y)) continue;
            double xc = x1 + (y - y1) / (y2 - y1) * (x2 - x1);
            if (xc > x) ++crossings;
        }
    };
    count_ring(poly.exterior);
    for (const auto& h : poly.holes) count_ring(h);
    return (crossings % 2) == 1;
}

}  // namespace evaldetail

/// Paints each polygon's pixel-center coverage (even-odd rule) with the
/// polygon's index. Geo-space polygons are converted through the
/// geotransform first. Overlapping polygons are an error; a polygon that
/// covers no pixel centers gets a warning on stderr.
inline LabelImage rasterize(const FieldSet& fs, int width, int height, const GeoTransform& gt) {
    LabelImage out(width, height);
    out.gt = gt;
    out.cluster_count = static_cast<int>(fs.polygons.size());
    out.cluster_sizes.assign(fs.polygons.size(), 0);

    for (size_t i = 0; i < fs.polygons.size(); ++i) {
        FieldPolygon poly = fs.polygons[i];
        if (fs.space == CoordSpace::geo) {
            auto to_px = [&](Ring& ring) {
                for (auto& pt : ring) {
                    auto [col, row] = gt.pixel(pt[0], pt[1]);
                    pt = {col, row};
                }
            };
            to_px(poly.exterior);
            for (auto& h : poly.holes) to_px(h);
        }

        double min_x = poly.exterior[0][0], max_x = min_x;
        double min_y = poly.exterior[0][1], max_y = min_y;
        for (const auto& pt : poly.exterior) {
            min_x = std::min(min_x, pt[0]);
            max_x = std::max(max_x, pt[0]);
            min_y = std::min(min_y, pt[1]);
            max_y = std::max(max_y, pt[1]);
        }
        int c0 = std::max(0, static_cast<int>(std::floor(min_x)));
        int c1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)));
        int r0 = std::max(0, static_cast<int>(std::floor(min_y)));
        int r1 = std::min(height - 1, static_cast<int>(std::ceil(max_y)));

        int64_t painted = 0;
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                if (!evaldetail::point_in_rings(c + 0.5, r + 0.5, poly)) continue;
                size_t p = static_cast<size_t>(r) * width + c;
                if (out.labels[p] >= 0)
                    throw Error("rasterize: overlapping polygons at field_id " +
                                std::to_string(poly.field_id));
                out.labels[p] = static_cast<int32_t>(i);
                ++painted;
            }
        }
        out.cluster_sizes[i] = painted;
        if (painted == 0)
            std::cerr << "warning: polygon field_id " << poly.field_id
                      << " covers no pixel centers\n";
    }
    return out;
}

/// |a AND b| / |a OR b| over the set bits; 0 when both masks are empty.
inline double iou(const Mask& a, const Mask& b) {
    if (a.width != b.width || a.height != b.height)
        throw Error("iou: mask dimensions do not match");
    size_t inter = 0, uni = 0;
    for (size_t p = 0; p < a.data.size(); ++p) {
        bool av = a.data[p] != 0, bv = b.data[p] != 0;
        inter += (av && bv);
        uni += (av || bv);
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct FieldMatch {
    int32_t pred_id;
    int32_t truth_id;
    double iou;
};

struct EvalReport {
    double mean_matched_iou = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double boundary_precision = 0;
    double boundary_recall = 0;
    double boundary_f1 = 0;
    std::vector<FieldMatch> matches;
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json m = nlohmann::json::array();
        for (const auto& x : matches)
            m.push_back({{"pred_id", x.pred_id}, {"truth_id", x.truth_id}, {"iou", x.iou}});
        return nlohmann::json{{"mean_matched_iou", mean_matched_iou},
                              {"precision", precision},
                              {"recall", recall},
                              {"f1", f1},
                              {"boundary_precision", boundary_precision},
                              {"boundary_recall", boundary_recall},
                              {"boundary_f1", boundary_f1},
                              {"matches", m},
                              {"params", params}};
    }
};

/// Greedy one-to-one matching by descending pairwise IoU (ties broken by
/// (pred_id, truth_id)) among pairs at or above the threshold. Counts come
/// from cluster_count so zero-pixel fields still enter the denominators.
inline EvalReport match_fields(const LabelImage& pred, const LabelImage& truth,
                               double iou_threshold = 0.5) {
    if (pred.width != truth.width || pred.height != truth.height)
        throw Error("match_fields: dimensions do not match");

    const int pc = pred.cluster_count, tc = truth.cluster_count;
    std::vector<int64_t> psize(pc, 0), tsize(tc, 0);
    std::map<std::pair<int32_t, int32_t>, int64_t> inter;
    for (size_t p = 0; p < pred.labels.size(); ++p) {
        int32_t pl = pred.labels[p], tl = truth.labels[p];
        if (pl >= 0) ++psize[pl];
        if (tl >= 0) ++tsize[tl];
        if (pl >= 0 && tl >= 0) ++inter[{pl, tl}];
    }

    std::vector<FieldMatch> pairs;
    for (const auto& [key, n] : inter) {
        double u = static_cast<double>(psize[key.first] + tsize[key.second] - n);
        double v = u > 0 ? n / u : 0.0;
        if (v >= iou_threshold) pairs.push_back({key.first, key.second, v});
    }
    std::sort(pairs.begin(), pairs.end(), [](const FieldMatch& a, const FieldMatch& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.pred_id != b.pred_id) return a.pred_id < b.pred_id;
        return a.truth_id < b.truth_id;
    });

    EvalReport rep;
    std::vector<uint8_t> pused(pc, 0), tused(tc, 0);
    double iou_sum = 0;
    for (const auto& pr : pairs) {
        if (pused[pr.pred_id] || tused[pr.truth_id]) continue;
        pused[pr.pred_id] = tused[pr.truth_id] = 1;
        rep.matches.push_back(pr);
        iou_sum += pr.iou;
    }
    size_t n = rep.matches.size();
    rep.mean_matched_iou = n ? iou_sum / static_cast<double>(n) : 0.0;
    rep.precision = pc > 0 ? static_cast<double>(n) / pc : 0.0;
    rep.recall = tc > 0 ? static_cast<double>(n) / tc : 0.0;
    rep.f1 = (rep.precision + rep.recall) > 0
                 ? 2 * rep.precision * rep.recall / (rep.precision + rep.recall)
                 : 0.0;
    return rep;
}

struct BoundaryScore {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

namespace evaldetail {

// Chebyshev dilation by `tol`: exact, so it-*is*-the brute force answer.
inline std::vector<uint8_t> dilate_cheby(const Mask& m, int tol) {
    std::vector<uint8_t> out(m.data.size(), 0);
    const int w = m.width, h = m.height;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (!m.data[static_cast<size_t>(r) * w + c]) continue;
            for (int dr = -tol; dr <= tol; ++dr) {
                int rr = r + dr;
                if (rr < 0 || rr >= h) continue;
                for (int dc = -tol; dc <= tol; ++dc) {
                    int cc = c + dc;
                    if (cc < 0 || cc >= w) continue;
                    out[static_cast<size_t>(rr) * w + cc] = 1;
                }
            }
        }
    return out;
}

}  // namespace evaldetail

/// Fraction of predicted boundary pixels within Chebyshev distance `tol` of
/// a truth pixel (precision) and vice versa (recall); 0 when the respective
/// denominator is empty.
inline BoundaryScore boundary_metrics(const Mask& pred, const Mask& truth, int tolerance_px = 2) {
    if (pred.width != truth.width || pred.height != truth.height)
        throw Error("boundary_metrics: dimensions do not match");
    if (tolerance_px < 0) throw Error("boundary_metrics: tolerance must be >= 0");

    auto truth_zone = evaldetail::dilate_cheby(truth, tolerance_px);
    auto pred_zone = evaldetail::dilate_cheby(pred, tolerance_px);
    size_t pn = 0, phit = 0, tn = 0, thit = 0;
    for (size_t p = 0; p < pred.data.size(); ++p) {
        if (pred.data[p]) {
            ++pn;
            phit += truth_zone[p];
        }
        if (truth.data[p]) {
            ++tn;
            thit += pred_zone[p];
        }
    }
    BoundaryScore s;
    s.precision = pn ? static_cast<double>(phit) / pn : 0.0;
    s.recall = tn ? static_cast<double>(thit) / tn : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    return s;
}

}  // namespace fieldseg
