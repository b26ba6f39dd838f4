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
#include <map>
#include <vector>

#include "fieldseg/fields.hpp"
#include "fieldseg/raster.hpp"

namespace fieldseg {

/// Marks labeled pixels with any 4-neighbor carrying a different label
/// (nodata counts as different). The image border alone is not a boundary.
inline Mask label_boundaries(const LabelImage& labels) {
    Mask out(labels.width, labels.height);
    out.gt = labels.gt;
    const int w = labels.width, h = labels.height;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t p = static_cast<size_t>(r) * w + c;
            int32_t lab = labels.labels[p];
            if (lab < 0) {
                out.nodata[p] = 1;
                continue;
            }
            bool edge = (r > 0 && labels.labels[p - w] != lab) ||
                        (r + 1 < h && labels.labels[p + w] != lab) ||
                        (c > 0 && labels.labels[p - 1] != lab) ||
                        (c + 1 < w && labels.labels[p + 1] != lab);
            if (edge) out.data[p] = 1;
        }
    }
    return out;
}

/// Like label_boundaries, but an interface between two labeled clusters only
/// counts when their mean vectors differ by Euclidean norm >= min_contrast.
/// Interfaces against nodata always count. min_contrast 0 reproduces
/// label_boundaries exactly.
inline Mask contrast_boundaries(const LabelImage& labels, double min_contrast) {
    if (min_contrast < 0) throw Error("min_contrast must be >= 0");
    Mask out(labels.width, labels.height);
    out.gt = labels.gt;
    const int w = labels.width, h = labels.height;

    auto mean_gap = [&](int32_t a, int32_t b) {
        const auto& ma = labels.cluster_means[a];
        const auto& mb = labels.cluster_means[b];
        double s = 0;
        for (size_t i = 0; i < ma.size(); ++i) {
            double d = ma[i] - mb[i];
            s += d * d;
        }
        return std::sqrt(s);
    };
    auto differs = [&](int32_t lab, int32_t other) {
        if (other == lab) return false;
        if (other < 0) return true;
        return mean_gap(lab, other) >= min_contrast;
    };

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t p = static_cast<size_t>(r) * w + c;
            int32_t lab = labels.labels[p];
            if (lab < 0) {
                out.nodata[p] = 1;
                continue;
            }
            bool edge = (r > 0 && differs(lab, labels.labels[p - w])) ||
                        (r + 1 < h && differs(lab, labels.labels[p + w])) ||
                        (c > 0 && differs(lab, labels.labels[p - 1])) ||
                        (c + 1 < w && differs(lab, labels.labels[p + 1]));
            if (edge) out.data[p] = 1;
        }
    }
    return out;
}

/// Per-pixel OR of the two masks; nodata is the union of the inputs'.
inline Mask fuse(const Mask& snic_b, const Mask& canny_e) {
    if (snic_b.width != canny_e.width || snic_b.height != canny_e.height)
        throw Error("fuse: mask dimensions do not match");
    Mask out = snic_b;
    for (size_t p = 0; p < out.data.size(); ++p) {
        out.data[p] = (snic_b.data[p] || canny_e.data[p]) ? 1 : 0;
        out.nodata[p] = (snic_b.nodata[p] || canny_e.nodata[p]) ? 1 : 0;
    }
    return out;
}

/// Closing by a kernel x kernel square: dilation (out-of-image reads false)
/// then erosion (out-of-image reads true, so the result never shrinks below
/// the input at borders).
inline Mask morph_close(const Mask& mask, int kernel = 3) {
    if (kernel < 1 || kernel % 2 == 0) throw Error("close kernel must be odd and >= 1");
    const int w = mask.width, h = mask.height, rad = kernel / 2;

    Mask dilated = mask;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            bool any = false;
            for (int dr = -rad; dr <= rad && !any; ++dr) {
                int rr = r + dr;
                if (rr < 0 || rr >= h) continue;
                for (int dc = -rad; dc <= rad; ++dc) {
                    int cc = c + dc;
                    if (cc < 0 || cc >= w) continue;
                    if (mask.data[static_cast<size_t>(rr) * w + cc]) {
                        any = true;
                        break;
                    }
                }
            }
            dilated.data[static_cast<size_t>(r) * w + c] = any ? 1 : 0;
        }
    }

    Mask out = mask;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            bool all = true;
            for (int dr = -rad; dr <= rad && all; ++dr) {
                int rr = r + dr;
                if (rr < 0 || rr >= h) continue;
                for (int dc = -rad; dc <= rad; ++dc) {
                    int cc = c + dc;
                    if (cc < 0 || cc >= w) continue;
                    if (!dilated.data[static_cast<size_t>(rr) * w + cc]) {
                        all = false;
                        break;
                    }
                }
            }
            out.data[static_cast<size_t>(r) * w + c] = all ? 1 : 0;
        }
    }
    return out;
}

namespace tracedetail {

// Directed unit segment between pixel corners, region kept on the left.
// Directions: 0 = +x, 1 = +y, 2 = -x, 3 = -y.
struct Crack {
    int x, y, dir;
};

inline int step_x(int dir) { return dir == 0 ? 1 : dir == 2 ? -1 : 0; }
inline int step_y(int dir) { return dir == 1 ? 1 : dir == 3 ? -1 : 0; }

// Assembles all cracks of one region into closed rings. At corners where
// two outgoing cracks meet (diagonal pinch), the walk takes the rightmost
// turn, producing a single self-touching ring instead of crossing curves.
inline std::vector<Ring> trace_region(const std::vector<Crack>& cracks, int width) {
    auto corner_key = [width](int x, int y) {
        return static_cast<int64_t>(y) * (width + 1) + x;
    };
    std::map<int64_t, std::array<int, 4>> outgoing;  // corner -> crack index per dir
    for (size_t i = 0; i < cracks.size(); ++i) {
        auto key = corner_key(cracks[i].x, cracks[i].y);
        auto it = outgoing.find(key);
        if (it == outgoing.end()) {
            std::array<int, 4> slot;
            slot.fill(-1);
            it = outgoing.emplace(key, slot).first;
        }
        it->second[cracks[i].dir] = static_cast<int>(i);
    }

    std::vector<uint8_t> used(cracks.size(), 0);
    std::vector<Ring> rings;
    for (size_t start = 0; start < cracks.size(); ++start) {
        if (used[start]) continue;
        Ring ring;
        size_t cur = start;
        while (!used[cur]) {
            used[cur] = 1;
            const Crack& ck = cracks[cur];
            ring.push_back({static_cast<double>(ck.x), static_cast<double>(ck.y)});
            int nx = ck.x + step_x(ck.dir);
            int ny = ck.y + step_y(ck.dir);
            const auto& slots = outgoing.at(corner_key(nx, ny));
            // right turn first, then straight, then left
            int next = -1;
            for (int turn : {3, 0, 1}) {
                int d = (ck.dir + turn) % 4;
                if (slots[d] >= 0 && !used[slots[d]]) {
                    next = slots[d];
                    break;
                }
            }
            if (next < 0) break;  // ring closed back to start
            cur = static_cast<size_t>(next);
        }
        ring.push_back(ring.front());
        rings.push_back(std::move(ring));
    }
    return rings;
}

// Drops interior vertices of straight runs, keeping the closing vertex.
inline Ring merge_collinear(const Ring& ring) {
    size_t n = ring.size() - 1;  // last repeats first
    Ring out;
    for (size_t i = 0; i < n; ++i) {
        const auto& prev = ring[(i + n - 1) % n];
        const auto& cur = ring[i];
        const auto& next = ring[(i + 1) % n];
        double cross = (cur[0] - prev[0]) * (next[1] - cur[1]) -
                       (cur[1] - prev[1]) * (next[0] - cur[0]);
        if (cross != 0) out.push_back(cur);
    }
    // rotate to the lexicographically smallest vertex for stable output
    size_t best = 0;
    for (size_t i = 1; i < out.size(); ++i)
        if (out[i][1] < out[best][1] || (out[i][1] == out[best][1] && out[i][0] < out[best][0]))
            best = i;
    std::rotate(out.begin(), out.begin() + best, out.end());
    out.push_back(out.front());
    return out;
}

}  // namespace tracedetail

/// Connected components (4-connectivity) of non-boundary, non-nodata pixels,
/// filtered by min_area_px, then vectorized by tracing the pixel-corner
/// cracks of each component. Exterior rings close counter-clockwise
/// (positive shoelace in (col,row) coordinates), holes clockwise.
inline std::pair<LabelImage, FieldSet> extract_fields(const Mask& boundaries,
                                                      int64_t min_area_px = 50) {
    const int w = boundaries.width, h = boundaries.height;
    const size_t np = boundaries.data.size();
    LabelImage regions(w, h);
    regions.gt = boundaries.gt;

    auto candidate = [&](size_t p) { return !boundaries.data[p] && !boundaries.nodata[p]; };

    // first pass: provisional components
    std::vector<int32_t> comp(np, -1);
    std::vector<int64_t> comp_size;
    std::vector<int32_t> stack;
    for (size_t p0 = 0; p0 < np; ++p0) {
        if (comp[p0] >= 0 || !candidate(p0)) continue;
        int32_t k = static_cast<int32_t>(comp_size.size());
        comp_size.push_back(0);
        comp[p0] = k;
        stack.assign(1, static_cast<int32_t>(p0));
        while (!stack.empty()) {
            size_t p = static_cast<size_t>(stack.back());
            stack.pop_back();
            ++comp_size[k];
            int r = static_cast<int>(p / w), c = static_cast<int>(p % w);
            const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (auto& n : nbr) {
                if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
                size_t q = static_cast<size_t>(n[0]) * w + n[1];
                if (comp[q] >= 0 || !candidate(q)) continue;
                comp[q] = k;
                stack.push_back(static_cast<int32_t>(q));
            }
        }
    }

    // keep components meeting the area floor, renumber densely
    std::vector<int32_t> remap(comp_size.size(), -1);
    int32_t next = 0;
    for (size_t k = 0; k < comp_size.size(); ++k)
        if (comp_size[k] >= min_area_px) remap[k] = next++;
    regions.cluster_count = next;
    regions.cluster_sizes.assign(next, 0);
    for (size_t p = 0; p < np; ++p) {
        if (comp[p] < 0) continue;
        int32_t k = remap[comp[p]];
        regions.labels[p] = k;
        if (k >= 0) ++regions.cluster_sizes[k];
    }

    // cracks per region, generated in row-major pixel order
    std::vector<std::vector<tracedetail::Crack>> cracks(next);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            int32_t k = regions.labels[static_cast<size_t>(r) * w + c];
            if (k < 0) continue;
            auto same = [&](int rr, int cc) {
                return rr >= 0 && rr < h && cc >= 0 && cc < w &&
                       regions.labels[static_cast<size_t>(rr) * w + cc] == k;
            };
            if (!same(r - 1, c)) cracks[k].push_back({c, r, 0});          // top, +x
            if (!same(r, c + 1)) cracks[k].push_back({c + 1, r, 1});      // right, +y
            if (!same(r + 1, c)) cracks[k].push_back({c + 1, r + 1, 2});  // bottom, -x
            if (!same(r, c - 1)) cracks[k].push_back({c, r + 1, 3});      // left, -y
        }
    }

    FieldSet fields;
    fields.width = w;
    fields.height = h;
    fields.gt = boundaries.gt;
    fields.space = CoordSpace::pixel;
    double px_area = std::abs(boundaries.gt.pixel_area());
    for (int32_t k = 0; k < next; ++k) {
        FieldPolygon poly;
        poly.field_id = k;
        poly.area_px = regions.cluster_sizes[k];
        poly.area_geo = static_cast<double>(poly.area_px) * px_area;
        auto rings = tracedetail::trace_region(cracks[k], w);
        for (auto& ring : rings) {
            Ring merged = tracedetail::merge_collinear(ring);
            if (ring_signed_area(merged) > 0)
                poly.exterior = std::move(merged);
            else
                poly.holes.push_back(std::move(merged));
        }
        if (poly.exterior.empty()) throw Error("extract_fields: region with no exterior ring");
        fields.polygons.push_back(std::move(poly));
    }
    return {std::move(regions), std::move(fields)};
}

}  // namespace fieldseg
