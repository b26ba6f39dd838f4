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

#include <cmath>
#include <queue>
#include <vector>

#include "fieldseg/raster.hpp"

namespace fieldseg {

struct SnicParams {
    int size = 15;           // seed spacing in pixels
    double compactness = 0.5;
    int connectivity = 4;    // 4 or 8

    void validate() const {
        if (size < 2) throw Error("size must be >= 2");
        if (compactness < 0) throw Error("compactness must be >= 0");
        if (connectivity != 4 && connectivity != 8)
            throw Error("connectivity must be 4 or 8");
    }
};

/// Growth counters; push/pop bounds hold the linear-complexity invariant.
struct SnicStats {
    uint64_t pops = 0;
    uint64_t pushes = 0;
    uint64_t labeled = 0;
    uint64_t orphans = 0;  // pixels labeled by the unseeded-component sweep
};

struct Seed {
    int col = 0;
    int row = 0;
};

/// Regular seed grid at (floor(s/2) + i*s, floor(s/2) + j*s). A seed on a
/// nodata pixel moves to the nearest valid pixel within Euclidean radius
/// floor(s/2) (row-major tie-break) or is dropped. Seeds relocated onto the
/// same pixel are deduplicated, keeping the first.
inline std::vector<Seed> seed_grid(int width, int height, int size,
                                   const std::vector<uint8_t>& nodata = {}) {
    if (size < 2) throw Error("size must be >= 2");
    if (width < 1 || height < 1) throw Error("seed_grid: empty raster");
    const bool masked = !nodata.empty();
    if (masked && nodata.size() != static_cast<size_t>(width) * height)
        throw Error("seed_grid: mask size mismatch");

    auto is_valid = [&](int r, int c) {
        return !masked || nodata[static_cast<size_t>(r) * width + c] == 0;
    };

    std::vector<Seed> seeds;
    std::vector<uint8_t> taken(static_cast<size_t>(width) * height, 0);
    const int half = size / 2;
    for (int row = half; row < height; row += size) {
        for (int col = half; col < width; col += size) {
            int br = row, bc = col;
            if (!is_valid(row, col)) {
                long best = -1;
                for (int r = std::max(0, row - half); r <= std::min(height - 1, row + half); ++r) {
                    for (int c = std::max(0, col - half); c <= std::min(width - 1, col + half);
                         ++c) {
                        if (!is_valid(r, c)) continue;
                        long d2 = static_cast<long>(r - row) * (r - row) +
                                  static_cast<long>(c - col) * (c - col);
                        if (d2 > static_cast<long>(half) * half) continue;
                        if (best < 0 || d2 < best) {
                            best = d2;
                            br = r;
                            bc = c;
                        }
                    }
                }
                if (best < 0) continue;
            }
            size_t p = static_cast<size_t>(br) * width + bc;
            if (taken[p]) continue;
            taken[p] = 1;
            seeds.push_back({bc, br});
        }
    }
    return seeds;
}

namespace snicdetail {

struct Candidate {
    double dist;
    uint64_t seq;
    int32_t pixel;
    int32_t cluster;
};

struct CandidateOrder {
    bool operator()(const Candidate& a, const Candidate& b) const {
        if (a.dist != b.dist) return a.dist > b.dist;
        return a.seq > b.seq;
    }
};

inline constexpr int kOffsets[8][2] = {{-1, 0}, {1, 0},  {0, -1}, {0, 1},
                                       {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

}  // namespace snicdetail

/// SNIC region growing: one priority-queue pass over (pixel, cluster)
/// candidates keyed by the joint spatial-spectral distance
///   d = sqrt(|pos - centroid|^2 / s^2 + |color - mean|^2 / m^2),  m = compactness.
/// compactness 0 degenerates to pure spectral distance. Centroids and means
/// update online as pixels are claimed. Nodata pixels are never labeled or
/// queued. Valid pixels in components no seed can reach are swept into fresh
/// clusters afterwards so the labeling always partitions the valid area.
inline LabelImage snic_segment(const Raster& image, const SnicParams& params,
                               SnicStats* stats = nullptr) {
    params.validate();
    if (image.bands < 1) throw Error("snic_segment: image must have >= 1 band");

    const int w = image.width, h = image.height, nb = image.bands;
    const size_t np = image.pixel_count();
    LabelImage out(w, h);
    out.gt = image.gt;
    SnicStats local;
    SnicStats& st = stats ? *stats : local;
    st = SnicStats{};

    auto seeds = seed_grid(w, h, params.size, image.nodata);
    const int k0 = static_cast<int>(seeds.size());

    std::vector<double> cx(k0), cy(k0);
    std::vector<int64_t> csize(k0, 0);
    std::vector<std::vector<double>> cmean(k0, std::vector<double>(nb, 0.0));

    auto pixel_vec = [&](size_t p, std::vector<double>& v) {
        for (int b = 0; b < nb; ++b) v[b] = image.data[static_cast<size_t>(b) * np + p];
    };

    const double s2 = static_cast<double>(params.size) * params.size;
    const double m2 = params.compactness * params.compactness;
    std::vector<double> pv(nb);
    auto distance = [&](int col, int row, size_t p, int k) {
        pixel_vec(p, pv);
        double dc = 0;
        for (int b = 0; b < nb; ++b) {
            double d = pv[b] - cmean[k][b];
            dc += d * d;
        }
        if (m2 == 0.0) return std::sqrt(dc);
        double dx = col - cx[k], dy = row - cy[k];
        return std::sqrt((dx * dx + dy * dy) / s2 + dc / m2);
    };

    std::priority_queue<snicdetail::Candidate, std::vector<snicdetail::Candidate>,
                        snicdetail::CandidateOrder>
        queue;
    uint64_t seq = 0;
    for (int k = 0; k < k0; ++k) {
        cx[k] = seeds[k].col;
        cy[k] = seeds[k].row;
        size_t p = static_cast<size_t>(seeds[k].row) * w + seeds[k].col;
        queue.push({0.0, seq++, static_cast<int32_t>(p), k});
        ++st.pushes;
    }

    while (!queue.empty()) {
        auto cand = queue.top();
        queue.pop();
        ++st.pops;
        size_t p = static_cast<size_t>(cand.pixel);
        if (out.labels[p] >= 0) continue;
        int k = cand.cluster;
        out.labels[p] = k;
        ++st.labeled;

        int row = static_cast<int>(p / w), col = static_cast<int>(p % w);
        pixel_vec(p, pv);
        double n = static_cast<double>(csize[k]);
        for (int b = 0; b < nb; ++b) cmean[k][b] = (cmean[k][b] * n + pv[b]) / (n + 1);
        cx[k] = (cx[k] * n + col) / (n + 1);
        cy[k] = (cy[k] * n + row) / (n + 1);
        ++csize[k];

        for (int o = 0; o < params.connectivity; ++o) {
            int nr = row + snicdetail::kOffsets[o][0];
            int nc = col + snicdetail::kOffsets[o][1];
            if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
            size_t q = static_cast<size_t>(nr) * w + nc;
            if (image.nodata[q] || out.labels[q] >= 0) continue;
            queue.push({distance(nc, nr, q, k), seq++, static_cast<int32_t>(q), k});
            ++st.pushes;
        }
    }

    // Sweep valid pixels unreachable from any seed (components whose seeds
    // were all dropped) into clusters of their own.
    int next = k0;
    std::vector<int32_t> bfs;
    for (size_t p0 = 0; p0 < np; ++p0) {
        if (image.nodata[p0] || out.labels[p0] >= 0) continue;
        int k = next++;
        cx.push_back(0);
        cy.push_back(0);
        csize.push_back(0);
        cmean.emplace_back(nb, 0.0);
        bfs.assign(1, static_cast<int32_t>(p0));
        out.labels[p0] = k;
        for (size_t i = 0; i < bfs.size(); ++i) {
            size_t p = static_cast<size_t>(bfs[i]);
            int row = static_cast<int>(p / w), col = static_cast<int>(p % w);
            pixel_vec(p, pv);
            double n = static_cast<double>(csize[k]);
            for (int b = 0; b < nb; ++b) cmean[k][b] = (cmean[k][b] * n + pv[b]) / (n + 1);
            cx[k] = (cx[k] * n + col) / (n + 1);
            cy[k] = (cy[k] * n + row) / (n + 1);
            ++csize[k];
            ++st.orphans;
            for (int o = 0; o < params.connectivity; ++o) {
                int nr = row + snicdetail::kOffsets[o][0];
                int nc = col + snicdetail::kOffsets[o][1];
                if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                size_t q = static_cast<size_t>(nr) * w + nc;
                if (image.nodata[q] || out.labels[q] >= 0) continue;
                out.labels[q] = k;
                bfs.push_back(static_cast<int32_t>(q));
            }
        }
    }

    out.cluster_count = next;
    out.cluster_means = std::move(cmean);
    out.cluster_sizes = std::move(csize);
    return out;
}

}  // namespace fieldseg
