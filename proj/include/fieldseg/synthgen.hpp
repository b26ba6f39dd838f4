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
#include <random>
#include <vector>

#include "fieldseg/fields.hpp"
#include "fieldseg/raster.hpp"

namespace fieldseg {

/// Rectangular-grid test scene. Field base values cycle through four phases
/// of [value_low, value_high] so that 4-neighboring fields always differ by
/// at least (value_high - value_low) / 3.
struct SceneSpec {
    int width = 512;
    int height = 512;
    int grid_cols = 4;
    int grid_rows = 4;
    double value_low = 0.05;
    double value_high = 0.95;
    double noise_sigma = 0.02;
    int boundary_width = 0;  // 0 = hard step; k = box-blur radius k transition
    uint64_t rng_seed = 0;

    double neighbor_gap() const { return (value_high - value_low) / 3.0; }

    void validate() const {
        if (width < 1 || height < 1) throw Error("scene dimensions must be >= 1");
        if (grid_cols < 1 || grid_rows < 1) throw Error("grid must be >= 1x1");
        if (grid_cols > width || grid_rows > height)
            throw Error("grid finer than the pixel raster");
        if (noise_sigma < 0) throw Error("noise sigma must be >= 0");
        if (boundary_width < 0) throw Error("boundary width must be >= 0");
        if (value_high < value_low) throw Error("value range is inverted");
        if (value_low < -1 || value_high > 1) throw Error("values must lie in [-1, 1]");
        if (grid_cols * grid_rows > 1 && neighbor_gap() < 4.0 * noise_sigma)
            throw Error("neighbor value gap must be >= 4 * noise_sigma");
    }
};

struct Scene {
    Raster ndvi;
    FieldSet truth;
};

namespace synthdetail {

// Deterministic standard normals independent of the standard library's
// distribution implementation.
class BoxMuller {
  public:
    explicit BoxMuller(uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

  private:
    double uniform01() {
        return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    std::mt19937_64 rng_;
    double spare_ = 0;
    bool have_ = false;
};

// Four-phase value assignment: horizontal neighbors differ by one step,
// vertical neighbors by two, so every 4-adjacent pair differs.
inline double field_value(const SceneSpec& spec, int gc, int gr) {
    int phase = (gc % 2) + 2 * (gr % 2);
    return spec.value_low + phase * (spec.value_high - spec.value_low) / 3.0;
}

inline std::vector<int> grid_edges(int extent, int cells) {
    std::vector<int> e(cells + 1);
    for (int i = 0; i <= cells; ++i)
        e[i] = static_cast<int>(static_cast<int64_t>(i) * extent / cells);
    return e;
}

}  // namespace synthdetail

/// Builds the scene raster and its exact ground-truth rectangles. The same
/// spec and seed always produce the identical raster.
inline Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    const int w = spec.width, h = spec.height;
    auto xs = synthdetail::grid_edges(w, spec.grid_cols);
    auto ys = synthdetail::grid_edges(h, spec.grid_rows);

    Scene scene{Raster(w, h, 1), FieldSet{}};
    scene.ndvi.gt = GeoTransform{};
    std::vector<float> base(static_cast<size_t>(w) * h);
    for (int gr = 0; gr < spec.grid_rows; ++gr) {
        for (int gc = 0; gc < spec.grid_cols; ++gc) {
            float v = static_cast<float>(synthdetail::field_value(spec, gc, gr));
            for (int r = ys[gr]; r < ys[gr + 1]; ++r)
                for (int c = xs[gc]; c < xs[gc + 1]; ++c)
                    base[static_cast<size_t>(r) * w + c] = v;
        }
    }

    if (spec.boundary_width > 0) {
        const int rad = spec.boundary_width;
        auto pass = [&](const std::vector<float>& in, bool horizontal) {
            std::vector<float> out(in.size());
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    double acc = 0;
                    int n = 0;
                    for (int i = -rad; i <= rad; ++i) {
                        int rr = horizontal ? r : r + i;
                        int cc = horizontal ? c + i : c;
                        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                        acc += in[static_cast<size_t>(rr) * w + cc];
                        ++n;
                    }
                    out[static_cast<size_t>(r) * w + c] = static_cast<float>(acc / n);
                }
            }
            return out;
        };
        base = pass(pass(base, true), false);
    }

    synthdetail::BoxMuller noise(spec.rng_seed);
    for (size_t p = 0; p < base.size(); ++p) {
        double v = base[p];
        if (spec.noise_sigma > 0) v += spec.noise_sigma * noise.next();
        scene.ndvi.data[p] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }

    scene.truth.width = w;
    scene.truth.height = h;
    scene.truth.gt = scene.ndvi.gt;
    scene.truth.space = CoordSpace::pixel;
    for (int gr = 0; gr < spec.grid_rows; ++gr) {
        for (int gc = 0; gc < spec.grid_cols; ++gc) {
            FieldPolygon poly;
            poly.field_id = gr * spec.grid_cols + gc;
            double x0 = xs[gc], x1 = xs[gc + 1];
            double y0 = ys[gr], y1 = ys[gr + 1];
            poly.exterior = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
            poly.area_px = static_cast<int64_t>((x1 - x0) * (y1 - y0));
            poly.area_geo = static_cast<double>(poly.area_px);
            scene.truth.polygons.push_back(std::move(poly));
        }
    }
    return scene;
}

}  // namespace fieldseg
