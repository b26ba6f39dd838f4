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
#include <vector>

#include "fieldseg/raster.hpp"

namespace fieldseg {

struct CannyParams {
    double sigma = 1.0;
    double low_threshold = 1.5;   // raw Sobel magnitude units
    double high_threshold = 3.0;

    void validate() const {
        if (!(sigma > 0)) throw Error("sigma must be > 0");
        if (low_threshold < 0) throw Error("low threshold must be >= 0");
        if (high_threshold < low_threshold)
            throw Error("high threshold must be >= low threshold");
    }
};

namespace cannydetail {

inline std::vector<double> gaussian_kernel(double sigma) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

// One separable pass. Taps that fall outside the image or on nodata are
// dropped and the kernel renormalized over the remaining support.
inline void smooth_pass(const std::vector<float>& in, const std::vector<uint8_t>& nd, int w,
                        int h, const std::vector<double>& kernel, bool horizontal,
                        std::vector<float>& out, std::vector<uint8_t>& out_nd) {
    const int radius = static_cast<int>(kernel.size() / 2);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t p = static_cast<size_t>(r) * w + c;
            if (nd[p]) {
                out[p] = std::numeric_limits<float>::quiet_NaN();
                out_nd[p] = 1;
                continue;
            }
            double acc = 0, wsum = 0;
            for (int i = -radius; i <= radius; ++i) {
                int rr = horizontal ? r : r + i;
                int cc = horizontal ? c + i : c;
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                size_t q = static_cast<size_t>(rr) * w + cc;
                if (nd[q]) continue;
                acc += kernel[i + radius] * in[q];
                wsum += kernel[i + radius];
            }
            out[p] = static_cast<float>(acc / wsum);
            out_nd[p] = 0;
        }
    }
}

}  // namespace cannydetail

/// Separable Gaussian smoothing, kernel radius ceil(3*sigma), normalized to
/// sum 1. Borders and nodata neighborhoods renormalize over the valid taps;
/// nodata pixels stay nodata.
inline Raster gaussian_smooth(const Raster& image, double sigma) {
    if (!(sigma > 0)) throw Error("sigma must be > 0");
    Raster out = image;
    auto kernel = cannydetail::gaussian_kernel(sigma);
    size_t np = image.pixel_count();
    std::vector<float> tmp(np);
    std::vector<uint8_t> tmp_nd(np);
    for (int b = 0; b < image.bands; ++b) {
        std::vector<float> src(image.band(b).begin(), image.band(b).end());
        cannydetail::smooth_pass(src, image.nodata, image.width, image.height, kernel, true,
                                 tmp, tmp_nd);
        std::vector<float> dst(np);
        std::vector<uint8_t> dst_nd(np);
        cannydetail::smooth_pass(tmp, tmp_nd, image.width, image.height, kernel, false, dst,
                                 dst_nd);
        std::copy(dst.begin(), dst.end(), out.data.begin() + static_cast<size_t>(b) * np);
        if (b == 0) out.nodata = dst_nd;
    }
    return out;
}

/// Sobel gradient of a single-band raster. `dir_bin` quantizes atan2(gy, gx)
/// mod 180 deg into bins {0:0deg, 1:45deg, 2:90deg, 3:135deg}. Pixels whose
/// 3x3 neighborhood touches nodata get nodata magnitude; image borders use
/// edge replication.
struct GradientField {
    Raster magnitude;
    std::vector<float> gx;
    std::vector<float> gy;
    std::vector<uint8_t> dir_bin;   // valid only where magnitude is valid
};

inline GradientField gradient(const Raster& image) {
    if (image.bands != 1) throw Error("gradient: input must be single-band");
    const int w = image.width, h = image.height;
    const size_t np = image.pixel_count();

    GradientField g{Raster(w, h, 1), std::vector<float>(np, 0.0f),
                    std::vector<float>(np, 0.0f), std::vector<uint8_t>(np, 0)};
    g.magnitude.gt = image.gt;

    auto at = [&](int r, int c) {
        r = std::clamp(r, 0, h - 1);
        c = std::clamp(c, 0, w - 1);
        return static_cast<double>(image.data[static_cast<size_t>(r) * w + c]);
    };
    auto bad = [&](int r, int c) {
        return r >= 0 && r < h && c >= 0 && c < w &&
               image.nodata[static_cast<size_t>(r) * w + c] != 0;
    };

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t p = static_cast<size_t>(r) * w + c;
            bool touches_nodata = false;
            for (int dr = -1; dr <= 1 && !touches_nodata; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    if (bad(r + dr, c + dc)) {
                        touches_nodata = true;
                        break;
                    }
            if (touches_nodata) {
                g.magnitude.data[p] = std::numeric_limits<float>::quiet_NaN();
                g.magnitude.nodata[p] = 1;
                continue;
            }
            double gx = (at(r - 1, c + 1) + 2 * at(r, c + 1) + at(r + 1, c + 1)) -
                        (at(r - 1, c - 1) + 2 * at(r, c - 1) + at(r + 1, c - 1));
            double gy = (at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1)) -
                        (at(r - 1, c - 1) + 2 * at(r - 1, c) + at(r - 1, c + 1));
            g.gx[p] = static_cast<float>(gx);
            g.gy[p] = static_cast<float>(gy);
            g.magnitude.data[p] = static_cast<float>(std::sqrt(gx * gx + gy * gy));
            double angle = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
            if (angle < 0) angle += 180.0;
            if (angle >= 180.0) angle -= 180.0;
            g.dir_bin[p] = static_cast<uint8_t>(std::lround(angle / 45.0) % 4);
        }
    }
    return g;
}

namespace cannydetail {

// NMS neighbor offsets (drow, dcol) per direction bin, positive side first.
inline constexpr int kNms[4][2][2] = {
    {{0, 1}, {0, -1}},    // 0 deg: gradient along x, compare left/right
    {{1, 1}, {-1, -1}},   // 45 deg
    {{1, 0}, {-1, 0}},    // 90 deg: compare up/down
    {{1, -1}, {-1, 1}},   // 135 deg
};

}  // namespace cannydetail

/// Keeps pixels that are directional maxima: strictly greater than the
/// positive-side neighbor and >= the negative-side one, so a plateau keeps
/// exactly one pixel per run. Missing neighbors compare as 0.
inline std::vector<uint8_t> nms_suppress(const GradientField& g) {
    const int w = g.magnitude.width, h = g.magnitude.height;
    std::vector<uint8_t> keep(g.magnitude.pixel_count(), 0);
    auto mag = [&](int r, int c) -> double {
        if (r < 0 || r >= h || c < 0 || c >= w) return 0.0;
        size_t q = static_cast<size_t>(r) * w + c;
        return g.magnitude.nodata[q] ? 0.0 : g.magnitude.data[q];
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t p = static_cast<size_t>(r) * w + c;
            if (g.magnitude.nodata[p]) continue;
            double m = g.magnitude.data[p];
            const auto& n = cannydetail::kNms[g.dir_bin[p]];
            if (m > mag(r + n[0][0], c + n[0][1]) && m >= mag(r + n[1][0], c + n[1][1]))
                keep[p] = 1;
        }
    }
    return keep;
}

/// Dual-threshold hysteresis over NMS survivors: magnitude >= high seeds,
/// >= low extends through 8-connected neighbors.
inline Mask hysteresis(const Raster& magnitude, const std::vector<uint8_t>& keep, double low,
                       double high) {
    const int w = magnitude.width, h = magnitude.height;
    Mask out(w, h);
    out.gt = magnitude.gt;
    out.nodata = magnitude.nodata;
    std::vector<int32_t> stack;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t p = static_cast<size_t>(r) * w + c;
            if (!keep[p] || magnitude.nodata[p] || out.data[p]) continue;
            if (magnitude.data[p] < high) continue;
            out.data[p] = 1;
            stack.assign(1, static_cast<int32_t>(p));
            while (!stack.empty()) {
                size_t q = static_cast<size_t>(stack.back());
                stack.pop_back();
                int qr = static_cast<int>(q / w), qc = static_cast<int>(q % w);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        int nr = qr + dr, nc = qc + dc;
                        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                        size_t nq = static_cast<size_t>(nr) * w + nc;
                        if (out.data[nq] || !keep[nq] || magnitude.nodata[nq]) continue;
                        if (magnitude.data[nq] < low) continue;
                        out.data[nq] = 1;
                        stack.push_back(static_cast<int32_t>(nq));
                    }
                }
            }
        }
    }
    return out;
}

/// Full Canny chain: smooth, gradient, NMS, hysteresis.
inline Mask canny_edges(const Raster& image, const CannyParams& params) {
    params.validate();
    Raster smoothed = gaussian_smooth(image, params.sigma);
    GradientField g = gradient(smoothed);
    auto keep = nms_suppress(g);
    return hysteresis(g.magnitude, keep, params.low_threshold, params.high_threshold);
}

/// Nearest-rank quantile of the valid gradient magnitudes; used to calibrate
/// thresholds when the input units are unknown.
inline std::pair<double, double> percentile_thresholds(const Raster& magnitude, double q_low,
                                                       double q_high) {
    if (!(q_low >= 0 && q_low <= q_high && q_high <= 1))
        throw Error("percentile_thresholds: need 0 <= q_low <= q_high <= 1");
    std::vector<float> vals;
    vals.reserve(magnitude.pixel_count());
    auto b0 = magnitude.band(0);
    for (size_t p = 0; p < magnitude.pixel_count(); ++p)
        if (!magnitude.nodata[p] && std::isfinite(b0[p])) vals.push_back(b0[p]);
    if (vals.empty()) throw Error("percentile_thresholds: no valid pixels");
    std::sort(vals.begin(), vals.end());
    auto rank = [&](double q) {
        return vals[static_cast<size_t>(std::llround(q * static_cast<double>(vals.size() - 1)))];
    };
    return {rank(q_low), rank(q_high)};
}

}  // namespace fieldseg
