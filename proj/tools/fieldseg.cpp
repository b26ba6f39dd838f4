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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fieldseg/fieldseg.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

fieldseg::Raster load_raster(const std::string& path, const std::string& format) {
    fieldseg::RasterFormat fmt;
    if (format == "auto")
        fmt = fieldseg::guess_format(path);
    else if (format == "bsq")
        fmt = fieldseg::RasterFormat::bsq;
    else if (format == "geotiff")
        fmt = fieldseg::RasterFormat::geotiff;
    else
        throw fieldseg::Error("unknown format '" + format + "' (use auto, bsq or geotiff)");
    return fieldseg::read_raster(path, fmt);
}

struct SynthOpts {
    fieldseg::SceneSpec spec;
    std::string out;
    std::string truth;
};

int run_synth(const SynthOpts& o) {
    auto scene = fieldseg::generate_scene(o.spec);
    fieldseg::write_bsq(scene.ndvi, o.out);
    if (!o.truth.empty()) fieldseg::write_geojson(scene.truth, o.truth);
    std::cerr << "wrote " << o.out << " (" << o.spec.width << "x" << o.spec.height << ", "
              << scene.truth.polygons.size() << " fields)\n";
    return 0;
}

struct NdviOpts {
    std::string in;
    std::string format = "auto";
    std::string out;
    int qa_band = -1;
    int red_band = -1;
    int nir_band = -1;
    std::vector<int> cloud_bits = {10, 11};
};

int run_ndvi(const NdviOpts& o) {
    fieldseg::Raster input = load_raster(o.in, o.format);
    if (o.qa_band >= 0) {
        if (o.qa_band >= input.bands) throw fieldseg::Error("QA band index out of range");
        fieldseg::Raster qa = input.extract_band(o.qa_band);
        input = fieldseg::apply_qa_mask(
            input, qa, std::set<int>(o.cloud_bits.begin(), o.cloud_bits.end()));
    }
    int red = o.red_band, nir = o.nir_band;
    if (red < 0 || nir < 0) {
        auto [dr, dn] = fieldseg::default_red_nir(input.bands);
        if (red < 0) red = dr;
        if (nir < 0) nir = dn;
    }
    fieldseg::Raster ndvi = fieldseg::compute_ndvi(input, red, nir);
    fieldseg::write_bsq(ndvi, o.out);
    return 0;
}

struct SnicOpts {
    std::string in;
    std::string format = "auto";
    fieldseg::SnicParams params;
    double min_contrast = 0.1;
    std::string labels_out;
    std::string boundaries_out;
};

int run_snic(const SnicOpts& o) {
    fieldseg::Raster ndvi = load_raster(o.in, o.format);
    fieldseg::LabelImage labels = fieldseg::snic_segment(ndvi, o.params);
    std::cerr << labels.cluster_count << " clusters\n";
    if (!o.labels_out.empty())
        fieldseg::write_bsq(fieldseg::labels_to_raster(labels), o.labels_out);
    if (!o.boundaries_out.empty()) {
        fieldseg::Mask b = fieldseg::contrast_boundaries(labels, o.min_contrast);
        fieldseg::write_bsq(fieldseg::mask_to_raster(b), o.boundaries_out);
    }
    return 0;
}

struct CannyOpts {
    std::string in;
    std::string format = "auto";
    fieldseg::CannyParams params;
    bool auto_threshold = false;
    double q_low = 0.90;
    double q_high = 0.97;
    std::string out;
};

int run_canny(const CannyOpts& o) {
    fieldseg::Raster ndvi = load_raster(o.in, o.format);
    fieldseg::Mask edges;
    if (o.auto_threshold) {
        fieldseg::Raster smoothed = fieldseg::gaussian_smooth(ndvi, o.params.sigma);
        fieldseg::GradientField g = fieldseg::gradient(smoothed);
        auto [lo, hi] = fieldseg::percentile_thresholds(g.magnitude, o.q_low, o.q_high);
        std::cerr << "calibrated thresholds: low " << lo << ", high " << hi << "\n";
        edges = fieldseg::hysteresis(g.magnitude, fieldseg::nms_suppress(g), lo, hi);
    } else {
        edges = fieldseg::canny_edges(ndvi, o.params);
    }
    fieldseg::write_bsq(fieldseg::mask_to_raster(edges), o.out);
    return 0;
}

struct SegmentOpts {
    std::string in;
    std::string format = "auto";
    fieldseg::PipelineParams params;
    std::vector<int> cloud_bits = {10, 11};
    std::string fields_out;
    std::string overlay_out;
    std::string intermediate_dir;
    std::string boundaries_in;
    std::string edges_in;
    bool print_params = false;
};

int run_segment(const SegmentOpts& o) {
    if (o.print_params) {
        std::cout << fieldseg::paper_param_json(o.params).dump() << "\n";
        return 0;
    }
    fieldseg::Raster input = load_raster(o.in, o.format);
    fieldseg::StageOverrides overrides;
    if (!o.boundaries_in.empty())
        overrides.snic_boundaries = fieldseg::raster_to_mask(fieldseg::read_bsq(o.boundaries_in));
    if (!o.edges_in.empty())
        overrides.edges = fieldseg::raster_to_mask(fieldseg::read_bsq(o.edges_in));

    fieldseg::PipelineResult res = fieldseg::run_pipeline(input, o.params, overrides);
    std::cerr << res.fields.polygons.size() << " fields (thresholds " << res.low_used << ", "
              << res.high_used << ")\n";

    if (!o.fields_out.empty()) fieldseg::write_geojson(res.fields, o.fields_out);
    if (!o.overlay_out.empty()) fieldseg::render_overlay(res.ndvi, res.closed, o.overlay_out);
    if (!o.intermediate_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(o.intermediate_dir);
        auto at = [&](const char* name) { return (fs::path(o.intermediate_dir) / name).string(); };
        fieldseg::write_bsq(res.ndvi, at("ndvi.bsq"));
        if (res.labels.width > 0)
            fieldseg::write_bsq(fieldseg::labels_to_raster(res.labels), at("labels.bsq"));
        fieldseg::write_bsq(fieldseg::mask_to_raster(res.snic_boundaries),
                            at("snic_boundaries.bsq"));
        fieldseg::write_bsq(fieldseg::mask_to_raster(res.edges), at("edges.bsq"));
        fieldseg::write_bsq(fieldseg::mask_to_raster(res.fused), at("fused.bsq"));
        fieldseg::write_bsq(fieldseg::mask_to_raster(res.closed), at("closed.bsq"));
    }
    return 0;
}

struct EvalOpts {
    std::string pred;
    std::string truth;
    std::string frame;
    std::string format = "auto";
    double iou_threshold = 0.5;
    int tolerance_px = 2;
    std::string out;
};

int run_eval(const EvalOpts& o) {
    fieldseg::FieldSet pred = fieldseg::read_geojson(o.pred);
    fieldseg::FieldSet truth = fieldseg::read_geojson(o.truth);
    fieldseg::Raster frame = load_raster(o.frame, o.format);

    fieldseg::LabelImage pred_px = fieldseg::rasterize(pred, frame.width, frame.height, frame.gt);
    fieldseg::LabelImage truth_px =
        fieldseg::rasterize(truth, frame.width, frame.height, frame.gt);

    fieldseg::EvalReport rep = fieldseg::match_fields(pred_px, truth_px, o.iou_threshold);
    fieldseg::BoundaryScore bs =
        fieldseg::boundary_metrics(fieldseg::label_boundaries(pred_px),
                                   fieldseg::label_boundaries(truth_px), o.tolerance_px);
    rep.boundary_precision = bs.precision;
    rep.boundary_recall = bs.recall;
    rep.boundary_f1 = bs.f1;
    rep.params = {{"iou_threshold", o.iou_threshold}, {"tolerance_px", o.tolerance_px}};

    std::string text = rep.to_json().dump(2);
    text.push_back('\n');
    if (o.out.empty())
        std::cout << text;
    else
        fieldseg::detail::write_file_bytes(o.out, text.data(), text.size());
    return 0;
}

struct RenderOpts {
    std::string in;
    std::string format = "auto";
    std::string labels;
    std::string mask;
    std::string out;
};

int run_render(const RenderOpts& o) {
    fieldseg::Raster base = load_raster(o.in, o.format);
    if (!o.labels.empty()) {
        fieldseg::LabelImage li = fieldseg::raster_to_labels(fieldseg::read_bsq(o.labels));
        fieldseg::render_overlay(base, li, o.out);
    } else if (!o.mask.empty()) {
        fieldseg::Mask m = fieldseg::raster_to_mask(fieldseg::read_bsq(o.mask));
        fieldseg::render_overlay(base, m, o.out);
    } else {
        throw fieldseg::Error("render: pass --labels or --mask");
    }
    return 0;
}

void add_snic_flags(CLI::App* cmd, fieldseg::SnicParams& p, double* min_contrast) {
    cmd->add_option("--size", p.size, "SNIC seed spacing in pixels");
    cmd->add_option("--compactness", p.compactness, "SNIC compactness");
    cmd->add_option("--connectivity", p.connectivity, "SNIC connectivity (4 or 8)");
    if (min_contrast)
        cmd->add_option("--min-contrast", *min_contrast,
                        "minimum cluster mean contrast for a boundary (0 keeps all)");
}

void add_canny_flags(CLI::App* cmd, fieldseg::CannyParams& p, bool* auto_thr, double* ql,
                     double* qh) {
    cmd->add_option("--sigma", p.sigma, "Gaussian sigma in pixels");
    cmd->add_option("--low", p.low_threshold, "low hysteresis threshold");
    cmd->add_option("--high", p.high_threshold, "high hysteresis threshold");
    if (auto_thr) {
        cmd->add_flag("--auto-threshold", *auto_thr,
                      "calibrate thresholds from the gradient histogram");
        cmd->add_option("--q-low", *ql, "low-threshold quantile for --auto-threshold");
        cmd->add_option("--q-high", *qh, "high-threshold quantile for --auto-threshold");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"field boundary delineation from multispectral rasters"};
    app.require_subcommand(1);

    SynthOpts synth;
    auto* csynth = app.add_subcommand("synth", "generate a synthetic NDVI scene with truth");
    csynth->add_option("--width", synth.spec.width, "scene width in pixels");
    csynth->add_option("--height", synth.spec.height, "scene height in pixels");
    csynth->add_option("--grid-cols", synth.spec.grid_cols, "fields per row");
    csynth->add_option("--grid-rows", synth.spec.grid_rows, "fields per column");
    csynth->add_option("--low", synth.spec.value_low, "lowest field NDVI");
    csynth->add_option("--high", synth.spec.value_high, "highest field NDVI");
    csynth->add_option("--noise", synth.spec.noise_sigma, "Gaussian noise sigma");
    csynth->add_option("--boundary-width", synth.spec.boundary_width,
                       "transition blur radius (0 = hard step)");
    csynth->add_option("--seed", synth.spec.rng_seed, "RNG seed");
    csynth->add_option("--out", synth.out, "output NDVI raster (BSQ)")->required();
    csynth->add_option("--truth", synth.truth, "output truth GeoJSON");

    NdviOpts ndvi;
    auto* cndvi = app.add_subcommand("ndvi", "cloud-mask and compute NDVI");
    cndvi->add_option("--in", ndvi.in, "input raster")->required();
    cndvi->add_option("--format", ndvi.format, "input format: auto, bsq, geotiff");
    cndvi->add_option("--qa-band", ndvi.qa_band, "QA band index (-1 = none)");
    cndvi->add_option("--cloud-bits", ndvi.cloud_bits, "QA bits that mark clouds");
    cndvi->add_option("--red-band", ndvi.red_band, "red band index");
    cndvi->add_option("--nir-band", ndvi.nir_band, "NIR band index");
    cndvi->add_option("--out", ndvi.out, "output NDVI raster (BSQ)")->required();

    SnicOpts snic;
    auto* csnic = app.add_subcommand("snic", "SNIC superpixels over an NDVI raster");
    csnic->add_option("--in", snic.in, "input NDVI raster")->required();
    csnic->add_option("--format", snic.format, "input format: auto, bsq, geotiff");
    add_snic_flags(csnic, snic.params, &snic.min_contrast);
    csnic->add_option("--labels-out", snic.labels_out, "output label raster (BSQ)");
    csnic->add_option("--boundaries-out", snic.boundaries_out, "output boundary mask (BSQ)");

    CannyOpts canny;
    auto* ccanny = app.add_subcommand("canny", "Canny edges over an NDVI raster");
    ccanny->add_option("--in", canny.in, "input NDVI raster")->required();
    ccanny->add_option("--format", canny.format, "input format: auto, bsq, geotiff");
    add_canny_flags(ccanny, canny.params, &canny.auto_threshold, &canny.q_low, &canny.q_high);
    ccanny->add_option("--out", canny.out, "output edge mask (BSQ)")->required();

    SegmentOpts seg;
    auto* cseg = app.add_subcommand("segment", "full pipeline: raster to field polygons");
    cseg->add_option("--in", seg.in, "input raster");
    cseg->add_option("--format", seg.format, "input format: auto, bsq, geotiff");
    cseg->add_option("--qa-band", seg.params.qa_band, "QA band index (-1 = none)");
    cseg->add_option("--cloud-bits", seg.cloud_bits, "QA bits that mark clouds");
    cseg->add_option("--red-band", seg.params.red_band, "red band index");
    cseg->add_option("--nir-band", seg.params.nir_band, "NIR band index");
    add_snic_flags(cseg, seg.params.snic, &seg.params.min_contrast);
    add_canny_flags(cseg, seg.params.canny, &seg.params.auto_threshold,
                    &seg.params.threshold_q_low, &seg.params.threshold_q_high);
    cseg->add_option("--close-kernel", seg.params.close_kernel, "morphological closing kernel");
    cseg->add_option("--min-area", seg.params.min_area_px, "minimum field area in pixels");
    cseg->add_option("--out", seg.fields_out, "output fields GeoJSON");
    cseg->add_option("--overlay", seg.overlay_out, "output boundary overlay PNG");
    cseg->add_option("--save-intermediate", seg.intermediate_dir,
                     "directory for per-stage rasters");
    cseg->add_option("--boundaries-in", seg.boundaries_in,
                     "precomputed SNIC boundary mask (skips SNIC)");
    cseg->add_option("--edges-in", seg.edges_in, "precomputed edge mask (skips Canny)");
    cseg->add_flag("--print-params", seg.print_params,
                   "print the effective workflow parameters and exit");

    EvalOpts eval;
    auto* ceval = app.add_subcommand("eval", "score predicted fields against truth polygons");
    ceval->add_option("--pred", eval.pred, "predicted fields GeoJSON")->required();
    ceval->add_option("--truth", eval.truth, "ground-truth GeoJSON")->required();
    ceval->add_option("--frame", eval.frame, "raster defining the pixel frame")->required();
    ceval->add_option("--format", eval.format, "frame format: auto, bsq, geotiff");
    ceval->add_option("--iou-threshold", eval.iou_threshold, "matching IoU threshold");
    ceval->add_option("--tolerance", eval.tolerance_px, "boundary tolerance in pixels");
    ceval->add_option("--out", eval.out, "report path (default: stdout)");

    RenderOpts render;
    auto* crender = app.add_subcommand("render", "render a raster with labels or a mask");
    crender->add_option("--in", render.in, "base raster")->required();
    crender->add_option("--format", render.format, "input format: auto, bsq, geotiff");
    crender->add_option("--labels", render.labels, "label raster (BSQ)");
    crender->add_option("--mask", render.mask, "mask raster (BSQ)");
    crender->add_option("--out", render.out, "output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(csynth)) synth.spec.validate();
        if (app.got_subcommand(csnic)) {
            snic.params.validate();
            if (snic.min_contrast < 0) throw fieldseg::Error("min contrast must be >= 0");
        }
        if (app.got_subcommand(ccanny)) canny.params.validate();
        if (app.got_subcommand(cseg)) {
            seg.params.cloud_bits = std::set<int>(seg.cloud_bits.begin(), seg.cloud_bits.end());
            seg.params.validate();
            if (!seg.print_params && seg.in.empty())
                throw fieldseg::Error("segment: --in is required");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(csynth)) return run_synth(synth);
        if (app.got_subcommand(cndvi)) return run_ndvi(ndvi);
        if (app.got_subcommand(csnic)) return run_snic(snic);
        if (app.got_subcommand(ccanny)) return run_canny(canny);
        if (app.got_subcommand(cseg)) return run_segment(seg);
        if (app.got_subcommand(ceval)) return run_eval(eval);
        if (app.got_subcommand(crender)) return run_render(render);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
