#include <msdet/detections.hpp>
#include <msdet/ensemble.hpp>
#include <msdet/io_util.hpp>
#include <msdet/metrics.hpp>
#include <msdet/parallel.hpp>
#include <msdet/registration.hpp>
#include <msdet/synth.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace msdet;

#ifndef MSDET_VERSION
#define MSDET_VERSION "0.0.0"
#endif

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

BoxFormat box_format(bool from_normalized_center) {
    return from_normalized_center ? BoxFormat::NormalizedCenter : BoxFormat::PixelTopLeft;
}

struct FuseDetsArgs {
    std::string baseline_path, thermal_path, out_path, audit_path;
    double gamma = 0.5, tau_iou = 0.5, tau_nms = 0.5;
    bool class_agnostic_nms = false;
    bool from_normalized_center = false;
    std::vector<std::string> gamma_class;
    int threads = default_threads();
};

void run_fuse_dets(const FuseDetsArgs& args) {
    const ClassRegistry registry = ClassRegistry::canonical();
    FusionConfig cfg;
    cfg.gamma = args.gamma;
    cfg.tau_iou = args.tau_iou;
    cfg.tau_nms = args.tau_nms;
    cfg.class_agnostic_nms = args.class_agnostic_nms;
    for (const std::string& entry : args.gamma_class) {
        const auto sep = entry.find('=');
        if (sep == std::string::npos) {
            throw ValidationError("--gamma-class expects NAME=VALUE, got \"" + entry + "\"");
        }
        const std::string name = entry.substr(0, sep);
        const auto id = registry.id_of(name);
        if (!id) {
            throw ValidationError("--gamma-class: unknown class name \"" + name + "\"");
        }
        try {
            cfg.gamma_per_class[*id] = std::stod(entry.substr(sep + 1));
        } catch (const std::exception&) {
            throw ValidationError("--gamma-class: bad value in \"" + entry + "\"");
        }
    }
    cfg.validate();

    const auto baseline = load_detections(args.baseline_path, registry,
                                          box_format(args.from_normalized_center));
    const auto thermal = load_detections(args.thermal_path, registry,
                                         box_format(args.from_normalized_center));

    // Join by image id: baseline file order first, then thermal-only images.
    std::map<std::string, const DetectionSet*> thermal_by_id;
    for (const auto& t : thermal) thermal_by_id[t.image_id] = &t;
    std::vector<std::pair<const DetectionSet*, const DetectionSet*>> joined;
    for (const auto& b : baseline) {
        auto it = thermal_by_id.find(b.image_id);
        joined.emplace_back(&b, it == thermal_by_id.end() ? nullptr : it->second);
    }
    std::map<std::string, bool> in_baseline;
    for (const auto& b : baseline) in_baseline[b.image_id] = true;
    for (const auto& t : thermal) {
        if (!in_baseline.contains(t.image_id)) joined.emplace_back(nullptr, &t);
    }

    std::vector<EnsembleResult> results(joined.size());
    parallel_for(joined.size(), args.threads, [&](std::size_t i) {
        const auto [b, t] = joined[i];
        DetectionSet empty;
        const DetectionSet* present = b ? b : t;
        empty.image_id = present->image_id;
        empty.image_w = present->image_w;
        empty.image_h = present->image_h;
        results[i] = ensemble_fuse(b ? *b : empty, t ? *t : empty, cfg);
    });

    std::vector<DetectionSet> fused;
    fused.reserve(results.size());
    std::size_t n_fused = 0, n_baseline_only = 0, n_thermal_only = 0;
    for (const auto& r : results) {
        fused.push_back(r.set);
        for (const auto& fd : r.audit) {
            switch (fd.provenance) {
                case Provenance::Fused: ++n_fused; break;
                case Provenance::BaselineOnly: ++n_baseline_only; break;
                case Provenance::ThermalOnly: ++n_thermal_only; break;
            }
        }
    }
    save_detections(fused, args.out_path, registry);
    if (!args.audit_path.empty()) {
        write_file_atomic(args.audit_path, audit_to_json(results));
    }
    std::printf("images=%zu fused=%zu baseline_only=%zu thermal_only=%zu\n", fused.size(),
                n_fused, n_baseline_only, n_thermal_only);
}

struct EvalArgs {
    std::string pred_path, gt_path, out_path;
    std::optional<double> f1_threshold;
    bool from_normalized_center = false;
    int threads = default_threads();
};

void run_eval(const EvalArgs& args) {
    const ClassRegistry registry = ClassRegistry::canonical();
    const auto preds =
        load_detections(args.pred_path, registry, box_format(args.from_normalized_center));
    const auto gts =
        load_ground_truth(args.gt_path, registry, box_format(args.from_normalized_center));
    EvalConfig cfg;
    if (args.f1_threshold) {
        cfg.f1_policy = F1Policy::FixedThreshold;
        cfg.f1_fixed_threshold = *args.f1_threshold;
    }
    const EvalReport report = evaluate(preds, gts, cfg, args.threads);
    save_report(report, args.out_path, registry);
    std::printf("map50=%.6f map50_95=%.6f precision=%.6f f1=%.6f\n", report.mean.ap50,
                report.mean.ap50_95, report.mean.precision, report.mean.f1);
}

struct RegisterArgs {
    std::string points_path, out_path;
    bool ransac = false;
    int iters = 1000;
    double thresh = 2.0;
    std::uint64_t seed = 0;
};

void run_register(const RegisterArgs& args) {
    const auto corrs = load_correspondences_csv(args.points_path);
    std::optional<RansacParams> robust;
    if (args.ransac) {
        robust = RansacParams{args.iters, args.thresh, args.seed};
    }
    const Homography h = estimate_homography(corrs, robust);
    std::size_t inliers = corrs.size();
    if (robust) {
        inliers = 0;
        for (const auto& c : corrs) {
            const Point p = apply(h, c.src);
            const double dx = p.x - c.dst.x, dy = p.y - c.dst.y;
            if (std::sqrt(dx * dx + dy * dy) <= args.thresh) ++inliers;
        }
    }
    save_homography_json(h, args.out_path);
    std::printf("points=%zu inliers=%zu\n", corrs.size(), inliers);
}

struct WarpArgs {
    std::string in_path, h_path, out_path;
    int width = 0, height = 0;
    int fill = 0;
    int threads = default_threads();
};

void run_warp(const WarpArgs& args) {
    const Raster src = read_raster(args.in_path);
    const Homography h = load_homography_json(args.h_path);
    const int out_w = args.width > 0 ? args.width : src.width();
    const int out_h = args.height > 0 ? args.height : src.height();
    if (args.fill < 0 || args.fill > src.max_value()) {
        throw ValidationError("--fill must lie in [0, " + std::to_string(src.max_value()) + "]");
    }
    const Raster out =
        warp(src, h, out_w, out_h, static_cast<std::uint16_t>(args.fill), args.threads);
    write_raster(out, args.out_path);
}

struct FuseImgArgs {
    std::string rgb_path, ir_path, out_path;
    double weight = 0.5;
    std::string colormap = "gray";
    std::optional<double> ir_min, ir_max;
    int threads = default_threads();
};

void run_fuse_img(const FuseImgArgs& args) {
    const Raster rgb = read_raster(args.rgb_path);
    const Raster ir = read_raster(args.ir_path);
    std::optional<std::pair<double, double>> range;
    if (args.ir_min.has_value() != args.ir_max.has_value()) {
        throw ValidationError("--ir-min and --ir-max must be given together");
    }
    if (args.ir_min) {
        range = std::make_pair(*args.ir_min, *args.ir_max);
    }
    const Raster out = fuse_images(rgb, ir, args.weight, colormap_from_name(args.colormap),
                                   range, args.threads);
    write_raster(out, args.out_path);
}

struct SynthArgs {
    std::string config_path, out_dir;
    int threads = default_threads();
};

void run_synth(const SynthArgs& args) {
    const SynthConfig cfg = load_synth_config(args.config_path);
    const ExperimentResult result = run_experiment(cfg, args.out_dir, args.threads);
    const double baseline = result.baseline.mean.ap50;
    const double thermal = result.thermal.mean.ap50;
    const double ensemble = result.ensemble.mean.ap50;
    std::printf("baseline_map50=%.6f thermal_map50=%.6f ensemble_map50=%.6f uplift=%.6f\n",
                baseline, thermal, ensemble, ensemble - std::max(baseline, thermal));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multispectral detection toolkit: RGB/IR registration and fusion, "
                 "detection-ensemble box fusion, and detection-metric evaluation"};
    app.set_version_flag("--version", std::string("msdet ") + MSDET_VERSION);
    app.require_subcommand(1);

    FuseDetsArgs fd;
    auto* fuse_dets = app.add_subcommand(
        "fuse-dets", "Fuse two detection files with the box-ensemble algorithm");
    fuse_dets->add_option("--baseline", fd.baseline_path, "Baseline detections JSON")
        ->required();
    fuse_dets->add_option("--thermal", fd.thermal_path, "Thermal detections JSON")->required();
    fuse_dets->add_option("--gamma", fd.gamma, "Thermal weight in [0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    fuse_dets->add_option("--iou", fd.tau_iou, "Pair-matching IoU threshold in (0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    fuse_dets->add_option("--nms", fd.tau_nms, "NMS IoU threshold in (0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    fuse_dets->add_flag("--class-agnostic-nms", fd.class_agnostic_nms,
                        "Suppress across classes in the terminal NMS");
    fuse_dets->add_option("--gamma-class", fd.gamma_class,
                          "Per-class gamma override, NAME=VALUE (repeatable)");
    fuse_dets->add_flag("--from-normalized-center", fd.from_normalized_center,
                        "Input boxes are center-format fractions of the image");
    fuse_dets->add_option("--audit", fd.audit_path, "Write a provenance side-car JSON");
    fuse_dets->add_option("-o,--out", fd.out_path, "Fused detections JSON")->required();
    fuse_dets->add_option("--threads", fd.threads, "Per-image parallelism bound")
        ->check(CLI::PositiveNumber);
    fuse_dets->callback([&] { run_fuse_dets(fd); });

    EvalArgs ev;
    auto* eval_cmd =
        app.add_subcommand("eval", "Score predictions against ground truth (AP, precision, F1)");
    eval_cmd->add_option("--pred", ev.pred_path, "Predictions JSON")->required();
    eval_cmd->add_option("--gt", ev.gt_path, "Ground-truth JSON")->required();
    double f1_threshold_value = 0.5;
    auto* f1_opt = eval_cmd
                       ->add_option("--f1-threshold", f1_threshold_value,
                                    "Fixed confidence threshold for precision/recall/F1 "
                                    "(default: maximize F1 over thresholds)")
                       ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_flag("--from-normalized-center", ev.from_normalized_center,
                       "Input boxes are center-format fractions of the image");
    eval_cmd->add_option("-o,--out", ev.out_path, "Report JSON")->required();
    eval_cmd->add_option("--threads", ev.threads, "Per-image parallelism bound")
        ->check(CLI::PositiveNumber);
    eval_cmd->callback([&] {
        if (f1_opt->count() > 0) ev.f1_threshold = f1_threshold_value;
        run_eval(ev);
    });

    RegisterArgs rg;
    auto* register_cmd =
        app.add_subcommand("register", "Estimate a homography from point correspondences");
    register_cmd->add_option("--points", rg.points_path, "CSV src_x,src_y,dst_x,dst_y")
        ->required();
    register_cmd->add_flag("--ransac", rg.ransac, "Robust estimation with outlier rejection");
    register_cmd->add_option("--iters", rg.iters, "RANSAC iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    register_cmd->add_option("--thresh", rg.thresh, "RANSAC inlier threshold, pixels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    register_cmd->add_option("--seed", rg.seed, "RANSAC seed")->capture_default_str();
    register_cmd->add_option("-o,--out", rg.out_path, "Homography JSON")->required();
    register_cmd->callback([&] { run_register(rg); });

    WarpArgs wp;
    auto* warp_cmd = app.add_subcommand("warp", "Warp a PGM/PPM raster by a homography "
                                                "(matrix maps output points to source points)");
    warp_cmd->set_help_flag("--help", "Print this help message and exit");
    warp_cmd->add_option("--in", wp.in_path, "Source raster (PGM or PPM)")->required();
    warp_cmd->add_option("--h", wp.h_path, "Homography JSON")->required();
    warp_cmd->add_option("--width", wp.width, "Output width (default: source width)");
    warp_cmd->add_option("--height", wp.height, "Output height (default: source height)");
    warp_cmd->add_option("--fill", wp.fill, "Sample value for out-of-bounds pixels")
        ->capture_default_str();
    warp_cmd->add_option("-o,--out", wp.out_path, "Output raster")->required();
    warp_cmd->add_option("--threads", wp.threads, "Row parallelism bound")
        ->check(CLI::PositiveNumber);
    warp_cmd->callback([&] { run_warp(wp); });

    FuseImgArgs fi;
    auto* fuse_img =
        app.add_subcommand("fuse-img", "Blend an RGB PPM with an aligned IR PGM");
    fuse_img->add_option("--rgb", fi.rgb_path, "RGB raster (PPM)")->required();
    fuse_img->add_option("--ir", fi.ir_path, "Aligned IR raster (PGM, 8 or 16 bit)")
        ->required();
    fuse_img->add_option("--weight", fi.weight, "RGB weight in [0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    fuse_img->add_option("--colormap", fi.colormap, "IR colormap: gray or iron")
        ->check(CLI::IsMember({"gray", "iron"}))
        ->capture_default_str();
    double ir_min_value = 0.0, ir_max_value = 0.0;
    auto* ir_min_opt = fuse_img->add_option("--ir-min", ir_min_value,
                                            "Fixed IR normalization minimum (default: per-image min)");
    auto* ir_max_opt = fuse_img->add_option("--ir-max", ir_max_value,
                                            "Fixed IR normalization maximum (default: per-image max)");
    fuse_img->add_option("-o,--out", fi.out_path, "Output PPM")->required();
    fuse_img->add_option("--threads", fi.threads, "Row parallelism bound")
        ->check(CLI::PositiveNumber);
    fuse_img->callback([&] {
        if (ir_min_opt->count() > 0) fi.ir_min = ir_min_value;
        if (ir_max_opt->count() > 0) fi.ir_max = ir_max_value;
        run_fuse_img(fi);
    });

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic scenario and run the full fuse/eval pipeline");
    synth_cmd->add_option("--config", sy.config_path, "Scenario config JSON")->required();
    synth_cmd->add_option("-o,--out", sy.out_dir, "Output directory")->required();
    synth_cmd->add_option("--threads", sy.threads, "Per-image parallelism bound")
        ->check(CLI::PositiveNumber);
    synth_cmd->callback([&] { run_synth(sy); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    } catch (const msdet::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const msdet::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        // Mostly type errors from hand-edited config files.
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
