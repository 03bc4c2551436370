#include <msdet/synth.hpp>

#include <msdet/ensemble.hpp>
#include <msdet/io_util.hpp>
#include <msdet/parallel.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

namespace msdet {

using ordered_json = nlohmann::ordered_json;

namespace {

// Stream ids mixed into the seed; one substream per (purpose, image).
constexpr std::uint64_t kGtStream = 1;
constexpr std::uint64_t kBaselineStream = 2;
constexpr std::uint64_t kThermalStream = 3;

std::string image_name(int index) {
    std::ostringstream id;
    id << "img_" << std::setw(5) << std::setfill('0') << index;
    return id.str();
}

} // namespace

void DetectorProfile::validate() const {
    for (const auto& [class_id, p] : miss_rate) {
        if (!(std::isfinite(p) && p >= 0.0 && p <= 1.0)) {
            throw ValidationError("miss_rate for class id " + std::to_string(class_id) +
                                  " must lie in [0,1]");
        }
    }
    if (!(std::isfinite(fp_per_image) && fp_per_image >= 0.0)) {
        throw ValidationError("fp_per_image must be non-negative");
    }
    if (!(std::isfinite(jitter_sigma) && jitter_sigma >= 0.0)) {
        throw ValidationError("jitter_sigma must be non-negative");
    }
    for (const ConfDist& c : {tp_conf, fp_conf}) {
        if (!(std::isfinite(c.mean) && c.mean >= 0.0 && c.mean <= 1.0)) {
            throw ValidationError("confidence mean must lie in [0,1]");
        }
        if (!(std::isfinite(c.std) && c.std >= 0.0)) {
            throw ValidationError("confidence std must be non-negative");
        }
    }
}

double DetectorProfile::miss_rate_for(int class_id) const {
    auto it = miss_rate.find(class_id);
    return it == miss_rate.end() ? 0.0 : it->second;
}

void SynthConfig::validate() const {
    if (n_images < 1) {
        throw ValidationError("n_images must be at least 1");
    }
    if (!(image_w > 0.0 && image_h > 0.0)) {
        throw ValidationError("image dimensions must be positive");
    }
    if (!(box_min > 0.0 && box_max >= box_min)) {
        throw ValidationError("box size range must satisfy 0 < min <= max");
    }
    if (box_max > image_w || box_max > image_h) {
        throw ValidationError("box size range does not fit in the image");
    }
    for (const auto& [class_id, range] : objects_per_image) {
        if (range.min < 0 || range.max < range.min) {
            throw ValidationError("objects-per-image range for class id " +
                                  std::to_string(class_id) + " must satisfy 0 <= min <= max");
        }
    }
    baseline_profile.validate();
    thermal_profile.validate();
}

SynthConfig complementary_config(std::uint64_t seed, int n_images) {
    SynthConfig cfg;
    cfg.n_images = n_images;
    cfg.image_w = 640.0;
    cfg.image_h = 512.0;
    cfg.objects_per_image = {{1, {1, 3}}, {2, {1, 3}}, {3, {1, 3}}};
    cfg.box_min = 24.0;
    cfg.box_max = 64.0;
    cfg.seed = seed;

    DetectorProfile baseline;
    baseline.miss_rate = {{1, 0.10}, {2, 0.10}, {3, 0.60}};
    baseline.fp_per_image = 0.5;
    baseline.jitter_sigma = 1.5;
    baseline.tp_conf = {0.88, 0.06};
    baseline.fp_conf = {0.30, 0.12};

    DetectorProfile thermal;
    thermal.miss_rate = {{1, 0.50}, {2, 0.50}, {3, 0.05}};
    thermal.fp_per_image = 0.5;
    thermal.jitter_sigma = 2.5;
    thermal.tp_conf = {0.80, 0.08};
    thermal.fp_conf = {0.30, 0.12};

    cfg.baseline_profile = baseline;
    cfg.thermal_profile = thermal;
    cfg.validate();
    return cfg;
}

namespace {

std::map<int, double> parse_class_map(const ordered_json& obj, const ClassRegistry& registry,
                                      const std::string& where) {
    std::map<int, double> out;
    for (const auto& [name, value] : obj.items()) {
        const auto id = registry.id_of(name);
        if (!id) {
            throw ValidationError(where + ": unknown class name \"" + name + "\"");
        }
        if (!value.is_number()) {
            throw ValidationError(where + ": value for \"" + name + "\" must be a number");
        }
        out[*id] = value.get<double>();
    }
    return out;
}

ConfDist parse_conf_dist(const ordered_json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
        !value[1].is_number()) {
        throw ValidationError(where + ": expected [mean, std]");
    }
    return {value[0].get<double>(), value[1].get<double>()};
}

DetectorProfile parse_profile(const ordered_json& obj, const ClassRegistry& registry,
                              const std::string& where) {
    if (!obj.is_object()) {
        throw ValidationError(where + ": profile must be an object");
    }
    DetectorProfile p;
    if (obj.contains("miss_rate")) {
        p.miss_rate = parse_class_map(obj["miss_rate"], registry, where + ".miss_rate");
    }
    auto number = [&where](const ordered_json& v, const char* key) {
        if (!v.is_number()) {
            throw ValidationError(where + ": \"" + key + "\" must be a number");
        }
        return v.get<double>();
    };
    if (obj.contains("fp_per_image")) p.fp_per_image = number(obj["fp_per_image"], "fp_per_image");
    if (obj.contains("jitter_sigma")) p.jitter_sigma = number(obj["jitter_sigma"], "jitter_sigma");
    if (obj.contains("tp_conf")) p.tp_conf = parse_conf_dist(obj["tp_conf"], where + ".tp_conf");
    if (obj.contains("fp_conf")) p.fp_conf = parse_conf_dist(obj["fp_conf"], where + ".fp_conf");
    return p;
}

} // namespace

SynthConfig load_synth_config(const std::string& path, const ClassRegistry& registry) {
    const std::string text = read_file(path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed synth config " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("synth config must be a JSON object: " + path);
    }
    if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) {
        throw ValidationError("synth config requires a non-negative integer \"seed\": " + path);
    }
    SynthConfig cfg;
    cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("n_images")) cfg.n_images = doc["n_images"].get<int>();
    if (doc.contains("image_w")) cfg.image_w = doc["image_w"].get<double>();
    if (doc.contains("image_h")) cfg.image_h = doc["image_h"].get<double>();
    if (doc.contains("objects_per_image")) {
        for (const auto& [name, value] : doc["objects_per_image"].items()) {
            const auto id = registry.id_of(name);
            if (!id) {
                throw ValidationError(path + ": unknown class name \"" + name + "\"");
            }
            if (!value.is_array() || value.size() != 2) {
                throw ValidationError(path + ": objects_per_image entries must be [min, max]");
            }
            cfg.objects_per_image[*id] = {value[0].get<int>(), value[1].get<int>()};
        }
    }
    if (doc.contains("box_size")) {
        const auto& bs = doc["box_size"];
        if (!bs.is_array() || bs.size() != 2) {
            throw ValidationError(path + ": box_size must be [min, max]");
        }
        cfg.box_min = bs[0].get<double>();
        cfg.box_max = bs[1].get<double>();
    }
    if (doc.contains("baseline_profile")) {
        cfg.baseline_profile = parse_profile(doc["baseline_profile"], registry, "baseline_profile");
    }
    if (doc.contains("thermal_profile")) {
        cfg.thermal_profile = parse_profile(doc["thermal_profile"], registry, "thermal_profile");
    }
    cfg.validate();
    return cfg;
}

namespace {

ordered_json profile_to_json(const DetectorProfile& p, const ClassRegistry& registry) {
    ordered_json miss = ordered_json::object();
    for (const auto& [class_id, rate] : p.miss_rate) {
        miss[registry.by_id(class_id).name] = rate;
    }
    ordered_json obj = ordered_json::object();
    obj["miss_rate"] = std::move(miss);
    obj["fp_per_image"] = p.fp_per_image;
    obj["jitter_sigma"] = p.jitter_sigma;
    obj["tp_conf"] = {p.tp_conf.mean, p.tp_conf.std};
    obj["fp_conf"] = {p.fp_conf.mean, p.fp_conf.std};
    return obj;
}

} // namespace

std::string synth_config_to_json(const SynthConfig& cfg, const ClassRegistry& registry) {
    ordered_json counts = ordered_json::object();
    for (const auto& [class_id, range] : cfg.objects_per_image) {
        counts[registry.by_id(class_id).name] = {range.min, range.max};
    }
    ordered_json doc = ordered_json::object();
    doc["n_images"] = cfg.n_images;
    doc["image_w"] = cfg.image_w;
    doc["image_h"] = cfg.image_h;
    doc["objects_per_image"] = std::move(counts);
    doc["box_size"] = {cfg.box_min, cfg.box_max};
    doc["seed"] = cfg.seed;
    doc["baseline_profile"] = profile_to_json(cfg.baseline_profile, registry);
    doc["thermal_profile"] = profile_to_json(cfg.thermal_profile, registry);
    return doc.dump(2) + "\n";
}

std::vector<GroundTruthSet> generate_ground_truth(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<GroundTruthSet> sets(static_cast<std::size_t>(cfg.n_images));
    const Rng root = Rng(cfg.seed).substream(kGtStream);
    for (int i = 0; i < cfg.n_images; ++i) {
        Rng rng = root.substream(static_cast<std::uint64_t>(i));
        GroundTruthSet& set = sets[static_cast<std::size_t>(i)];
        set.image_id = image_name(i);
        set.image_w = cfg.image_w;
        set.image_h = cfg.image_h;
        for (const auto& [class_id, range] : cfg.objects_per_image) {
            const auto count = rng.uniform_int(static_cast<std::uint64_t>(range.min),
                                               static_cast<std::uint64_t>(range.max));
            for (std::uint64_t k = 0; k < count; ++k) {
                const double w = rng.uniform(cfg.box_min, cfg.box_max);
                const double h = rng.uniform(cfg.box_min, cfg.box_max);
                const double x = rng.uniform(0.0, cfg.image_w - w);
                const double y = rng.uniform(0.0, cfg.image_h - h);
                set.objects.push_back({class_id, BoundingBox(x, y, w, h)});
            }
        }
    }
    return sets;
}

DetectionSet simulate_detector(const GroundTruthSet& gt, const DetectorProfile& profile,
                               Rng rng) {
    profile.validate();
    DetectionSet out;
    out.image_id = gt.image_id;
    out.image_w = gt.image_w;
    out.image_h = gt.image_h;

    for (const auto& obj : gt.objects) {
        if (rng.uniform() < profile.miss_rate_for(obj.class_id)) {
            continue;
        }
        const double n1 = rng.normal(0.0, profile.jitter_sigma);
        const double n2 = rng.normal(0.0, profile.jitter_sigma);
        const double n3 = rng.normal(0.0, profile.jitter_sigma);
        const double n4 = rng.normal(0.0, profile.jitter_sigma);
        const double conf = std::clamp(
            rng.normal(profile.tp_conf.mean, profile.tp_conf.std), 0.0, 1.0);
        // Corner jitter expressed on (x, y, w, h) so a zero sigma reproduces
        // the ground-truth box bit-exactly.
        double x = obj.box.x() + n1;
        double y = obj.box.y() + n2;
        double w = obj.box.w() + (n3 - n1);
        double h = obj.box.h() + (n4 - n2);
        if (x < 0.0 || y < 0.0 || x + w > gt.image_w || y + h > gt.image_h) {
            const double lx = std::clamp(x, 0.0, gt.image_w);
            const double rx = std::clamp(x + w, 0.0, gt.image_w);
            const double ty = std::clamp(y, 0.0, gt.image_h);
            const double by = std::clamp(y + h, 0.0, gt.image_h);
            x = lx;
            y = ty;
            w = rx - lx;
            h = by - ty;
        }
        if (w <= 0.0 || h <= 0.0) {
            continue; // clipped away entirely
        }
        out.detections.push_back({obj.class_id, BoundingBox(x, y, w, h), conf});
    }

    const int false_positives = rng.poisson(profile.fp_per_image);
    const ClassRegistry registry = ClassRegistry::canonical();
    const auto& classes = registry.classes();
    for (int k = 0; k < false_positives; ++k) {
        const auto& cls = classes[rng.below(classes.size())];
        const double w = rng.uniform(1.0, std::max(1.0, gt.image_w / 8.0));
        const double h = rng.uniform(1.0, std::max(1.0, gt.image_h / 8.0));
        const double x = rng.uniform(0.0, gt.image_w - w);
        const double y = rng.uniform(0.0, gt.image_h - h);
        const double conf = std::clamp(
            rng.normal(profile.fp_conf.mean, profile.fp_conf.std), 0.0, 1.0);
        out.detections.push_back({cls.id, BoundingBox(x, y, w, h), conf});
    }
    return out;
}

ExperimentResult run_experiment(const SynthConfig& cfg, const std::string& out_dir,
                                int threads) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    }

    const std::vector<GroundTruthSet> gt = generate_ground_truth(cfg);
    const std::size_t n = gt.size();
    std::vector<DetectionSet> baseline(n), thermal(n), fused(n);
    const Rng root(cfg.seed);
    const FusionConfig fusion;
    parallel_for(n, threads, [&](std::size_t i) {
        baseline[i] = simulate_detector(gt[i], cfg.baseline_profile,
                                        root.substream(kBaselineStream).substream(i));
        thermal[i] = simulate_detector(gt[i], cfg.thermal_profile,
                                       root.substream(kThermalStream).substream(i));
        fused[i] = ensemble_fuse(baseline[i], thermal[i], fusion).set;
    });

    const EvalConfig eval_cfg;
    ExperimentResult result;
    result.baseline = evaluate(baseline, gt, eval_cfg, threads);
    result.thermal = evaluate(thermal, gt, eval_cfg, threads);
    result.ensemble = evaluate(fused, gt, eval_cfg, threads);

    const auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    save_ground_truth(gt, path("gt.json"));
    save_detections(baseline, path("baseline.json"));
    save_detections(thermal, path("thermal.json"));
    save_detections(fused, path("fused.json"));
    save_report(result.baseline, path("eval_baseline.json"));
    save_report(result.thermal, path("eval_thermal.json"));
    save_report(result.ensemble, path("eval_ensemble.json"));
    return result;
}

} // namespace msdet
