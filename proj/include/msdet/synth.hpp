#pragma once

#include <msdet/detections.hpp>
#include <msdet/metrics.hpp>
#include <msdet/rng.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace msdet {

struct ConfDist {
    double mean = 0.9;
    double std = 0.05;
};

/// Parametric noise model standing in for a trained detector: per-class
/// miss rates, Poisson false positives, Gaussian corner jitter, and
/// clamped-Gaussian confidences.
struct DetectorProfile {
    std::map<int, double> miss_rate; // class id -> probability
    double fp_per_image = 0.0;
    double jitter_sigma = 0.0;
    ConfDist tp_conf;
    ConfDist fp_conf;

    void validate() const;
    double miss_rate_for(int class_id) const;
};

struct CountRange {
    int min = 0;
    int max = 0;
};

struct SynthConfig {
    int n_images = 1;
    double image_w = 640.0;
    double image_h = 512.0;
    std::map<int, CountRange> objects_per_image; // class id -> uniform count range
    double box_min = 20.0;
    double box_max = 60.0;
    std::uint64_t seed = 0;
    DetectorProfile baseline_profile;
    DetectorProfile thermal_profile;

    void validate() const;
};

/// The profile pair shipped for the uplift demonstration: the baseline
/// detector is strong on C1/C2 and weak on C3, the thermal detector the
/// other way around.
SynthConfig complementary_config(std::uint64_t seed, int n_images);

SynthConfig load_synth_config(const std::string& path,
                              const ClassRegistry& registry = ClassRegistry::canonical());

std::string synth_config_to_json(const SynthConfig& cfg,
                                 const ClassRegistry& registry = ClassRegistry::canonical());

/// Deterministic scene generation; each image draws from its own RNG
/// substream, so results do not depend on evaluation order.
std::vector<GroundTruthSet> generate_ground_truth(const SynthConfig& cfg);

DetectionSet simulate_detector(const GroundTruthSet& gt, const DetectorProfile& profile,
                               Rng rng);

struct ExperimentResult {
    EvalReport baseline;
    EvalReport thermal;
    EvalReport ensemble;
};

/// Full synthetic comparison: scenes, two simulated detectors, ensemble
/// fusion with default tunables, and the three evaluation reports. Writes
/// gt.json, baseline.json, thermal.json, fused.json and the eval_*.json
/// reports into out_dir.
ExperimentResult run_experiment(const SynthConfig& cfg, const std::string& out_dir,
                                int threads = 1);

} // namespace msdet
