#pragma once

#include <msdet/detections.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace msdet {

/// Tunables of the box-ensemble fusion step. gamma weighs the thermal
/// model's contribution (0 = baseline only, 1 = thermal only); tau_iou
/// gates pair matching; tau_nms gates the terminal suppression pass.
struct FusionConfig {
    double gamma = 0.5;
    double tau_iou = 0.5;
    double tau_nms = 0.5;
    bool class_agnostic_nms = false;
    /// Optional per-class gamma override; classes not present use the scalar gamma.
    std::map<int, double> gamma_per_class;

    void validate() const;
    double gamma_for(int class_id) const;
};

enum class Provenance { BaselineOnly, ThermalOnly, Fused };

/// A detection plus where it came from: carried over from one input, or
/// fused from a (baseline, thermal) pair. Indices refer to positions in
/// the original input sets.
struct FusedDetection {
    Detection detection;
    Provenance provenance;
    std::optional<std::size_t> baseline_index;
    std::optional<std::size_t> thermal_index;
};

/// Convex combination of two same-class detections:
/// every field of the result is gamma * thermal + (1 - gamma) * baseline.
Detection fuse_pair(const Detection& d_baseline, const Detection& d_thermal, double gamma);

struct MatchResult {
    std::vector<FusedDetection> fused;
    std::vector<FusedDetection> unmerged;
};

/// Greedy first-match pairing of the two detection sets. Both sets are
/// scanned in canonical order (descending confidence, ties by ascending
/// input index); each baseline detection fuses with the first unmerged
/// thermal detection of equal class with IoU >= tau_iou. Everything that
/// never merges is carried over unchanged.
MatchResult match_and_fuse(const DetectionSet& baseline, const DetectionSet& thermal,
                           const FusionConfig& cfg);

/// Greedy non-maximum suppression: repeatedly keeps the highest-confidence
/// survivor and suppresses overlapping detections with IoU strictly above
/// tau_nms. Class-aware unless class_agnostic is set. Output is ordered by
/// descending confidence (ties by ascending input index).
std::vector<Detection> nms(const std::vector<Detection>& dets, double tau_nms,
                           bool class_agnostic = false);

/// Surviving indices into `dets`, in output order.
std::vector<std::size_t> nms_indices(const std::vector<Detection>& dets, double tau_nms,
                                     bool class_agnostic = false);

struct EnsembleResult {
    DetectionSet set;
    /// Provenance per output detection, aligned with set.detections.
    std::vector<FusedDetection> audit;
};

/// Full box-ensemble fusion for one image: pair matching, carry-over of
/// unmerged detections, then terminal NMS over the combined list.
EnsembleResult ensemble_fuse(const DetectionSet& baseline, const DetectionSet& thermal,
                             const FusionConfig& cfg);

/// Side-car audit document for fused corpora; one provenance entry per
/// output detection per image.
std::string audit_to_json(const std::vector<EnsembleResult>& results);

} // namespace msdet
