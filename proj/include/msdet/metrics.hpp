#pragma once

#include <msdet/detections.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace msdet {

enum class F1Policy {
    MaxOverThresholds, // sweep all distinct confidences, report the maximizing F1
    FixedThreshold,    // evaluate at a caller-supplied confidence threshold
};

struct EvalConfig {
    double iou_fixed = 0.5;
    std::vector<double> iou_range = {0.50, 0.55, 0.60, 0.65, 0.70,
                                     0.75, 0.80, 0.85, 0.90, 0.95};
    F1Policy f1_policy = F1Policy::MaxOverThresholds;
    double f1_fixed_threshold = 0.5;

    void validate() const;
};

/// One scored prediction after matching: its confidence and whether it was
/// counted as a true positive.
struct Label {
    double conf;
    bool tp;
};

struct ClassMetrics {
    double ap50 = 0.0;
    double ap50_95 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double f1_conf_threshold = 0.0;
    std::size_t num_gt = 0;
    std::size_t num_pred = 0;
};

struct EvalReport {
    EvalConfig config;
    std::vector<std::pair<int, ClassMetrics>> per_class; // ascending class id
    ClassMetrics mean; // metric fields averaged over classes with ground truth;
                       // num_gt/num_pred are totals
};

/// Greedy TP/FP labelling for one class on one image. Predictions are
/// processed in descending confidence (ties by input index); each matches
/// the unmatched ground-truth box of highest IoU when that IoU reaches
/// iou_thr. Returned labels are in processing order.
std::vector<Label> match_predictions(const std::vector<Detection>& preds,
                                     const std::vector<BoundingBox>& gts, double iou_thr);

/// 101-point interpolated average precision over labels sorted by
/// descending confidence. With no ground truth the result is vacuously 1
/// for an empty label list and 0 otherwise.
double average_precision(const std::vector<Label>& labels, std::size_t num_gt);

/// Full corpus evaluation: pooled per-class AP at the fixed and ranged IoU
/// thresholds, plus F1/precision/recall at the configured operating point.
/// Every prediction image must exist in the ground truth; ground-truth
/// images with no prediction set count as empty predictions. Per-image
/// matching runs on up to `threads` workers; the result does not depend
/// on the thread count.
EvalReport evaluate(const std::vector<DetectionSet>& pred_sets,
                    const std::vector<GroundTruthSet>& gt_sets, const EvalConfig& cfg,
                    int threads = 1);

std::string report_to_json(const EvalReport& report,
                           const ClassRegistry& registry = ClassRegistry::canonical());

void save_report(const EvalReport& report, const std::string& path,
                 const ClassRegistry& registry = ClassRegistry::canonical());

} // namespace msdet
