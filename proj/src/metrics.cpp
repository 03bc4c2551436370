#include <msdet/metrics.hpp>

#include <msdet/io_util.hpp>
#include <msdet/parallel.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace msdet {

using ordered_json = nlohmann::ordered_json;

void EvalConfig::validate() const {
    auto check_threshold = [](double t, const char* name) {
        if (!(std::isfinite(t) && t > 0.0 && t <= 1.0)) {
            throw ValidationError(std::string(name) + " must lie in (0,1]");
        }
    };
    check_threshold(iou_fixed, "iou_fixed");
    if (iou_range.empty()) {
        throw ValidationError("iou_range must not be empty");
    }
    for (std::size_t i = 0; i < iou_range.size(); ++i) {
        check_threshold(iou_range[i], "iou_range entry");
        if (i > 0 && !(iou_range[i] > iou_range[i - 1])) {
            throw ValidationError("iou_range must be strictly increasing");
        }
    }
    if (f1_policy == F1Policy::FixedThreshold &&
        !(std::isfinite(f1_fixed_threshold) && f1_fixed_threshold >= 0.0 &&
          f1_fixed_threshold <= 1.0)) {
        throw ValidationError("f1 threshold must lie in [0,1]");
    }
}

std::vector<Label> match_predictions(const std::vector<Detection>& preds,
                                     const std::vector<BoundingBox>& gts, double iou_thr) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].conf > preds[b].conf;
    });

    std::vector<bool> gt_matched(gts.size(), false);
    std::vector<Label> labels;
    labels.reserve(preds.size());
    for (const std::size_t p : order) {
        double best_iou = 0.0;
        std::size_t best_gt = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_matched[g]) continue;
            const double v = iou(preds[p].box, gts[g]);
            if (v > best_iou) {
                best_iou = v;
                best_gt = g;
            }
        }
        const bool tp = best_gt < gts.size() && best_iou >= iou_thr;
        if (tp) {
            gt_matched[best_gt] = true;
        }
        labels.push_back({preds[p].conf, tp});
    }
    return labels;
}

double average_precision(const std::vector<Label>& labels, std::size_t num_gt) {
    if (num_gt == 0) {
        return labels.empty() ? 1.0 : 0.0;
    }
    const std::size_t n = labels.size();
    if (n == 0) {
        return 0.0;
    }
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (labels[k].tp) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
    }
    // Right-to-left precision envelope, then sample the 101 recall points.
    std::vector<double> envelope(n);
    envelope[n - 1] = precision[n - 1];
    for (std::size_t k = n - 1; k > 0; --k) {
        envelope[k - 1] = std::max(precision[k - 1], envelope[k]);
    }
    double sum = 0.0;
    std::size_t k = 0;
    for (int r = 0; r <= 100; ++r) {
        const double target = static_cast<double>(r) / 100.0;
        while (k < n && recall[k] < target) ++k;
        if (k == n) break;
        sum += envelope[k];
    }
    return sum / 101.0;
}

namespace {

struct PooledClass {
    std::vector<std::vector<Detection>> preds_per_image;
    std::vector<std::vector<BoundingBox>> gts_per_image;
    std::size_t num_gt = 0;
    std::size_t num_pred = 0;
};

std::vector<Label> pooled_labels(const PooledClass& pc, double iou_thr, int threads) {
    std::vector<std::vector<Label>> per_image(pc.preds_per_image.size());
    parallel_for(pc.preds_per_image.size(), threads, [&](std::size_t img) {
        per_image[img] =
            match_predictions(pc.preds_per_image[img], pc.gts_per_image[img], iou_thr);
    });
    std::vector<Label> pooled;
    for (const auto& labels : per_image) {
        pooled.insert(pooled.end(), labels.begin(), labels.end());
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const Label& a, const Label& b) { return a.conf > b.conf; });
    return pooled;
}

struct OperatingPoint {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double threshold = 0.0;
};

OperatingPoint point_at(const std::vector<Label>& labels, std::size_t num_gt, double threshold) {
    std::size_t tp = 0, fp = 0;
    for (const Label& l : labels) {
        if (l.conf < threshold) break; // labels sorted by descending confidence
        (l.tp ? tp : fp)++;
    }
    OperatingPoint op;
    op.threshold = threshold;
    const std::size_t kept = tp + fp;
    op.precision = kept > 0 ? static_cast<double>(tp) / static_cast<double>(kept) : 0.0;
    op.recall = num_gt > 0 ? static_cast<double>(tp) / static_cast<double>(num_gt) : 0.0;
    op.f1 = (op.precision + op.recall) > 0.0
                ? 2.0 * op.precision * op.recall / (op.precision + op.recall)
                : 0.0;
    return op;
}

// Sweeps all distinct confidences from high to low; keeps the first (highest)
// threshold achieving the maximal F1.
OperatingPoint best_f1_point(const std::vector<Label>& labels, std::size_t num_gt) {
    if (labels.empty()) {
        OperatingPoint op;
        op.threshold = 1.0;
        if (num_gt == 0) {
            op.precision = op.recall = op.f1 = 1.0; // vacuously perfect
        }
        return op;
    }
    OperatingPoint best;
    bool have_best = false;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (k > 0 && labels[k].conf == labels[k - 1].conf) continue;
        OperatingPoint op = point_at(labels, num_gt, labels[k].conf);
        if (!have_best || op.f1 > best.f1) {
            best = op;
            have_best = true;
        }
    }
    return best;
}

} // namespace

EvalReport evaluate(const std::vector<DetectionSet>& pred_sets,
                    const std::vector<GroundTruthSet>& gt_sets, const EvalConfig& cfg,
                    int threads) {
    cfg.validate();

    std::map<std::string, std::size_t> gt_index;
    for (std::size_t i = 0; i < gt_sets.size(); ++i) {
        if (!gt_index.emplace(gt_sets[i].image_id, i).second) {
            throw ValidationError("duplicate ground-truth image id: " + gt_sets[i].image_id);
        }
    }
    std::map<std::string, const DetectionSet*> pred_index;
    for (const auto& ps : pred_sets) {
        if (!gt_index.contains(ps.image_id)) {
            throw ValidationError("prediction image \"" + ps.image_id +
                                  "\" is absent from the ground truth");
        }
        if (!pred_index.emplace(ps.image_id, &ps).second) {
            throw ValidationError("duplicate prediction image id: " + ps.image_id);
        }
    }

    std::set<int> class_ids;
    for (const auto& gs : gt_sets) {
        for (const auto& o : gs.objects) class_ids.insert(o.class_id);
    }
    for (const auto& ps : pred_sets) {
        for (const auto& d : ps.detections) class_ids.insert(d.class_id);
    }

    std::map<int, PooledClass> pools;
    for (const int c : class_ids) {
        PooledClass& pc = pools[c];
        pc.preds_per_image.resize(gt_sets.size());
        pc.gts_per_image.resize(gt_sets.size());
    }
    for (std::size_t img = 0; img < gt_sets.size(); ++img) {
        for (const auto& o : gt_sets[img].objects) {
            PooledClass& pc = pools[o.class_id];
            pc.gts_per_image[img].push_back(o.box);
            pc.num_gt++;
        }
        auto it = pred_index.find(gt_sets[img].image_id);
        if (it == pred_index.end()) continue;
        for (const auto& d : it->second->detections) {
            PooledClass& pc = pools[d.class_id];
            pc.preds_per_image[img].push_back(d);
            pc.num_pred++;
        }
    }

    EvalReport report;
    report.config = cfg;
    double mean_ap50 = 0.0, mean_ap_range = 0.0, mean_p = 0.0, mean_r = 0.0, mean_f1 = 0.0;
    std::size_t classes_with_gt = 0;
    for (const auto& [class_id, pc] : pools) {
        ClassMetrics m;
        m.num_gt = pc.num_gt;
        m.num_pred = pc.num_pred;

        const auto labels50 = pooled_labels(pc, cfg.iou_fixed, threads);
        m.ap50 = average_precision(labels50, pc.num_gt);
        double ap_sum = 0.0;
        for (const double t : cfg.iou_range) {
            ap_sum += average_precision(pooled_labels(pc, t, threads), pc.num_gt);
        }
        m.ap50_95 = ap_sum / static_cast<double>(cfg.iou_range.size());

        const OperatingPoint op = cfg.f1_policy == F1Policy::MaxOverThresholds
                                      ? best_f1_point(labels50, pc.num_gt)
                                      : point_at(labels50, pc.num_gt, cfg.f1_fixed_threshold);
        m.precision = op.precision;
        m.recall = op.recall;
        m.f1 = op.f1;
        m.f1_conf_threshold = op.threshold;

        if (pc.num_gt > 0) {
            mean_ap50 += m.ap50;
            mean_ap_range += m.ap50_95;
            mean_p += m.precision;
            mean_r += m.recall;
            mean_f1 += m.f1;
            ++classes_with_gt;
        }
        report.mean.num_gt += m.num_gt;
        report.mean.num_pred += m.num_pred;
        report.per_class.emplace_back(class_id, m);
    }
    if (classes_with_gt > 0) {
        const double n = static_cast<double>(classes_with_gt);
        report.mean.ap50 = mean_ap50 / n;
        report.mean.ap50_95 = mean_ap_range / n;
        report.mean.precision = mean_p / n;
        report.mean.recall = mean_r / n;
        report.mean.f1 = mean_f1 / n;
    }
    return report;
}

std::string report_to_json(const EvalReport& report, const ClassRegistry& registry) {
    ordered_json config = ordered_json::object();
    config["iou_fixed"] = report.config.iou_fixed;
    config["iou_range"] = report.config.iou_range;
    config["f1_policy"] =
        report.config.f1_policy == F1Policy::MaxOverThresholds ? "max" : "fixed";
    config["f1_fixed_threshold"] = report.config.f1_policy == F1Policy::FixedThreshold
                                       ? ordered_json(report.config.f1_fixed_threshold)
                                       : ordered_json(nullptr);

    ordered_json classes = ordered_json::object();
    for (const auto& [class_id, m] : report.per_class) {
        ordered_json entry = ordered_json::object();
        entry["ap50"] = m.ap50;
        entry["ap50_95"] = m.ap50_95;
        entry["precision"] = m.precision;
        entry["recall"] = m.recall;
        entry["f1"] = m.f1;
        entry["f1_conf_threshold"] = m.f1_conf_threshold;
        entry["num_gt"] = m.num_gt;
        entry["num_pred"] = m.num_pred;
        classes[registry.by_id(class_id).name] = std::move(entry);
    }

    ordered_json mean = ordered_json::object();
    mean["ap50"] = report.mean.ap50;
    mean["ap50_95"] = report.mean.ap50_95;
    mean["precision"] = report.mean.precision;
    mean["recall"] = report.mean.recall;
    mean["f1"] = report.mean.f1;
    mean["num_gt"] = report.mean.num_gt;
    mean["num_pred"] = report.mean.num_pred;

    ordered_json doc = ordered_json::object();
    doc["config"] = std::move(config);
    doc["classes"] = std::move(classes);
    doc["mean"] = std::move(mean);
    return doc.dump(2) + "\n";
}

void save_report(const EvalReport& report, const std::string& path,
                 const ClassRegistry& registry) {
    write_file_atomic(path, report_to_json(report, registry));
}

} // namespace msdet
