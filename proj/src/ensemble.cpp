#include <msdet/ensemble.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace msdet {

using ordered_json = nlohmann::ordered_json;

void FusionConfig::validate() const {
    if (!(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("gamma must lie in [0,1]");
    }
    if (!(std::isfinite(tau_iou) && tau_iou > 0.0 && tau_iou <= 1.0)) {
        throw ValidationError("tau_iou must lie in (0,1]");
    }
    if (!(std::isfinite(tau_nms) && tau_nms > 0.0 && tau_nms <= 1.0)) {
        throw ValidationError("tau_nms must lie in (0,1]");
    }
    for (const auto& [class_id, g] : gamma_per_class) {
        if (!(std::isfinite(g) && g >= 0.0 && g <= 1.0)) {
            throw ValidationError("per-class gamma for class id " + std::to_string(class_id) +
                                  " must lie in [0,1]");
        }
    }
}

double FusionConfig::gamma_for(int class_id) const {
    auto it = gamma_per_class.find(class_id);
    return it == gamma_per_class.end() ? gamma : it->second;
}

namespace {

// Keeps the combination inside the input interval under rounding.
double convex(double a_baseline, double b_thermal, double gamma) {
    const double v = gamma * b_thermal + (1.0 - gamma) * a_baseline;
    return std::clamp(v, std::min(a_baseline, b_thermal), std::max(a_baseline, b_thermal));
}

// Canonical scan order: descending confidence, ties by ascending input index.
std::vector<std::size_t> canonical_order(const std::vector<Detection>& dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].conf > dets[b].conf;
    });
    return order;
}

} // namespace

Detection fuse_pair(const Detection& d_baseline, const Detection& d_thermal, double gamma) {
    if (d_baseline.class_id != d_thermal.class_id) {
        throw ValidationError("fuse_pair: class mismatch");
    }
    if (!(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("fuse_pair: gamma must lie in [0,1]");
    }
    const BoundingBox& a = d_baseline.box;
    const BoundingBox& b = d_thermal.box;
    return Detection{
        d_baseline.class_id,
        BoundingBox(convex(a.x(), b.x(), gamma), convex(a.y(), b.y(), gamma),
                    convex(a.w(), b.w(), gamma), convex(a.h(), b.h(), gamma)),
        convex(d_baseline.conf, d_thermal.conf, gamma),
    };
}

MatchResult match_and_fuse(const DetectionSet& baseline, const DetectionSet& thermal,
                           const FusionConfig& cfg) {
    if (baseline.image_id != thermal.image_id) {
        throw ValidationError("match_and_fuse: image id mismatch (\"" + baseline.image_id +
                              "\" vs \"" + thermal.image_id + "\")");
    }
    cfg.validate();

    const auto order_b = canonical_order(baseline.detections);
    const auto order_t = canonical_order(thermal.detections);
    std::vector<bool> thermal_merged(thermal.detections.size(), false);

    MatchResult result;
    for (const std::size_t i : order_b) {
        const Detection& d_i = baseline.detections[i];
        bool match_found = false;
        for (const std::size_t j : order_t) {
            if (thermal_merged[j]) continue;
            const Detection& d_j = thermal.detections[j];
            if (d_i.class_id != d_j.class_id) continue;
            if (iou(d_i.box, d_j.box) < cfg.tau_iou) continue;
            result.fused.push_back({fuse_pair(d_i, d_j, cfg.gamma_for(d_i.class_id)),
                                    Provenance::Fused, i, j});
            thermal_merged[j] = true;
            match_found = true;
            break;
        }
        if (!match_found) {
            result.unmerged.push_back({d_i, Provenance::BaselineOnly, i, std::nullopt});
        }
    }
    for (const std::size_t j : order_t) {
        if (!thermal_merged[j]) {
            result.unmerged.push_back(
                {thermal.detections[j], Provenance::ThermalOnly, std::nullopt, j});
        }
    }
    return result;
}

std::vector<std::size_t> nms_indices(const std::vector<Detection>& dets, double tau_nms,
                                     bool class_agnostic) {
    if (!(std::isfinite(tau_nms) && tau_nms > 0.0 && tau_nms <= 1.0)) {
        throw ValidationError("tau_nms must lie in (0,1]");
    }
    const auto order = canonical_order(dets);
    std::vector<bool> suppressed(dets.size(), false);
    std::vector<std::size_t> keep;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        if (suppressed[i]) continue;
        keep.push_back(i);
        for (std::size_t pos2 = pos + 1; pos2 < order.size(); ++pos2) {
            const std::size_t j = order[pos2];
            if (suppressed[j]) continue;
            if (!class_agnostic && dets[i].class_id != dets[j].class_id) continue;
            if (iou(dets[i].box, dets[j].box) > tau_nms) {
                suppressed[j] = true;
            }
        }
    }
    return keep;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double tau_nms,
                           bool class_agnostic) {
    std::vector<Detection> out;
    for (const std::size_t i : nms_indices(dets, tau_nms, class_agnostic)) {
        out.push_back(dets[i]);
    }
    return out;
}

EnsembleResult ensemble_fuse(const DetectionSet& baseline, const DetectionSet& thermal,
                             const FusionConfig& cfg) {
    MatchResult matched = match_and_fuse(baseline, thermal, cfg);

    std::vector<FusedDetection> combined = std::move(matched.fused);
    combined.insert(combined.end(), matched.unmerged.begin(), matched.unmerged.end());

    std::vector<Detection> dets;
    dets.reserve(combined.size());
    for (const auto& fd : combined) {
        dets.push_back(fd.detection);
    }

    EnsembleResult result;
    result.set.image_id = baseline.image_id;
    result.set.image_w = baseline.image_w > 0.0 ? baseline.image_w : thermal.image_w;
    result.set.image_h = baseline.image_h > 0.0 ? baseline.image_h : thermal.image_h;
    for (const std::size_t i : nms_indices(dets, cfg.tau_nms, cfg.class_agnostic_nms)) {
        result.set.detections.push_back(combined[i].detection);
        result.audit.push_back(combined[i]);
    }
    return result;
}

std::string audit_to_json(const std::vector<EnsembleResult>& results) {
    ordered_json images = ordered_json::array();
    for (const auto& r : results) {
        ordered_json img = ordered_json::object();
        img["id"] = r.set.image_id;
        ordered_json dets = ordered_json::array();
        for (const auto& fd : r.audit) {
            ordered_json entry = ordered_json::object();
            switch (fd.provenance) {
                case Provenance::BaselineOnly: entry["source"] = "baseline"; break;
                case Provenance::ThermalOnly: entry["source"] = "thermal"; break;
                case Provenance::Fused: entry["source"] = "fused"; break;
            }
            entry["baseline_index"] =
                fd.baseline_index ? ordered_json(*fd.baseline_index) : ordered_json(nullptr);
            entry["thermal_index"] =
                fd.thermal_index ? ordered_json(*fd.thermal_index) : ordered_json(nullptr);
            dets.push_back(std::move(entry));
        }
        img["detections"] = std::move(dets);
        images.push_back(std::move(img));
    }
    ordered_json doc = ordered_json::object();
    doc["images"] = std::move(images);
    return doc.dump(2) + "\n";
}

} // namespace msdet
