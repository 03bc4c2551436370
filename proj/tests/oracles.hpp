#pragma once

// Test-only reference implementations, deliberately independent of the
// library code paths they check.

#include <msdet/geometry.hpp>
#include <msdet/metrics.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

namespace msdet::test {

struct IntBox {
    std::int64_t x, y, w, h;
};

/// Exact IoU for integer-coordinate boxes in integer arithmetic; the
/// division is the only inexact step.
inline double rational_iou(const IntBox& a, const IntBox& b) {
    const std::int64_t ix =
        std::max<std::int64_t>(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const std::int64_t iy =
        std::max<std::int64_t>(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const std::int64_t inter = ix * iy;
    const std::int64_t uni = a.w * a.h + b.w * b.h - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Pixel-grid IoU: counts lattice cells (resolution x resolution per unit
/// square) whose centers fall inside each box. Converges to the true IoU
/// as the grid refines; exact for integer boxes at resolution 1.
inline double lattice_iou(const BoundingBox& a, const BoundingBox& b, int resolution) {
    const double lo_x = std::min(a.x(), b.x());
    const double hi_x = std::max(a.right(), b.right());
    const double lo_y = std::min(a.y(), b.y());
    const double hi_y = std::max(a.bottom(), b.bottom());
    const double step = 1.0 / resolution;
    std::int64_t inter = 0, uni = 0;
    for (double cy = lo_y + step / 2; cy < hi_y; cy += step) {
        for (double cx = lo_x + step / 2; cx < hi_x; cx += step) {
            const bool in_a = cx >= a.x() && cx < a.right() && cy >= a.y() && cy < a.bottom();
            const bool in_b = cx >= b.x() && cx < b.right() && cy >= b.y() && cy < b.bottom();
            inter += in_a && in_b;
            uni += in_a || in_b;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Brute-force 101-point interpolated AP: walks the raw PR points for every
/// recall target instead of using a precision envelope.
inline double brute_force_ap(const std::vector<Label>& labels_sorted, std::size_t num_gt) {
    if (num_gt == 0) {
        return labels_sorted.empty() ? 1.0 : 0.0;
    }
    std::vector<double> precision, recall;
    std::size_t tp = 0, seen = 0;
    for (const Label& l : labels_sorted) {
        ++seen;
        if (l.tp) ++tp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    }
    double sum = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double target = r / 100.0;
        double best = 0.0;
        for (std::size_t k = 0; k < precision.size(); ++k) {
            if (recall[k] >= target) {
                best = std::max(best, precision[k]);
            }
        }
        sum += best;
    }
    return sum / 101.0;
}

} // namespace msdet::test
