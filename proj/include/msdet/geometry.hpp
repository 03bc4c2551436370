#pragma once

#include <msdet/errors.hpp>

namespace msdet {

/// Axis-aligned box in pixel units. (x, y) is the top-left corner;
/// w and h must be strictly positive and all fields finite.
class BoundingBox {
public:
    BoundingBox(double x, double y, double w, double h);

    double x() const { return x_; }
    double y() const { return y_; }
    double w() const { return w_; }
    double h() const { return h_; }

    double right() const { return x_ + w_; }
    double bottom() const { return y_ + h_; }

    double area() const { return w_ * h_; }

    bool operator==(const BoundingBox& other) const = default;

private:
    double x_, y_, w_, h_;
};

/// Intersection area over union area, in [0, 1]. Zero for disjoint boxes,
/// symmetric in its arguments.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Converts a center-format box with coordinates normalized to [0, 1]
/// into a pixel-unit top-left box for an img_w x img_h image.
BoundingBox from_normalized_center(double cx, double cy, double w, double h,
                                   double img_w, double img_h);

} // namespace msdet
