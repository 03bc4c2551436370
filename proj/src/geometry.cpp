#include <msdet/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msdet {

BoundingBox::BoundingBox(double x, double y, double w, double h)
    : x_(x), y_(y), w_(w), h_(h) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h))) {
        throw ValidationError("invalid box: non-finite field");
    }
    if (!(w > 0.0 && h > 0.0)) {
        std::ostringstream msg;
        msg << "invalid box: non-positive extent (w=" << w << ", h=" << h << ")";
        throw ValidationError(msg.str());
    }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
    const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
    if (ix <= 0.0 || iy <= 0.0) {
        return 0.0;
    }
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

BoundingBox from_normalized_center(double cx, double cy, double w, double h,
                                   double img_w, double img_h) {
    if (!(img_w > 0.0 && img_h > 0.0)) {
        throw ValidationError("invalid image dimensions for box conversion");
    }
    return BoundingBox((cx - w / 2.0) * img_w, (cy - h / 2.0) * img_h,
                       w * img_w, h * img_h);
}

} // namespace msdet
