#pragma once

#include <msdet/raster.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msdet {

struct Point {
    double x;
    double y;
};

/// 3x3 projective transform, normalized so the bottom-right entry is 1.
class Homography {
public:
    static Homography identity();

    /// Normalizes to m[2][2] = 1 and requires the matrix to be invertible.
    explicit Homography(const std::array<std::array<double, 3>, 3>& m);

    const std::array<std::array<double, 3>, 3>& matrix() const { return m_; }

    Homography inverse() const;
    Homography compose(const Homography& inner) const; // this ∘ inner

    bool operator==(const Homography& other) const = default;

private:
    Homography() = default;
    std::array<std::array<double, 3>, 3> m_{};
};

/// Projective application (x', y') = (h11x+h12y+h13, h21x+h22y+h23) / (h31x+h32y+1).
/// Throws when the denominator collapses (point at infinity).
Point apply(const Homography& h, const Point& p);

struct Correspondence {
    Point src; // IR frame
    Point dst; // RGB frame
};

struct RansacParams {
    int iterations = 1000;
    double inlier_threshold = 2.0; // reprojection distance, pixels
    std::uint64_t seed = 0;
};

/// Normalized DLT over >= 4 correspondences; with `robust` set, RANSAC on
/// minimal samples followed by a DLT refit on the consensus set.
Homography estimate_homography(const std::vector<Correspondence>& corrs,
                               const std::optional<RansacParams>& robust = std::nullopt);

/// CSV with header src_x,src_y,dst_x,dst_y.
std::vector<Correspondence> load_correspondences_csv(const std::string& path);

Homography load_homography_json(const std::string& path);
void save_homography_json(const Homography& h, const std::string& path);

/// Inverse-mapping warp: each output pixel is sampled at
/// apply(h, (x+0.5, y+0.5)) - 0.5 with bilinear interpolation; samples
/// falling outside the source take `fill`. `threads` bounds row-level
/// parallelism and never changes the result.
Raster warp(const Raster& src, const Homography& h, int out_w, int out_h,
            std::uint16_t fill, int threads = 1);

enum class Colormap { Gray, Iron };

Colormap colormap_from_name(const std::string& name);

/// Per-pixel blend weight*RGB + (1-weight)*colormap(normalized IR), 8-bit
/// output. IR normalization is min-max over the raster unless a fixed
/// [norm_min, norm_max] range is supplied.
Raster fuse_images(const Raster& rgb, const Raster& ir_aligned, double weight,
                   Colormap colormap = Colormap::Gray,
                   std::optional<std::pair<double, double>> fixed_range = std::nullopt,
                   int threads = 1);

} // namespace msdet
