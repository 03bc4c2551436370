#include <msdet/registration.hpp>

#include <msdet/errors.hpp>
#include <msdet/io_util.hpp>
#include <msdet/parallel.hpp>
#include <msdet/rng.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace msdet {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kDenominatorEps = 1e-12;
constexpr double kCollinearAreaEps = 1e-9;

Eigen::Matrix3d to_eigen(const std::array<std::array<double, 3>, 3>& m) {
    Eigen::Matrix3d e;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) e(r, c) = m[r][c];
    return e;
}

std::array<std::array<double, 3>, 3> from_eigen(const Eigen::Matrix3d& e) {
    std::array<std::array<double, 3>, 3> m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] = e(r, c);
    return m;
}

} // namespace

Homography Homography::identity() {
    return Homography({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
}

Homography::Homography(const std::array<std::array<double, 3>, 3>& m) {
    for (const auto& row : m) {
        for (const double v : row) {
            if (!std::isfinite(v)) {
                throw ValidationError("homography entries must be finite");
            }
        }
    }
    const double scale = m[2][2];
    if (std::abs(scale) < kDenominatorEps) {
        throw ValidationError("homography cannot be normalized: h33 is (near) zero");
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m_[r][c] = m[r][c] / scale;
    m_[2][2] = 1.0;
    if (std::abs(to_eigen(m_).determinant()) <= kDenominatorEps) {
        throw ValidationError("homography is singular");
    }
}

Homography Homography::inverse() const {
    return Homography(from_eigen(to_eigen(m_).inverse()));
}

Homography Homography::compose(const Homography& inner) const {
    return Homography(from_eigen(to_eigen(m_) * to_eigen(inner.m_)));
}

Point apply(const Homography& h, const Point& p) {
    const auto& m = h.matrix();
    const double den = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    if (std::abs(den) <= kDenominatorEps) {
        std::ostringstream msg;
        msg << "point (" << p.x << ", " << p.y << ") maps to infinity";
        throw ValidationError(msg.str());
    }
    return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / den,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / den};
}

namespace {

double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

bool has_collinear_triple(const std::vector<Point>& pts) {
    for (std::size_t i = 0; i + 2 < pts.size(); ++i)
        for (std::size_t j = i + 1; j + 1 < pts.size(); ++j)
            for (std::size_t k = j + 1; k < pts.size(); ++k)
                if (triangle_area(pts[i], pts[j], pts[k]) <= kCollinearAreaEps) return true;
    return false;
}

struct Normalization {
    // Similarity transform moving the centroid to the origin and the mean
    // distance to sqrt(2) (Hartley conditioning).
    Eigen::Matrix3d t;
};

Normalization normalize_points(const std::vector<Point>& pts, std::vector<Point>& out) {
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const auto& p : pts) {
        mean_dist += std::hypot(p.x - cx, p.y - cy);
    }
    mean_dist /= static_cast<double>(pts.size());
    if (mean_dist < kDenominatorEps) {
        throw ValidationError("degenerate correspondences: points coincide");
    }
    const double s = std::numbers::sqrt2 / mean_dist;
    out.clear();
    out.reserve(pts.size());
    for (const auto& p : pts) {
        out.push_back({s * (p.x - cx), s * (p.y - cy)});
    }
    Normalization n;
    n.t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return n;
}

Homography dlt(const std::vector<Correspondence>& corrs) {
    std::vector<Point> src(corrs.size()), dst(corrs.size());
    for (std::size_t i = 0; i < corrs.size(); ++i) {
        src[i] = corrs[i].src;
        dst[i] = corrs[i].dst;
    }
    std::vector<Point> src_n, dst_n;
    const Normalization ts = normalize_points(src, src_n);
    const Normalization td = normalize_points(dst, dst_n);

    const auto n = static_cast<Eigen::Index>(corrs.size());
    Eigen::MatrixXd a(2 * n, 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point& s = src_n[static_cast<std::size_t>(i)];
        const Point& d = dst_n[static_cast<std::size_t>(i)];
        a.row(2 * i) << s.x, s.y, 1, 0, 0, 0, -d.x * s.x, -d.x * s.y, -d.x;
        a.row(2 * i + 1) << 0, 0, 0, s.x, s.y, 1, -d.y * s.x, -d.y * s.y, -d.y;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    const Eigen::Matrix3d denorm = td.t.inverse() * hn * ts.t;
    try {
        return Homography(from_eigen(denorm));
    } catch (const ValidationError&) {
        throw ValidationError("degenerate correspondences: DLT produced a singular homography");
    }
}

double reprojection_distance(const Homography& h, const Correspondence& c) {
    try {
        const Point projected = apply(h, c.src);
        return std::hypot(projected.x - c.dst.x, projected.y - c.dst.y);
    } catch (const ValidationError&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace

Homography estimate_homography(const std::vector<Correspondence>& corrs,
                               const std::optional<RansacParams>& robust) {
    if (corrs.size() < 4) {
        throw ValidationError("homography estimation needs at least 4 correspondences, got " +
                              std::to_string(corrs.size()));
    }
    if (!robust) {
        std::vector<Point> src(corrs.size());
        for (std::size_t i = 0; i < corrs.size(); ++i) src[i] = corrs[i].src;
        if (has_collinear_triple(src)) {
            throw ValidationError("degenerate correspondences: 3 collinear source points");
        }
        return dlt(corrs);
    }

    if (robust->iterations < 1) {
        throw ValidationError("RANSAC iteration count must be positive");
    }
    Rng rng(robust->seed);
    const std::size_t n = corrs.size();
    std::vector<std::size_t> best_inliers;
    for (int iter = 0; iter < robust->iterations; ++iter) {
        std::size_t idx[4];
        for (int k = 0; k < 4; ++k) {
            bool fresh;
            do {
                idx[k] = static_cast<std::size_t>(rng.below(n));
                fresh = true;
                for (int p = 0; p < k; ++p) fresh = fresh && idx[p] != idx[k];
            } while (!fresh);
        }
        std::vector<Correspondence> sample = {corrs[idx[0]], corrs[idx[1]], corrs[idx[2]],
                                              corrs[idx[3]]};
        std::vector<Point> sample_src, sample_dst;
        for (const auto& c : sample) {
            sample_src.push_back(c.src);
            sample_dst.push_back(c.dst);
        }
        if (has_collinear_triple(sample_src) || has_collinear_triple(sample_dst)) {
            continue;
        }
        Homography model = Homography::identity();
        try {
            model = dlt(sample);
        } catch (const ValidationError&) {
            continue;
        }
        std::vector<std::size_t> inliers;
        for (std::size_t i = 0; i < n; ++i) {
            if (reprojection_distance(model, corrs[i]) <= robust->inlier_threshold) {
                inliers.push_back(i);
            }
        }
        if (inliers.size() > best_inliers.size()) {
            best_inliers = std::move(inliers);
        }
    }
    if (best_inliers.size() < 4) {
        throw ValidationError("RANSAC found no consensus (fewer than 4 inliers)");
    }
    std::vector<Correspondence> consensus;
    consensus.reserve(best_inliers.size());
    for (const std::size_t i : best_inliers) consensus.push_back(corrs[i]);
    return dlt(consensus);
}

std::vector<Correspondence> load_correspondences_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty correspondences file: " + path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "src_x,src_y,dst_x,dst_y") {
        throw IoError("bad correspondences header in " + path +
                      " (expected src_x,src_y,dst_x,dst_y)");
    }
    std::vector<Correspondence> corrs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        double v[4];
        char comma;
        if (!(row >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3]) ||
            !std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]) ||
            !std::isfinite(v[3])) {
            throw IoError("bad correspondence row at " + path + ":" + std::to_string(line_no));
        }
        corrs.push_back({{v[0], v[1]}, {v[2], v[3]}});
    }
    return corrs;
}

Homography load_homography_json(const std::string& path) {
    const std::string text = read_file(path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("malformed homography JSON in " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("h") || !doc["h"].is_array() || doc["h"].size() != 3) {
        throw IoError("homography JSON must hold a 3x3 \"h\" matrix: " + path);
    }
    std::array<std::array<double, 3>, 3> m;
    for (int r = 0; r < 3; ++r) {
        const auto& row = doc["h"][r];
        if (!row.is_array() || row.size() != 3) {
            throw IoError("homography JSON must hold a 3x3 \"h\" matrix: " + path);
        }
        for (int c = 0; c < 3; ++c) {
            if (!row[c].is_number()) {
                throw IoError("homography JSON entries must be numbers: " + path);
            }
            m[r][c] = row[c].get<double>();
        }
    }
    return Homography(m);
}

void save_homography_json(const Homography& h, const std::string& path) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : h.matrix()) {
        rows.push_back(ordered_json(row));
    }
    ordered_json doc = ordered_json::object();
    doc["h"] = std::move(rows);
    write_file_atomic(path, doc.dump(2) + "\n");
}

namespace {

std::uint16_t round_clamped(double v, std::uint16_t max_value) {
    const long long r = std::llround(v); // half away from zero
    if (r < 0) return 0;
    if (r > max_value) return max_value;
    return static_cast<std::uint16_t>(r);
}

} // namespace

Raster warp(const Raster& src, const Homography& h, int out_w, int out_h, std::uint16_t fill,
            int threads) {
    Raster out(out_w, out_h, src.channels(), src.bit_depth());
    const int sw = src.width();
    const int sh = src.height();
    parallel_for(static_cast<std::size_t>(out_h), threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < out_w; ++x) {
            const Point p = apply(h, {x + 0.5, y + 0.5});
            const double sx = p.x - 0.5;
            const double sy = p.y - 0.5;
            if (sx < 0.0 || sx > sw - 1 || sy < 0.0 || sy > sh - 1) {
                for (int c = 0; c < src.channels(); ++c) out.set(x, y, c, fill);
                continue;
            }
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0;
            const double fy = sy - y0;
            const int x1 = std::min(x0 + 1, sw - 1);
            const int y1 = std::min(y0 + 1, sh - 1);
            for (int c = 0; c < src.channels(); ++c) {
                const double v = (1.0 - fx) * (1.0 - fy) * src.at(x0, y0, c) +
                                 fx * (1.0 - fy) * src.at(x1, y0, c) +
                                 (1.0 - fx) * fy * src.at(x0, y1, c) +
                                 fx * fy * src.at(x1, y1, c);
                out.set(x, y, c, round_clamped(v, out.max_value()));
            }
        }
    });
    return out;
}

Colormap colormap_from_name(const std::string& name) {
    if (name == "gray") return Colormap::Gray;
    if (name == "iron") return Colormap::Iron;
    throw ValidationError("unknown colormap: " + name);
}

namespace {

// Ironbow-style palette: black through purple and red into yellow-white.
const std::array<std::array<double, 3>, 256>& iron_lut() {
    static const auto lut = [] {
        std::array<std::array<double, 3>, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double x = i / 255.0;
            const double r = std::sqrt(x);
            const double g = x * x * x;
            const double b =
                std::max(std::max(0.0, std::sin(2.0 * std::numbers::pi * x)),
                         std::max(0.0, 4.0 * x - 3.0));
            t[static_cast<std::size_t>(i)] = {std::round(r * 255.0), std::round(g * 255.0),
                                              std::round(std::min(b, 1.0) * 255.0)};
        }
        return t;
    }();
    return lut;
}

std::array<double, 3> map_color(Colormap cm, double v) {
    if (cm == Colormap::Gray) {
        const double g = v * 255.0;
        return {g, g, g};
    }
    const int idx = static_cast<int>(std::lround(v * 255.0));
    return iron_lut()[static_cast<std::size_t>(std::clamp(idx, 0, 255))];
}

} // namespace

Raster fuse_images(const Raster& rgb, const Raster& ir_aligned, double weight, Colormap colormap,
                   std::optional<std::pair<double, double>> fixed_range, int threads) {
    if (rgb.channels() != 3 || rgb.bit_depth() != 8) {
        throw ValidationError("fusion expects an 8-bit RGB raster");
    }
    if (ir_aligned.channels() != 1) {
        throw ValidationError("fusion expects a single-channel IR raster");
    }
    if (rgb.width() != ir_aligned.width() || rgb.height() != ir_aligned.height()) {
        throw ValidationError("fusion inputs must share dimensions");
    }
    if (!(std::isfinite(weight) && weight >= 0.0 && weight <= 1.0)) {
        throw ValidationError("fusion weight must lie in [0,1]");
    }

    double lo, hi;
    if (fixed_range) {
        lo = fixed_range->first;
        hi = fixed_range->second;
        if (!(hi > lo)) {
            throw ValidationError("fixed normalization range must have max > min");
        }
    } else {
        const auto [min_it, max_it] =
            std::minmax_element(ir_aligned.data().begin(), ir_aligned.data().end());
        lo = *min_it;
        hi = *max_it;
    }

    Raster out(rgb.width(), rgb.height(), 3, 8);
    parallel_for(static_cast<std::size_t>(rgb.height()), threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < rgb.width(); ++x) {
            const double ir = ir_aligned.at(x, y, 0);
            const double v = hi > lo ? std::clamp((ir - lo) / (hi - lo), 0.0, 1.0) : 0.0;
            const std::array<double, 3> cm = map_color(colormap, v);
            for (int c = 0; c < 3; ++c) {
                const double blended = weight * rgb.at(x, y, c) + (1.0 - weight) * cm[c];
                out.set(x, y, c, round_clamped(blended, 255));
            }
        }
    });
    return out;
}

} // namespace msdet
