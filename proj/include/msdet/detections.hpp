#pragma once

#include <msdet/geometry.hpp>

#include <optional>
#include <string>
#include <vector>

namespace msdet {

struct DefectClass {
    int id;
    std::string name;  // the code used in data files, e.g. "C3"
    std::string label; // human description, e.g. "overheating"
};

/// Registry of known defect classes. The canonical registry holds
/// C1=cracks, C2=corrosion, C3=overheating; more classes can be added
/// as long as names and ids stay unique.
class ClassRegistry {
public:
    /// C1/C2/C3 with ids 1..3.
    static ClassRegistry canonical();

    int register_class(const std::string& name, const std::string& label = "");

    const DefectClass& by_id(int id) const;
    std::optional<int> id_of(const std::string& name) const;
    const std::vector<DefectClass>& classes() const { return classes_; }

private:
    std::vector<DefectClass> classes_;
};

struct Detection {
    int class_id;
    BoundingBox box;
    double conf; // in [0, 1]
};

struct GroundTruthObject {
    int class_id;
    BoundingBox box;
};

/// One model's output for one image. Detection order is preserved exactly
/// as loaded; the list index is used for deterministic tie-breaking.
struct DetectionSet {
    std::string image_id;
    double image_w = 0.0;
    double image_h = 0.0;
    std::vector<Detection> detections;
};

struct GroundTruthSet {
    std::string image_id;
    double image_w = 0.0;
    double image_h = 0.0;
    std::vector<GroundTruthObject> objects;
};

/// How box coordinates are interpreted when reading a detections file.
enum class BoxFormat {
    PixelTopLeft,     // x,y,w,h in pixels, (x,y) the top-left corner (the on-disk convention)
    NormalizedCenter, // cx,cy,w,h as fractions of the image; converted on load
};

std::vector<DetectionSet> load_detections(const std::string& path,
                                          const ClassRegistry& registry = ClassRegistry::canonical(),
                                          BoxFormat format = BoxFormat::PixelTopLeft);

std::vector<GroundTruthSet> load_ground_truth(const std::string& path,
                                              const ClassRegistry& registry = ClassRegistry::canonical(),
                                              BoxFormat format = BoxFormat::PixelTopLeft);

/// Canonical serialization: fixed key order, shortest round-trip number
/// formatting, newline-terminated. Equal data always produces identical bytes.
void save_detections(const std::vector<DetectionSet>& sets, const std::string& path,
                     const ClassRegistry& registry = ClassRegistry::canonical());

void save_ground_truth(const std::vector<GroundTruthSet>& sets, const std::string& path,
                       const ClassRegistry& registry = ClassRegistry::canonical());

std::string detections_to_json(const std::vector<DetectionSet>& sets,
                               const ClassRegistry& registry = ClassRegistry::canonical());

std::string ground_truth_to_json(const std::vector<GroundTruthSet>& sets,
                                 const ClassRegistry& registry = ClassRegistry::canonical());

} // namespace msdet
