#include <msdet/detections.hpp>

#include <msdet/io_util.hpp>

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace msdet {

using ordered_json = nlohmann::ordered_json;

ClassRegistry ClassRegistry::canonical() {
    ClassRegistry r;
    r.register_class("C1", "cracks");
    r.register_class("C2", "corrosion");
    r.register_class("C3", "overheating");
    return r;
}

int ClassRegistry::register_class(const std::string& name, const std::string& label) {
    if (id_of(name)) {
        throw ValidationError("class already registered: " + name);
    }
    const int id = classes_.empty() ? 1 : classes_.back().id + 1;
    classes_.push_back({id, name, label});
    return id;
}

const DefectClass& ClassRegistry::by_id(int id) const {
    for (const auto& c : classes_) {
        if (c.id == id) return c;
    }
    throw ValidationError("unknown class id: " + std::to_string(id));
}

std::optional<int> ClassRegistry::id_of(const std::string& name) const {
    for (const auto& c : classes_) {
        if (c.name == name) return c.id;
    }
    return std::nullopt;
}

namespace {

// Line/column for a byte offset, for parse-error context.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

ordered_json parse_document(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream msg;
        msg << "malformed JSON in " << path << " at line " << line << ", column " << col
            << ": " << e.what();
        throw ValidationError(msg.str());
    }
}

double require_number(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        throw ValidationError(where + ": missing or non-numeric \"" + key + "\"");
    }
    return obj[key].get<double>();
}

std::string require_string(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw ValidationError(where + ": missing or non-string \"" + key + "\"");
    }
    return obj[key].get<std::string>();
}

struct ParsedBox {
    int class_id;
    BoundingBox box;
};

ParsedBox parse_class_and_box(const ordered_json& entry, const ClassRegistry& registry,
                              BoxFormat format, double img_w, double img_h,
                              const std::string& where) {
    const std::string class_name = require_string(entry, "class", where);
    const auto class_id = registry.id_of(class_name);
    if (!class_id) {
        throw ValidationError(where + ": unknown class name \"" + class_name + "\"");
    }
    const double x = require_number(entry, "x", where);
    const double y = require_number(entry, "y", where);
    const double w = require_number(entry, "w", where);
    const double h = require_number(entry, "h", where);
    try {
        BoundingBox box = format == BoxFormat::NormalizedCenter
                              ? from_normalized_center(x, y, w, h, img_w, img_h)
                              : BoundingBox(x, y, w, h);
        // Lenient bound: detectors may overflow the frame a little, but a box
        // far outside [-W,2W]x[-H,2H] indicates corrupt coordinates.
        if (box.x() < -img_w || box.right() > 2.0 * img_w ||
            box.y() < -img_h || box.bottom() > 2.0 * img_h) {
            throw ValidationError("box outside the lenient image bounds");
        }
        return {*class_id, box};
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

template <typename Set, typename EntryParser>
std::vector<Set> load_sets(const std::string& path, const char* list_key,
                           EntryParser parse_entry) {
    const ordered_json doc = parse_document(path);
    if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
        throw ValidationError(path + ": expected a top-level object with an \"images\" array");
    }
    std::vector<Set> sets;
    std::set<std::string> seen_ids;
    for (const auto& img : doc["images"]) {
        if (!img.is_object()) {
            throw ValidationError(path + ": image entries must be objects");
        }
        Set set;
        set.image_id = require_string(img, "id", path);
        const std::string where = path + ", image \"" + set.image_id + "\"";
        if (!seen_ids.insert(set.image_id).second) {
            throw ValidationError(where + ": duplicate image id");
        }
        set.image_w = require_number(img, "width", where);
        set.image_h = require_number(img, "height", where);
        if (!(set.image_w > 0.0 && set.image_h > 0.0)) {
            throw ValidationError(where + ": non-positive image dimensions");
        }
        if (img.contains(list_key)) {
            if (!img[list_key].is_array()) {
                throw ValidationError(where + ": \"" + list_key + "\" must be an array");
            }
            std::size_t index = 0;
            for (const auto& entry : img[list_key]) {
                std::ostringstream entry_where;
                entry_where << where << ", " << list_key << "[" << index << "]";
                parse_entry(set, entry, entry_where.str());
                ++index;
            }
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

} // namespace

std::vector<DetectionSet> load_detections(const std::string& path,
                                          const ClassRegistry& registry, BoxFormat format) {
    return load_sets<DetectionSet>(
        path, "detections",
        [&](DetectionSet& set, const ordered_json& entry, const std::string& where) {
            const double conf = require_number(entry, "conf", where);
            if (!(conf >= 0.0 && conf <= 1.0)) {
                std::ostringstream msg;
                msg << where << ": conf " << conf << " outside [0,1]";
                throw ValidationError(msg.str());
            }
            ParsedBox pb =
                parse_class_and_box(entry, registry, format, set.image_w, set.image_h, where);
            set.detections.push_back({pb.class_id, pb.box, conf});
        });
}

std::vector<GroundTruthSet> load_ground_truth(const std::string& path,
                                              const ClassRegistry& registry, BoxFormat format) {
    return load_sets<GroundTruthSet>(
        path, "objects",
        [&](GroundTruthSet& set, const ordered_json& entry, const std::string& where) {
            ParsedBox pb =
                parse_class_and_box(entry, registry, format, set.image_w, set.image_h, where);
            set.objects.push_back({pb.class_id, pb.box});
        });
}

namespace {

ordered_json box_fields(const BoundingBox& box) {
    ordered_json j = ordered_json::object();
    j["x"] = box.x();
    j["y"] = box.y();
    j["w"] = box.w();
    j["h"] = box.h();
    return j;
}

} // namespace

std::string detections_to_json(const std::vector<DetectionSet>& sets,
                               const ClassRegistry& registry) {
    ordered_json images = ordered_json::array();
    for (const auto& set : sets) {
        ordered_json img = ordered_json::object();
        img["id"] = set.image_id;
        img["width"] = set.image_w;
        img["height"] = set.image_h;
        ordered_json dets = ordered_json::array();
        for (const auto& d : set.detections) {
            ordered_json entry = ordered_json::object();
            entry["class"] = registry.by_id(d.class_id).name;
            entry.update(box_fields(d.box));
            entry["conf"] = d.conf;
            dets.push_back(std::move(entry));
        }
        img["detections"] = std::move(dets);
        images.push_back(std::move(img));
    }
    ordered_json doc = ordered_json::object();
    doc["images"] = std::move(images);
    return doc.dump(2) + "\n";
}

std::string ground_truth_to_json(const std::vector<GroundTruthSet>& sets,
                                 const ClassRegistry& registry) {
    ordered_json images = ordered_json::array();
    for (const auto& set : sets) {
        ordered_json img = ordered_json::object();
        img["id"] = set.image_id;
        img["width"] = set.image_w;
        img["height"] = set.image_h;
        ordered_json objs = ordered_json::array();
        for (const auto& o : set.objects) {
            ordered_json entry = ordered_json::object();
            entry["class"] = registry.by_id(o.class_id).name;
            entry.update(box_fields(o.box));
            objs.push_back(std::move(entry));
        }
        img["objects"] = std::move(objs);
        images.push_back(std::move(img));
    }
    ordered_json doc = ordered_json::object();
    doc["images"] = std::move(images);
    return doc.dump(2) + "\n";
}

void save_detections(const std::vector<DetectionSet>& sets, const std::string& path,
                     const ClassRegistry& registry) {
    write_file_atomic(path, detections_to_json(sets, registry));
}

void save_ground_truth(const std::vector<GroundTruthSet>& sets, const std::string& path,
                       const ClassRegistry& registry) {
    write_file_atomic(path, ground_truth_to_json(sets, registry));
}

} // namespace msdet
