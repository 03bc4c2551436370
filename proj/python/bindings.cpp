#include <msdet/detections.hpp>
#include <msdet/ensemble.hpp>
#include <msdet/geometry.hpp>
#include <msdet/metrics.hpp>
#include <msdet/registration.hpp>
#include <msdet/synth.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace msdet;

PYBIND11_MODULE(_msdet, m) {
    m.doc() = "Multispectral detection toolkit: box-ensemble fusion, detection metrics, "
              "homography registration, and RGB/IR image blending";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<BoundingBox>(m, "BoundingBox")
        .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"),
             py::arg("w"), py::arg("h"))
        .def_property_readonly("x", &BoundingBox::x)
        .def_property_readonly("y", &BoundingBox::y)
        .def_property_readonly("w", &BoundingBox::w)
        .def_property_readonly("h", &BoundingBox::h)
        .def("area", &BoundingBox::area)
        .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
        .def("__repr__", [](const BoundingBox& b) {
            std::ostringstream s;
            s << "BoundingBox(" << b.x() << ", " << b.y() << ", " << b.w() << ", " << b.h()
              << ")";
            return s.str();
        });

    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("from_normalized_center", &from_normalized_center, py::arg("cx"), py::arg("cy"),
          py::arg("w"), py::arg("h"), py::arg("img_w"), py::arg("img_h"));

    py::class_<Detection>(m, "Detection")
        .def(py::init<int, BoundingBox, double>(), py::arg("class_id"), py::arg("box"),
             py::arg("conf"))
        .def_readwrite("class_id", &Detection::class_id)
        .def_readwrite("box", &Detection::box)
        .def_readwrite("conf", &Detection::conf);

    py::class_<GroundTruthObject>(m, "GroundTruthObject")
        .def(py::init<int, BoundingBox>(), py::arg("class_id"), py::arg("box"))
        .def_readwrite("class_id", &GroundTruthObject::class_id)
        .def_readwrite("box", &GroundTruthObject::box);

    py::class_<DetectionSet>(m, "DetectionSet")
        .def(py::init<>())
        .def(py::init([](std::string image_id, double image_w, double image_h,
                         std::vector<Detection> detections) {
                 return DetectionSet{std::move(image_id), image_w, image_h,
                                     std::move(detections)};
             }),
             py::arg("image_id"), py::arg("image_w"), py::arg("image_h"),
             py::arg("detections") = std::vector<Detection>{})
        .def_readwrite("image_id", &DetectionSet::image_id)
        .def_readwrite("image_w", &DetectionSet::image_w)
        .def_readwrite("image_h", &DetectionSet::image_h)
        .def_readwrite("detections", &DetectionSet::detections);

    py::class_<GroundTruthSet>(m, "GroundTruthSet")
        .def(py::init<>())
        .def(py::init([](std::string image_id, double image_w, double image_h,
                         std::vector<GroundTruthObject> objects) {
                 return GroundTruthSet{std::move(image_id), image_w, image_h,
                                       std::move(objects)};
             }),
             py::arg("image_id"), py::arg("image_w"), py::arg("image_h"),
             py::arg("objects") = std::vector<GroundTruthObject>{})
        .def_readwrite("image_id", &GroundTruthSet::image_id)
        .def_readwrite("image_w", &GroundTruthSet::image_w)
        .def_readwrite("image_h", &GroundTruthSet::image_h)
        .def_readwrite("objects", &GroundTruthSet::objects);

    m.def("load_detections",
          [](const std::string& path) { return load_detections(path); }, py::arg("path"));
    m.def("load_ground_truth",
          [](const std::string& path) { return load_ground_truth(path); }, py::arg("path"));
    m.def("save_detections",
          [](const std::vector<DetectionSet>& sets, const std::string& path) {
              save_detections(sets, path);
          },
          py::arg("sets"), py::arg("path"));
    m.def("save_ground_truth",
          [](const std::vector<GroundTruthSet>& sets, const std::string& path) {
              save_ground_truth(sets, path);
          },
          py::arg("sets"), py::arg("path"));

    py::class_<FusionConfig>(m, "FusionConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &FusionConfig::gamma)
        .def_readwrite("tau_iou", &FusionConfig::tau_iou)
        .def_readwrite("tau_nms", &FusionConfig::tau_nms)
        .def_readwrite("class_agnostic_nms", &FusionConfig::class_agnostic_nms)
        .def_readwrite("gamma_per_class", &FusionConfig::gamma_per_class);

    py::enum_<Provenance>(m, "Provenance")
        .value("BASELINE_ONLY", Provenance::BaselineOnly)
        .value("THERMAL_ONLY", Provenance::ThermalOnly)
        .value("FUSED", Provenance::Fused);

    py::class_<FusedDetection>(m, "FusedDetection")
        .def_readonly("detection", &FusedDetection::detection)
        .def_readonly("provenance", &FusedDetection::provenance)
        .def_readonly("baseline_index", &FusedDetection::baseline_index)
        .def_readonly("thermal_index", &FusedDetection::thermal_index);

    py::class_<EnsembleResult>(m, "EnsembleResult")
        .def_readonly("set", &EnsembleResult::set)
        .def_readonly("audit", &EnsembleResult::audit);

    m.def("fuse_pair", &fuse_pair, py::arg("d_baseline"), py::arg("d_thermal"),
          py::arg("gamma"));
    m.def("nms", &nms, py::arg("dets"), py::arg("tau_nms"), py::arg("class_agnostic") = false);
    m.def("ensemble_fuse", &ensemble_fuse, py::arg("baseline"), py::arg("thermal"),
          py::arg("cfg") = FusionConfig{});

    py::class_<EvalConfig>(m, "EvalConfig")
        .def(py::init<>())
        .def_readwrite("iou_fixed", &EvalConfig::iou_fixed)
        .def_readwrite("iou_range", &EvalConfig::iou_range);

    py::class_<ClassMetrics>(m, "ClassMetrics")
        .def_readonly("ap50", &ClassMetrics::ap50)
        .def_readonly("ap50_95", &ClassMetrics::ap50_95)
        .def_readonly("precision", &ClassMetrics::precision)
        .def_readonly("recall", &ClassMetrics::recall)
        .def_readonly("f1", &ClassMetrics::f1)
        .def_readonly("f1_conf_threshold", &ClassMetrics::f1_conf_threshold)
        .def_readonly("num_gt", &ClassMetrics::num_gt)
        .def_readonly("num_pred", &ClassMetrics::num_pred);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("per_class", &EvalReport::per_class)
        .def_readonly("mean", &EvalReport::mean);

    m.def("evaluate", &evaluate, py::arg("pred_sets"), py::arg("gt_sets"),
          py::arg("cfg") = EvalConfig{}, py::arg("threads") = 1);
    m.def("report_to_json",
          [](const EvalReport& report) { return report_to_json(report); }, py::arg("report"));

    py::class_<Point>(m, "Point")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Point::x)
        .def_readwrite("y", &Point::y);

    py::class_<Correspondence>(m, "Correspondence")
        .def(py::init([](double src_x, double src_y, double dst_x, double dst_y) {
                 return Correspondence{{src_x, src_y}, {dst_x, dst_y}};
             }),
             py::arg("src_x"), py::arg("src_y"), py::arg("dst_x"), py::arg("dst_y"))
        .def_readwrite("src", &Correspondence::src)
        .def_readwrite("dst", &Correspondence::dst);

    py::class_<RansacParams>(m, "RansacParams")
        .def(py::init<>())
        .def_readwrite("iterations", &RansacParams::iterations)
        .def_readwrite("inlier_threshold", &RansacParams::inlier_threshold)
        .def_readwrite("seed", &RansacParams::seed);

    py::class_<Homography>(m, "Homography")
        .def(py::init<const std::array<std::array<double, 3>, 3>&>(), py::arg("matrix"))
        .def_static("identity", &Homography::identity)
        .def_property_readonly("matrix", &Homography::matrix)
        .def("inverse", &Homography::inverse)
        .def("compose", &Homography::compose);

    m.def("apply", &apply, py::arg("h"), py::arg("p"));
    m.def("estimate_homography", &estimate_homography, py::arg("corrs"),
          py::arg("robust") = std::nullopt);

    py::class_<Raster>(m, "Raster")
        .def(py::init<int, int, int, int>(), py::arg("width"), py::arg("height"),
             py::arg("channels"), py::arg("bit_depth"))
        .def_property_readonly("width", &Raster::width)
        .def_property_readonly("height", &Raster::height)
        .def_property_readonly("channels", &Raster::channels)
        .def_property_readonly("bit_depth", &Raster::bit_depth)
        .def("at", &Raster::at, py::arg("x"), py::arg("y"), py::arg("c"))
        .def("set", &Raster::set, py::arg("x"), py::arg("y"), py::arg("c"), py::arg("v"))
        .def("__eq__", [](const Raster& a, const Raster& b) { return a == b; });

    m.def("read_raster", &read_raster, py::arg("path"));
    m.def("write_raster", &write_raster, py::arg("raster"), py::arg("path"));
    m.def("warp", &warp, py::arg("src"), py::arg("h"), py::arg("out_w"), py::arg("out_h"),
          py::arg("fill"), py::arg("threads") = 1);
    m.def("colormap_from_name", &colormap_from_name, py::arg("name"));

    py::enum_<Colormap>(m, "Colormap")
        .value("GRAY", Colormap::Gray)
        .value("IRON", Colormap::Iron);

    m.def("fuse_images", &fuse_images, py::arg("rgb"), py::arg("ir_aligned"),
          py::arg("weight"), py::arg("colormap") = Colormap::Gray,
          py::arg("fixed_range") = std::nullopt, py::arg("threads") = 1);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("n_images", &SynthConfig::n_images)
        .def_readwrite("seed", &SynthConfig::seed);

    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_readonly("baseline", &ExperimentResult::baseline)
        .def_readonly("thermal", &ExperimentResult::thermal)
        .def_readonly("ensemble", &ExperimentResult::ensemble);

    m.def("complementary_config", &complementary_config, py::arg("seed"),
          py::arg("n_images"));
    m.def("load_synth_config",
          [](const std::string& path) { return load_synth_config(path); }, py::arg("path"));
    m.def("generate_ground_truth", &generate_ground_truth, py::arg("cfg"));
    m.def("run_experiment", &run_experiment, py::arg("cfg"), py::arg("out_dir"),
          py::arg("threads") = 1);

    m.attr("__version__") = "0.1.0";
}
