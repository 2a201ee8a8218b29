#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gde/camera_geometry.hpp"
#include "gde/errors.hpp"
#include "gde/fusion/checkpoint.hpp"
#include "gde/fusion/model.hpp"
#include "gde/ground_depth.hpp"
#include "gde/kitti.hpp"
#include "gde/pose.hpp"
#include "gde/synthetic.hpp"
#include "gde/types.hpp"

namespace py = pybind11;
using namespace gde;

namespace {

py::array_t<double> grid_to_array(const std::vector<double>& grid, int width, int height) {
    py::array_t<double> out({height, width});
    std::copy(grid.begin(), grid.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_gde, m) {
    m.doc() = "Ground-depth estimation core: pinhole geometry, pose-aware ground-depth "
              "maps, the ground-aware fusion transformer, and synthetic experiments.";

    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init<double, double, double, double>(), py::arg("fx"), py::arg("fy"),
             py::arg("cx"), py::arg("cy"))
        .def_readwrite("fx", &CameraIntrinsics::fx)
        .def_readwrite("fy", &CameraIntrinsics::fy)
        .def_readwrite("cx", &CameraIntrinsics::cx)
        .def_readwrite("cy", &CameraIntrinsics::cy);

    py::class_<GroundPlaneConfig>(m, "GroundPlaneConfig")
        .def(py::init<double, double, double>(), py::arg("el") = 1.65,
             py::arg("baseline") = 0.54, py::arg("stabilizer") = 0.0)
        .def_readwrite("el", &GroundPlaneConfig::el)
        .def_readwrite("baseline", &GroundPlaneConfig::baseline)
        .def_readwrite("stabilizer", &GroundPlaneConfig::stabilizer);

    py::class_<CameraPose>(m, "CameraPose")
        .def(py::init<double, double>(), py::arg("pitch") = 0.0, py::arg("roll") = 0.0)
        .def_property_readonly("pitch", &CameraPose::pitch)
        .def_property_readonly("roll", &CameraPose::roll)
        .def_property_readonly("matrix", [](const CameraPose& p) { return p.matrix(); });

    m.def("default_stabilizer", &default_stabilizer, py::arg("intrinsics"), py::arg("ground"));
    m.def("scale_intrinsics", &scale_intrinsics, py::arg("intrinsics"), py::arg("s"));

    m.def(
        "back_project",
        [](double u, double v, double z, const CameraIntrinsics& k) {
            const Point3D p = back_project({u, v}, z, k);
            return py::make_tuple(p.x, p.y, p.z);
        },
        py::arg("u"), py::arg("v"), py::arg("z"), py::arg("intrinsics"));
    m.def(
        "project",
        [](double x, double y, double z, const CameraIntrinsics& k) {
            const PixelCoord p = project({x, y, z}, k);
            return py::make_tuple(p.u, p.v);
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("intrinsics"));
    m.def(
        "ray_ground_intersection",
        [](double u, double v, const CameraIntrinsics& k, const CameraPose& pose,
           const GroundPlaneConfig& cfg) -> std::optional<double> {
            return ray_ground_intersection({u, v}, k, pose, cfg);
        },
        py::arg("u"), py::arg("v"), py::arg("intrinsics"), py::arg("pose"), py::arg("ground"));
    m.def("depth_from_displaced_contact", &depth_from_displaced_contact, py::arg("z_r"),
          py::arg("t_y"), py::arg("intrinsics"), py::arg("ground"));

    m.def("encode_disparity", &encode_disparity, py::arg("v_offset"), py::arg("intrinsics"),
          py::arg("ground"));
    m.def("encode_disparity_from_depth", &encode_disparity_from_depth, py::arg("z"),
          py::arg("intrinsics"), py::arg("ground"));

    py::class_<GroundDepthMap>(m, "GroundDepthMap")
        .def_readonly("width", &GroundDepthMap::width)
        .def_readonly("height", &GroundDepthMap::height)
        .def_property_readonly(
            "encoded", [](const GroundDepthMap& g) { return grid_to_array(g.encoded, g.width, g.height); })
        .def_property_readonly(
            "depth", [](const GroundDepthMap& g) { return grid_to_array(g.depth, g.width, g.height); });

    m.def("build_map", &build_map, py::arg("width"), py::arg("height"), py::arg("intrinsics"),
          py::arg("pose"), py::arg("ground"), py::arg("threads") = 1);
    m.def("detect_horizon_row", &detect_horizon_row, py::arg("map"));
    m.def("map_to_pgm", &to_pgm, py::arg("map"));
    m.def("map_to_csv", &to_csv, py::arg("map"));

    py::class_<VanishingPoint>(m, "VanishingPoint")
        .def(py::init<double, double>(), py::arg("u"), py::arg("v"))
        .def_readwrite("u", &VanishingPoint::u)
        .def_readwrite("v", &VanishingPoint::v);
    py::class_<HorizonLine>(m, "HorizonLine")
        .def(py::init<double, double>(), py::arg("angle"), py::arg("row_at_cx"))
        .def_readwrite("angle", &HorizonLine::angle)
        .def_readwrite("row_at_cx", &HorizonLine::row_at_cx);
    py::class_<PoseObservation>(m, "PoseObservation")
        .def(py::init([](const HorizonLine& h, const VanishingPoint& v) {
                 return PoseObservation{h, v};
             }),
             py::arg("horizon"), py::arg("vp"))
        .def_readwrite("horizon", &PoseObservation::horizon)
        .def_readwrite("vp", &PoseObservation::vp);

    m.def("g_map", &g_map, py::arg("horizon"), py::arg("vp"), py::arg("intrinsics"));
    m.def("render_observations", &render_observations, py::arg("pose"), py::arg("intrinsics"));
    m.def("pose_loss", &pose_loss, py::arg("predicted"), py::arg("target"));
    m.def("fit_pose", &fit_pose, py::arg("observations"), py::arg("intrinsics"));
    m.def("parse_observations_csv", &parse_observations_csv, py::arg("text"));

    // fusion transformer
    py::module_ fusion_mod = m.def_submodule("fusion", "ground-aware fusion transformer");
    py::enum_<fusion::MaskMode>(fusion_mod, "MaskMode")
        .value("MULTIPLICATIVE", fusion::MaskMode::Multiplicative)
        .value("ADDITIVE", fusion::MaskMode::Additive);
    py::class_<fusion::FusionConfig>(fusion_mod, "FusionConfig")
        .def(py::init<>())
        .def_readwrite("channels", &fusion::FusionConfig::channels)
        .def_readwrite("heads", &fusion::FusionConfig::heads)
        .def_readwrite("encoder_layers", &fusion::FusionConfig::encoder_layers)
        .def_readwrite("decoder_layers", &fusion::FusionConfig::decoder_layers)
        .def_readwrite("window_radius", &fusion::FusionConfig::window_radius)
        .def_readwrite("mask_mode", &fusion::FusionConfig::mask_mode);
    py::class_<fusion::FeatureMap>(fusion_mod, "FeatureMap")
        .def_readonly("ws", &fusion::FeatureMap::ws)
        .def_readonly("hs", &fusion::FeatureMap::hs)
        .def_readwrite("data", &fusion::FeatureMap::data);
    fusion_mod.def("make_feature_map", &fusion::make_feature_map, py::arg("ws"), py::arg("hs"),
               py::arg("channels"));
    fusion_mod.def("position_encoding", &fusion::position_encoding, py::arg("ws"), py::arg("hs"),
               py::arg("channels"));
    py::class_<fusion::FusionModel>(fusion_mod, "FusionModel")
        .def(py::init<fusion::FusionConfig, uint64_t>(), py::arg("config"), py::arg("seed"))
        .def("encode", &fusion::FusionModel::run_encoder, py::arg("img"))
        .def("decode", &fusion::FusionModel::run_decoder, py::arg("depth"), py::arg("encoder_out"))
        .def(
            "predict",
            [](const fusion::FusionModel& model, const fusion::FeatureMap& img,
               const GroundDepthMap* depth) {
                return model.predict(img, depth,
                                     depth ? fusion::HeadMode::Fused
                                           : fusion::HeadMode::EncoderOnly);
            },
            py::arg("img"), py::arg("depth") = nullptr)
        .def("save", [](const fusion::FusionModel& model, const std::string& path) {
            fusion::save_checkpoint(path, model.config, model.weights);
        });
    fusion_mod.def("run_gradient_check",
               [](uint64_t seed, int configs, double tolerance, bool break_gradient) {
                   const auto report =
                       fusion::run_gradient_check(seed, configs, tolerance, break_gradient);
                   py::dict classes;
                   for (const auto& e : report.entries) {
                       classes[py::str(e.param_class)] = e.max_rel_err;
                   }
                   return py::make_tuple(report.passed, report.worst, classes);
               },
               py::arg("seed") = 0, py::arg("configs") = 4, py::arg("tolerance") = 1e-4,
               py::arg("break_gradient") = false);

    // KITTI parsers
    py::module_ kitti_mod = m.def_submodule("kitti", "KITTI calib / label parsing");
    py::class_<kitti::CalibRecord>(kitti_mod, "CalibRecord")
        .def_readonly("p2", &kitti::CalibRecord::p2)
        .def("intrinsics", &kitti::CalibRecord::intrinsics);
    py::class_<kitti::LabelRecord>(kitti_mod, "LabelRecord")
        .def_readonly("type", &kitti::LabelRecord::type)
        .def_readonly("truncated", &kitti::LabelRecord::truncated)
        .def_readonly("occluded", &kitti::LabelRecord::occluded)
        .def_readonly("alpha", &kitti::LabelRecord::alpha)
        .def_readonly("bbox_left", &kitti::LabelRecord::bbox_left)
        .def_readonly("bbox_top", &kitti::LabelRecord::bbox_top)
        .def_readonly("bbox_right", &kitti::LabelRecord::bbox_right)
        .def_readonly("bbox_bottom", &kitti::LabelRecord::bbox_bottom)
        .def_readonly("height", &kitti::LabelRecord::height)
        .def_readonly("width", &kitti::LabelRecord::width)
        .def_readonly("length", &kitti::LabelRecord::length)
        .def_property_readonly("location",
                               [](const kitti::LabelRecord& l) {
                                   return py::make_tuple(l.location.x, l.location.y, l.location.z);
                               })
        .def_readonly("rotation_y", &kitti::LabelRecord::rotation_y)
        .def_readonly("dont_care", &kitti::LabelRecord::dont_care);
    kitti_mod.def("parse_calib", &kitti::parse_calib, py::arg("text"));
    kitti_mod.def("serialize_calib", &kitti::serialize_calib, py::arg("calib"));
    kitti_mod.def("parse_labels", &kitti::parse_labels, py::arg("text"));
    kitti_mod.def("serialize_labels", &kitti::serialize_labels, py::arg("labels"));

    // synthetic experiments
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("sigmas_deg", &ExperimentConfig::sigmas_deg)
        .def_readwrite("trials", &ExperimentConfig::trials)
        .def_readwrite("ablation_pose_sigma_deg", &ExperimentConfig::ablation_pose_sigma_deg)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("objects_per_scene", &ExperimentConfig::objects_per_scene)
        .def_readwrite("depth_min", &ExperimentConfig::depth_min)
        .def_readwrite("depth_max", &ExperimentConfig::depth_max)
        .def_readwrite("train_steps", &ExperimentConfig::train_steps)
        .def_readwrite("window_radius", &ExperimentConfig::window_radius)
        .def_readwrite("zero_depth_queries", &ExperimentConfig::zero_depth_queries);
    py::class_<RobustnessSummary>(m, "RobustnessSummary")
        .def_readonly("sigma_deg", &RobustnessSummary::sigma_deg)
        .def_readonly("mean_abs_err_uncorrected", &RobustnessSummary::mean_abs_err_uncorrected)
        .def_readonly("mean_abs_err_corrected", &RobustnessSummary::mean_abs_err_corrected);
    py::class_<RobustnessResult>(m, "RobustnessResult")
        .def_readonly("summary", &RobustnessResult::summary)
        .def_readonly("uncorrected_strictly_increasing",
                      &RobustnessResult::uncorrected_strictly_increasing);
    m.def("run_robustness", &run_robustness, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    py::class_<BucketError>(m, "BucketError")
        .def_readonly("near_mae", &BucketError::near_mae)
        .def_readonly("far_mae", &BucketError::far_mae)
        .def_readonly("near_count", &BucketError::near_count)
        .def_readonly("far_count", &BucketError::far_count);
    py::class_<AblationResult>(m, "AblationResult")
        .def_readonly("baseline", &AblationResult::baseline)
        .def_readonly("fused", &AblationResult::fused)
        .def_readonly("oracle", &AblationResult::oracle);
    m.def("run_ablation", &run_ablation, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::register_exception<gde::Error>(m, "GdeError");
}
