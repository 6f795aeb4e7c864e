#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "fluidlens/blur.hpp"
#include "fluidlens/dataset.hpp"
#include "fluidlens/lensing.hpp"
#include "fluidlens/png_io.hpp"
#include "fluidlens/reconstruct.hpp"
#include "fluidlens/shapes.hpp"
#include "fluidlens/stcn.hpp"
#include "fluidlens/train.hpp"

namespace py = pybind11;
using namespace fluidlens;

namespace {

Image image_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> arr) {
    const auto buf = arr.request();
    if (buf.ndim != 2 && buf.ndim != 3) {
        throw InvalidInput("expected a HxW or HxWxC float array");
    }
    Image img;
    img.height = static_cast<int>(buf.shape[0]);
    img.width = static_cast<int>(buf.shape[1]);
    img.channels = buf.ndim == 3 ? static_cast<int>(buf.shape[2]) : 1;
    const float* src = static_cast<const float*>(buf.ptr);
    img.data.assign(src, src + static_cast<std::size_t>(img.height) * img.width *
                                  img.channels);
    return img;
}

py::array_t<float> image_to_array(const Image& img) {
    py::array_t<float> arr({img.height, img.width, img.channels});
    std::copy(img.data.begin(), img.data.end(),
              static_cast<float*>(arr.request().ptr));
    return arr;
}

std::vector<Image> video_from_arrays(const std::vector<py::array_t<float>>& arrays) {
    std::vector<Image> frames;
    frames.reserve(arrays.size());
    for (const auto& a : arrays) {
        frames.push_back(image_from_array(a));
    }
    return frames;
}

std::optional<int> n_from_object(const py::object& n) {
    if (n.is_none()) return kAllFrames;
    return n.cast<int>();
}

}  // namespace

PYBIND11_MODULE(_fluidlens, m) {
    m.doc() = "fluid lensing simulation and reconstruction";

    py::register_exception<ShapeError>(m, "ShapeError");
    py::register_exception<InvalidInput>(m, "InvalidInputError");
    py::register_exception<IoError>(m, "IoError");
    py::register_exception<TirError>(m, "TotalInternalReflectionError");
    py::register_exception<DivergenceError>(m, "DivergenceError");

    m.def("load_png", [](const std::string& path) {
        return image_to_array(load_png(path));
    });
    m.def("save_png", [](py::array_t<float> img, const std::string& path) {
        save_png(image_from_array(img), path);
    });

    m.def(
        "metrics",
        [](py::array_t<float> a, py::array_t<float> b) {
            const MetricsReport r = metrics(image_from_array(a), image_from_array(b));
            py::dict d;
            d["mse"] = r.mse;
            d["rmse"] = r.rmse;
            d["l1"] = r.l1;
            d["psnr"] = r.psnr;
            return d;
        },
        py::arg("output"), py::arg("target"));

    m.def(
        "generate_shapes",
        [](int height, int width, std::uint64_t seed) {
            ShapesConfig config;
            config.image_height = height;
            config.image_width = width;
            config.seed = seed;
            return image_to_array(generate_shapes(config));
        },
        py::arg("height"), py::arg("width"), py::arg("seed"));

    m.def(
        "simulate_video",
        [](py::array_t<float> target, std::uint64_t seed, double fps,
           double duration) {
            Rng rng(seed);
            const WaterSurface surface = random_surface(WaveRanges{}, rng);
            const std::vector<Image> frames = simulate_video(
                image_from_array(target), surface, fps, duration, SimParams{});
            std::vector<py::array_t<float>> out;
            out.reserve(frames.size());
            for (const Image& f : frames) out.push_back(image_to_array(f));
            return out;
        },
        py::arg("target"), py::arg("seed"), py::arg("fps") = 25.0,
        py::arg("duration") = 2.0);

    m.def(
        "temporal_mean",
        [](const std::vector<py::array_t<float>>& frames, py::object n) {
            return image_to_array(
                temporal_mean(video_from_arrays(frames), n_from_object(n)));
        },
        py::arg("frames"), py::arg("n") = py::none());

    m.def(
        "temporal_median",
        [](const std::vector<py::array_t<float>>& frames, py::object n) {
            return image_to_array(
                temporal_median(video_from_arrays(frames), n_from_object(n)));
        },
        py::arg("frames"), py::arg("n") = py::none());

    m.def(
        "siftflow_mean",
        [](const std::vector<py::array_t<float>>& frames, py::object n) {
            return image_to_array(siftflow_mean(video_from_arrays(frames),
                                                n_from_object(n), FlowParams{}));
        },
        py::arg("frames"), py::arg("n") = py::none());

    m.def(
        "box_blur",
        [](py::array_t<float> img, int kernel) {
            return image_to_array(box_blur(image_from_array(img), kernel));
        },
        py::arg("image"), py::arg("kernel"));

    m.def(
        "gaussian_blur",
        [](py::array_t<float> img, int kernel, double std_dev) {
            return image_to_array(
                gaussian_blur(image_from_array(img), kernel, std_dev));
        },
        py::arg("image"), py::arg("kernel"), py::arg("std") = 0.0);

    m.def(
        "bilateral_blur",
        [](py::array_t<float> img, int kernel, double sigma_color,
           double sigma_space) {
            return image_to_array(bilateral_blur(image_from_array(img), kernel,
                                                 sigma_color, sigma_space));
        },
        py::arg("image"), py::arg("kernel"), py::arg("sigma_color"),
        py::arg("sigma_space") = 0.0);

    py::enum_<StcnVariant>(m, "StcnVariant")
        .value("STACKED", StcnVariant::kStacked)
        .value("NON_STACKED", StcnVariant::kNonStacked);

    py::class_<StcnConfig>(m, "StcnConfig")
        .def(py::init<>())
        .def_readwrite("variant", &StcnConfig::variant)
        .def_readwrite("layers", &StcnConfig::layers)
        .def_readwrite("blocks_per_layer", &StcnConfig::blocks_per_layer)
        .def_readwrite("filters", &StcnConfig::filters)
        .def_readwrite("seq_len", &StcnConfig::seq_len)
        .def_readwrite("channels", &StcnConfig::channels);

    m.def("receptive_field", [](const StcnConfig& config) {
        const ReceptiveField rf = receptive_field(config);
        return py::make_tuple(rf.spatial, rf.temporal);
    });

    m.def(
        "stcn_apply",
        [](const std::string& model_path,
           const std::vector<py::array_t<float>>& frames) {
            const auto [config, params] = load_parameters(model_path);
            return image_to_array(
                stcn_forward(config, params, video_from_arrays(frames)));
        },
        py::arg("model_path"), py::arg("frames"));
}
