#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semsteg/adversary.hpp"
#include "semsteg/channel.hpp"
#include "semsteg/codec.hpp"
#include "semsteg/dataset.hpp"
#include "semsteg/experiment.hpp"
#include "semsteg/metrics.hpp"
#include "semsteg/pnm.hpp"
#include "semsteg/stego.hpp"

namespace py = pybind11;
using namespace semsteg;

namespace {

Tensor from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<int> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<std::size_t>(i)] = static_cast<int>(a.shape(i));
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> to_array(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<double> a(shape);
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(_semsteg, m) {
    m.doc() = "image-steganography semantic communication simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<DegenerateSignalError>(m, "DegenerateSignalError", PyExc_ValueError);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform", [](Rng& r) { return r.uniform(); })
        .def("gauss", &Rng::gauss)
        .def("gauss_tensor",
             [](Rng& r, const std::vector<int>& shape) { return to_array(r.gauss_tensor(shape)); },
             py::arg("shape"))
        .def("derive", &Rng::derive, py::arg("worker_index"));

    m.def("synth_dataset",
          [](std::uint64_t seed, int n, const std::vector<int>& shape) {
              auto imgs = synth_dataset(seed, n, shape);
              py::list out;
              for (const auto& img : imgs) out.append(to_array(img));
              return out;
          },
          py::arg("seed"), py::arg("n"), py::arg("shape"));

    m.def("psnr", [](const py::array_t<double>& a, const py::array_t<double>& b) {
        return psnr(from_array(a), from_array(b));
    }, py::arg("a"), py::arg("b"));
    m.def("ssim", [](const py::array_t<double>& a, const py::array_t<double>& b) {
        return ssim(from_array(a), from_array(b));
    }, py::arg("a"), py::arg("b"));
    m.def("auc", &auc, py::arg("scores_positive"), py::arg("scores_negative"));

    m.def("power_normalize",
          [](const py::array_t<double>& x) { return to_array(power_normalize(from_array(x))); },
          py::arg("features"));

    m.def("awgn", [](const py::array_t<double>& x, double snr_db, Rng& rng) {
        return to_array(awgn(from_array(x), snr_db, rng));
    }, py::arg("x"), py::arg("snr_db"), py::arg("rng"));
    m.def("rayleigh", [](const py::array_t<double>& x, double snr_db, bool equalize, Rng& rng) {
        auto [y, h] = rayleigh(from_array(x), snr_db, equalize, rng);
        return py::make_tuple(to_array(y), h);
    }, py::arg("x"), py::arg("snr_db"), py::arg("equalize"), py::arg("rng"));

    m.def("haar_dwt", [](const py::array_t<double>& img) {
        HaarBands b = haar_dwt(from_array(img));
        return py::make_tuple(to_array(b.ll), to_array(b.lh), to_array(b.hl), to_array(b.hh));
    }, py::arg("image"));
    m.def("inverse_haar_dwt",
          [](const py::array_t<double>& ll, const py::array_t<double>& lh,
             const py::array_t<double>& hl, const py::array_t<double>& hh) {
              HaarBands b{from_array(ll), from_array(lh), from_array(hl), from_array(hh)};
              return to_array(inverse_haar_dwt(b));
          },
          py::arg("ll"), py::arg("lh"), py::arg("hl"), py::arg("hh"));
    m.def("highfreq_preprocess", [](const py::array_t<double>& img) {
        HighfreqResult r = highfreq_preprocess(from_array(img));
        return py::make_tuple(to_array(r.image), r.ll_mean);
    }, py::arg("secret"));

    m.def("load_pnm", [](const std::string& path) { return to_array(load_pnm(path)); },
          py::arg("path"));
    m.def("save_pnm", [](const py::array_t<double>& img, const std::string& path) {
        save_pnm(from_array(img), path);
    }, py::arg("image"), py::arg("path"));

    py::class_<CodecConfig>(m, "CodecConfig")
        .def(py::init<>())
        .def_readwrite("C", &CodecConfig::C)
        .def_readwrite("H", &CodecConfig::H)
        .def_readwrite("W", &CodecConfig::W)
        .def_readwrite("c", &CodecConfig::c)
        .def_readwrite("h", &CodecConfig::h)
        .def_readwrite("w", &CodecConfig::w)
        .def_readwrite("train_snr_db", &CodecConfig::train_snr_db)
        .def_readwrite("epochs", &CodecConfig::epochs)
        .def_readwrite("lr", &CodecConfig::lr)
        .def_readwrite("batch", &CodecConfig::batch);

    py::class_<CodecModel>(m, "CodecModel")
        .def("encode",
             [](const CodecModel& m_, const py::array_t<double>& img) {
                 return to_array(m_.encode(from_array(img)));
             },
             py::arg("image"))
        .def("decode",
             [](const CodecModel& m_, const py::array_t<double>& f) {
                 return to_array(m_.decode(from_array(f)));
             },
             py::arg("features"));

    m.def("train_codec",
          [](const CodecConfig& cfg, const py::list& images, std::uint64_t seed) {
              std::vector<Tensor> data;
              for (auto item : images)
                  data.push_back(from_array(item.cast<py::array_t<double>>()));
              Rng rng(seed);
              TrainResult tr;
              CodecModel model = make_trained_codec(cfg, data, rng, &tr);
              return py::make_tuple(std::move(model), tr.loss_history);
          },
          py::arg("config"), py::arg("images"), py::arg("seed"));

    m.def("run_experiment", [](const std::string& config_path) {
        ExperimentConfig cfg = ExperimentConfig::load(config_path);
        return run_experiment(cfg).to_json().dump();
    }, py::arg("config_path"));
}
