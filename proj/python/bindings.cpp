#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "dibmap/checkpoint.hpp"
#include "dibmap/config.hpp"
#include "dibmap/errors.hpp"
#include "dibmap/experiment.hpp"
#include "dibmap/losses.hpp"
#include "dibmap/rng.hpp"
#include "dibmap/wire.hpp"
#include "dibmap/world.hpp"

namespace py = pybind11;
using namespace dibmap;

namespace {

Tensor coords_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 2)
        throw DimensionError("coords must be an [n, 2] array");
    std::size_t n = static_cast<std::size_t>(arr.shape(0));
    std::vector<double> buf(arr.data(), arr.data() + 2 * n);
    return Tensor({n, 2}, std::move(buf));
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    return std::vector<double>(arr.data(), arr.data() + arr.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decentralized Bayesian occupancy mapping core";
    m.attr("__version__") = "0.1.0";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<WireError>(m, "WireError", PyExc_ValueError);
    py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("kl_gaussian",
          static_cast<double (*)(double, double, double, double)>(&kl_gaussian),
          py::arg("mu0"), py::arg("sigma0"), py::arg("mu1"), py::arg("sigma1"),
          "Closed-form KL(N(mu0, sigma0^2) || N(mu1, sigma1^2)).");
    m.def("kl_numeric",
          static_cast<double (*)(double, double, double, double)>(&kl_numeric),
          py::arg("mu0"), py::arg("sigma0"), py::arg("mu1"), py::arg("sigma1"),
          "Simpson-quadrature KL cross-check.");
    m.def("sigma_from_rho", &sigma_from_rho, py::arg("rho"));
    m.def("rho_from_sigma", &rho_from_sigma, py::arg("sigma"));

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("split", [](const RngStream& s, std::uint64_t lane) { return s.split(lane); },
             py::arg("lane"))
        .def("split", [](const RngStream& s, const std::string& label) { return s.split(label); },
             py::arg("label"))
        .def("next_u64", &RngStream::next_u64)
        .def("uniform", static_cast<double (RngStream::*)()>(&RngStream::uniform))
        .def("normal", &RngStream::normal)
        .def_property_readonly("key", &RngStream::key);

    py::class_<MapperNet>(m, "MapperNet")
        .def_static("init", &MapperNet::init, py::arg("seed"), py::arg("hidden") = 256,
                    py::arg("omega") = 30.0)
        .def_static("skeleton", &MapperNet::skeleton, py::arg("hidden"), py::arg("omega") = 30.0)
        .def_static("load", &load_checkpoint, py::arg("path"))
        .def("save", [](const MapperNet& net, const std::filesystem::path& p) {
            save_checkpoint(net, p);
        }, py::arg("path"))
        .def_property_readonly("hidden", &MapperNet::hidden)
        .def_property_readonly("omega", &MapperNet::omega)
        .def_property_readonly("fingerprint", &MapperNet::fingerprint)
        .def_property_readonly("mu_size", &MapperNet::mu_size)
        .def_property_readonly("rho_size", &MapperNet::rho_size)
        .def("sample",
             [](const MapperNet& net, const py::array_t<double, py::array::c_style |
                                                         py::array::forcecast>& coords,
                std::uint64_t seed) {
                 Tensor out = net.forward_sample(coords_tensor(coords), RngStream(seed));
                 return to_array({out.data().begin(), out.data().end()});
             },
             py::arg("coords"), py::arg("seed"),
             "One stochastic occupancy sample per coordinate row.")
        .def("predict",
             [](const MapperNet& net, const py::array_t<double, py::array::c_style |
                                                        py::array::forcecast>& coords,
                std::size_t passes, std::uint64_t seed) {
                 auto [mean, stdev] =
                     net.predict_with_uncertainty(coords_tensor(coords), passes, RngStream(seed));
                 return py::make_tuple(to_array({mean.data().begin(), mean.data().end()}),
                                       to_array({stdev.data().begin(), stdev.data().end()}));
             },
             py::arg("coords"), py::arg("passes"), py::arg("seed"),
             "Monte Carlo occupancy mean and sample std per coordinate row.")
        .def("flatten",
             [](const MapperNet& net) {
                 StateVector s = net.flatten();
                 return py::make_tuple(to_array(s.mu_block), to_array(s.rho_block));
             })
        .def("restore",
             [](MapperNet& net,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& mu,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& rho) {
                 StateVector s;
                 s.mu_block = from_array(mu);
                 s.rho_block = from_array(rho);
                 s.model_fingerprint = net.fingerprint();
                 net.restore(s);
             },
             py::arg("mu"), py::arg("rho"));

    py::class_<PeerMessage>(m, "PeerMessage")
        .def_property_readonly("kind",
                               [](const PeerMessage& msg) {
                                   return msg.kind == MsgKind::State ? "state" : "round_complete";
                               })
        .def_readonly("sender", &PeerMessage::sender)
        .def_readonly("round", &PeerMessage::round)
        .def_readonly("fingerprint", &PeerMessage::fingerprint)
        .def_property_readonly("mu", [](const PeerMessage& msg) -> py::object {
            if (!msg.state) return py::none();
            return to_array(msg.state->mu_block);
        })
        .def_property_readonly("rho", [](const PeerMessage& msg) -> py::object {
            if (!msg.state) return py::none();
            return to_array(msg.state->rho_block);
        });

    py::class_<WireCodec>(m, "WireCodec")
        .def(py::init<std::uint64_t, std::size_t, std::size_t>(), py::arg("fingerprint"),
             py::arg("mu_len"), py::arg("rho_len"))
        .def("encode_state",
             [](const WireCodec& codec, std::uint32_t sender, std::uint32_t round,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& mu,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& rho) {
                 StateVector s;
                 s.mu_block = from_array(mu);
                 s.rho_block = from_array(rho);
                 s.model_fingerprint = codec.fingerprint();
                 auto bytes = codec.encode(PeerMessage::make_state(sender, round, std::move(s)));
                 return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
             },
             py::arg("sender"), py::arg("round"), py::arg("mu"), py::arg("rho"))
        .def("encode_round_complete",
             [](const WireCodec& codec, std::uint32_t sender, std::uint32_t round) {
                 auto bytes = codec.encode(
                     PeerMessage::make_round_complete(sender, round, codec.fingerprint()));
                 return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
             },
             py::arg("sender"), py::arg("round"))
        .def("decode", [](const WireCodec& codec, const py::bytes& frame) {
            std::string_view view = frame;
            return codec.decode(std::span(reinterpret_cast<const std::uint8_t*>(view.data()),
                                          view.size()));
        }, py::arg("frame"));

    m.def("generate_floorplan",
          [](double width_m, double height_m, double resolution, std::uint64_t seed) {
              Floorplan fp = generate_floorplan(width_m, height_m, resolution, RngStream(seed));
              py::array_t<std::uint8_t> out({fp.height, fp.width});
              std::memcpy(out.mutable_data(), fp.walls.data(), fp.walls.size());
              return out;
          },
          py::arg("width_m"), py::arg("height_m"), py::arg("resolution"), py::arg("seed"),
          "Wall grid as a [height, width] uint8 array (1 = wall).");

    m.def("kde_density",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
             std::size_t grid, double bandwidth) {
              if (points.ndim() != 2 || points.shape(1) != 2)
                  throw DimensionError("points must be an [n, 2] array");
              std::vector<TrainPoint> pts;
              for (py::ssize_t i = 0; i < points.shape(0); ++i)
                  pts.push_back({points.at(i, 0), points.at(i, 1), 1.0});
              DensityField f = kde_density(pts, grid, bandwidth);
              py::array_t<double> raw({grid, grid});
              py::array_t<double> normalized({grid, grid});
              std::memcpy(raw.mutable_data(), f.raw.data(), f.raw.size() * sizeof(double));
              std::memcpy(normalized.mutable_data(), f.normalized.data(),
                          f.normalized.size() * sizeof(double));
              return py::make_tuple(raw, normalized);
          },
          py::arg("points"), py::arg("grid"), py::arg("bandwidth"),
          "Gaussian KDE over [-1, 1]^2; returns (raw, peak-normalized) grids.");

    m.def("run_config",
          [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir,
             std::optional<std::uint64_t> seed) {
              ExperimentConfig cfg = load_config(config);
              if (out_dir) cfg.out_dir = *out_dir;
              if (seed) cfg.seed = *seed;
              cfg.validate();
              RunSummary s = run_scenario(cfg);
              py::dict d;
              d["final_val"] = s.final_val;
              d["final_residual"] = s.final_residual;
              return d;
          },
          py::arg("config"), py::arg("out_dir") = std::nullopt, py::arg("seed") = std::nullopt,
          "Run the scenario described by a config file; returns summary metrics.");
}
