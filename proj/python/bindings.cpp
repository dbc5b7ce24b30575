#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gitnet/commands.hpp"
#include "gitnet/cost.hpp"
#include "gitnet/gitnet.hpp"
#include "gitnet/grad.hpp"
#include "gitnet/io.hpp"
#include "gitnet/loss.hpp"
#include "gitnet/pca.hpp"
#include "gitnet/pdedata.hpp"

namespace py = pybind11;
using namespace gitnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::tuple dataset_tuple(const Dataset& ds) { return py::make_tuple(to_array(ds.inputs), to_array(ds.outputs)); }

Dataset make_dataset(const Array& inputs, const Array& outputs) {
  Dataset ds;
  ds.inputs = to_tensor(inputs);
  ds.outputs = to_tensor(outputs);
  ds.validate();
  return ds;
}

py::dict report_dict(const CostReport& r) {
  py::dict d;
  d["architecture"] = r.architecture;
  d["flops"] = r.flops;
  d["encode"] = r.breakdown.encode;
  d["lift"] = r.breakdown.lift;
  d["layers"] = r.breakdown.layers;
  d["project"] = r.breakdown.project;
  d["decode"] = r.breakdown.decode;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GIT-Net operator learning core";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  // data
  m.def("sample_grf_periodic_1d", [](std::size_t n, std::size_t n_samples, std::uint64_t seed) {
    return to_array(sample_grf_periodic_1d(Mesh1D{n}, n_samples, seed));
  }, py::arg("n"), py::arg("n_samples"), py::arg("seed"));
  m.def("advection_dataset", [](std::size_t n, std::size_t n_samples, std::uint64_t seed) {
    return dataset_tuple(advection_dataset(Mesh1D{n}, n_samples, seed));
  }, py::arg("n"), py::arg("n_samples"), py::arg("seed"), "Returns (inputs, outputs), each [N×1×n].");
  m.def("poisson_dataset", [](std::size_t nx, std::size_t ny, std::size_t n_samples, std::uint64_t seed) {
    return dataset_tuple(poisson_dataset(Mesh2D{nx, ny}, n_samples, seed));
  }, py::arg("nx"), py::arg("ny"), py::arg("n_samples"), py::arg("seed"));
  m.def("linear_operator_dataset",
        [](std::size_t n_in, std::size_t n_out, std::size_t rank, std::size_t n_samples, double noise,
           std::uint64_t seed) {
          const auto d = linear_operator_dataset(n_in, n_out, rank, n_samples, noise, seed);
          return py::make_tuple(to_array(d.data.inputs), to_array(d.data.outputs), to_array(d.op));
        },
        py::arg("n_in"), py::arg("n_out"), py::arg("rank"), py::arg("n_samples"), py::arg("noise_std"),
        py::arg("seed"), "Returns (inputs, outputs, A).");

  // pca
  py::class_<PcaBasis>(m, "PcaBasis")
      .def_property_readonly("size", &PcaBasis::size)
      .def_readonly("n_points", &PcaBasis::n_points)
      .def_readonly("tail_energy", &PcaBasis::tail_energy)
      .def_property_readonly("mean", [](const PcaBasis& b) { return to_array(b.mean); })
      .def_property_readonly("components", [](const PcaBasis& b) { return to_array(b.components); })
      .def_property_readonly("singular_values", [](const PcaBasis& b) { return to_array(b.singular_values); })
      .def("encode", [](const PcaBasis& b, const Array& f) { return to_array(encode(b, to_tensor(f))); })
      .def("decode", [](const PcaBasis& b, const Array& a) { return to_array(decode(b, to_tensor(a))); });
  m.def("fit_pca",
        [](const Array& samples, double energy_threshold, std::size_t p_cap, bool center, std::uint64_t seed) {
          return fit_pca(to_tensor(samples), PcaOptions{energy_threshold, p_cap, center, seed});
        },
        py::arg("samples"), py::arg("energy_threshold") = kDefaultEnergyThreshold, py::arg("p_cap") = kDefaultPcaCap,
        py::arg("center") = true, py::arg("seed") = 0);

  // model
  py::class_<GitNetParams>(m, "GitNet")
      .def_property_readonly("parameter_count", [](const GitNetParams& p) { return parameter_count(p); })
      .def_property_readonly("layers", [](const GitNetParams& p) { return p.layers.size(); })
      .def("forward", [](const GitNetParams& p, const PcaBasis& bu, const PcaBasis& bv, const Array& f) {
        return to_array(gitnet_forward_batch(p, bu, bv, to_tensor(f)));
      }, py::arg("basis_u"), py::arg("basis_v"), py::arg("f"), "f is [B×d_in×N_u].")
      .def("coefficients", [](const GitNetParams& p, const Array& alpha) {
        return to_array(gitnet_coefficients(p, to_tensor(alpha)));
      })
      .def("finite_diff_check", [](const GitNetParams& p, const PcaBasis& bu, const PcaBasis& bv, const Array& f,
                                    const Array& g, double h) {
        return finite_diff_check(p, bu, bv, to_tensor(f), to_tensor(g), h);
      }, py::arg("basis_u"), py::arg("basis_v"), py::arg("f"), py::arg("g"), py::arg("h") = 1e-5);
  m.def("init_gitnet",
        [](std::size_t d_in, std::size_t d_out, std::size_t p_u, std::size_t p_v, std::size_t channels,
           std::size_t modes, std::size_t layers, const std::string& variant, std::uint64_t seed,
           const std::string& activation) {
          return init_params(GitNetShape{d_in, d_out, p_u, p_v, channels, modes, layers}, parse_variant(variant),
                             seed, parse_activation(activation));
        },
        py::arg("d_in"), py::arg("d_out"), py::arg("p_u"), py::arg("p_v"), py::arg("channels"), py::arg("modes"),
        py::arg("layers") = 3, py::arg("variant") = "standard", py::arg("seed") = 0, py::arg("activation") = "gelu");

  // metrics
  m.def("relative_test_error", [](const Array& out, const Array& tgt) {
    return relative_test_error(to_tensor(out), to_tensor(tgt));
  });
  m.def("empirical_loss", [](const Array& p, const Array& t, const std::string& kind) {
    return empirical_loss(to_tensor(p), to_tensor(t), parse_loss(kind));
  }, py::arg("preds"), py::arg("targets"), py::arg("kind") = "absolute_mse");

  // cost
  m.def("flops_gitnet_exact",
        [](std::size_t n_points, std::size_t d_in, std::size_t d_out, std::size_t p_u, std::size_t p_v,
           std::size_t c, std::size_t k, std::size_t l) {
          return report_dict(flops_gitnet_exact(n_points, d_in, d_out, p_u, p_v, c, k, l));
        },
        py::arg("n_points"), py::arg("d_in"), py::arg("d_out"), py::arg("p_u"), py::arg("p_v"), py::arg("channels"),
        py::arg("modes"), py::arg("layers"));
  m.def("instrumented_flops", [](const GitNetParams& p, const PcaBasis& bu, const PcaBasis& bv) {
    return instrumented_flops(p, bu, bv);
  });
  m.def("flops_fno_scaling", &flops_fno_scaling, py::arg("n_points"), py::arg("channels"), py::arg("layers"),
        py::arg("modes"));

  // checkpoints and commands
  py::class_<Checkpoint>(m, "Checkpoint")
      .def_readonly("basis_u", &Checkpoint::basis_u)
      .def_readonly("basis_v", &Checkpoint::basis_v)
      .def("predict", [](const Checkpoint& c, const Array& f) { return to_array(predict(c, to_tensor(f))); })
      .def("evaluate", [](const Checkpoint& c, const Array& f, const Array& g) {
        const EvalReport r = evaluate(c, make_dataset(f, g));
        py::dict d;
        d["errors"] = r.errors;
        d["mean"] = r.mean;
        d["min"] = r.min;
        d["median"] = r.median;
        d["max"] = r.max;
        return d;
      });
  m.def("load_checkpoint", [](const std::filesystem::path& p) { return load_checkpoint(p); });
  m.def("read_dataset", [](const std::filesystem::path& p) { return dataset_tuple(read_dataset(p)); });
  m.def("write_dataset", [](const std::filesystem::path& p, const Array& f, const Array& g, std::uint64_t seed) {
    Dataset ds = make_dataset(f, g);
    ds.seed = seed;
    write_dataset(p, ds);
  }, py::arg("path"), py::arg("inputs"), py::arg("outputs"), py::arg("seed") = 0);
  m.def("generate", [](const std::filesystem::path& cfg) { return cmd_generate(load_run_config(cfg)); });
  m.def("train", [](const std::filesystem::path& cfg) {
    const TrainSummary s = cmd_train(load_run_config(cfg));
    py::list rows;
    for (const auto& r : s.history) rows.append(py::make_tuple(r.epoch, r.train_loss, r.test_rel_error, r.lr));
    return rows;
  }, "Runs the train command; returns the history as (epoch, train_loss, test_rel_error, lr) tuples.");
  m.def("flops", [](const std::filesystem::path& cfg, bool instrument) {
    return cmd_flops(load_run_config(cfg), instrument);
  }, py::arg("config"), py::arg("instrument") = false);
}
