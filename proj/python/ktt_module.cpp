// Python bindings for the core operations. Tensors cross the boundary as
// numpy arrays in Fortran order, which is byte-identical to the library's
// mode-0-fastest layout, so conversions are plain buffer copies.

#include "ktt/sketch.hpp"
#include "ktt/synthetic.hpp"
#include "ktt/tensor.hpp"
#include "ktt/tucker.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace ktt;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

DenseTensor to_tensor(const FArray& a) {
  std::vector<index_t> dims(static_cast<std::size_t>(a.ndim()));
  for (py::ssize_t k = 0; k < a.ndim(); ++k) dims[static_cast<std::size_t>(k)] = a.shape(k);
  DenseTensor t(dims);
  std::copy(a.data(), a.data() + a.size(), t.data());
  return t;
}

py::array_t<double> to_array(const DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  std::vector<py::ssize_t> strides(shape.size());
  py::ssize_t stride = sizeof(double);
  for (std::size_t k = 0; k < shape.size(); ++k) {
    strides[k] = stride;
    stride *= shape[k];
  }
  py::array_t<double> out(shape, strides);
  std::copy(t.data(), t.data() + t.size(), out.mutable_data());
  return out;
}

TuckerDecomposition assemble(const FArray& core, const std::vector<Matrix>& factors) {
  TuckerDecomposition t;
  t.core = to_tensor(core);
  for (const Matrix& f : factors) t.factors.push_back({f, false});
  if (t.core.order() != static_cast<int>(t.factors.size()))
    throw std::invalid_argument("need one factor per core mode");
  return t;
}

py::dict decompose_py(const FArray& x, const std::vector<index_t>& rank,
                      const std::string& algorithm, index_t oversample,
                      const std::string& distribution, std::uint64_t seed, bool use_dimtree,
                      bool rank_ell_only, bool keep_intermediate) {
  const auto alg = algorithm_from_name(algorithm);
  if (!alg) throw std::invalid_argument("unknown algorithm: " + algorithm);
  const auto dist = distribution_from_name(distribution);
  if (!dist) throw std::invalid_argument("unknown distribution: " + distribution);

  TuckerOptions opt;
  opt.oversample = oversample;
  opt.distribution = *dist;
  opt.seed = seed;
  opt.use_dimtree = use_dimtree;
  opt.rank_ell_only = rank_ell_only;
  opt.keep_intermediate = keep_intermediate;

  const DenseTensor t = to_tensor(x);
  const TuckerDecomposition d = decompose(*alg, t, rank, opt);

  py::list factors;
  for (const FactorMatrix& f : d.factors)
    factors.append(py::cast(f.mat, py::return_value_policy::copy));
  py::dict out;
  out["core"] = to_array(d.core);
  out["factors"] = factors;
  out["algorithm"] = d.provenance.algorithm;
  out["relative_error"] = relative_error(t, d);
  out["fallbacks"] = d.provenance.fallbacks;
  if (d.sketch_core) {
    out["sketch_core"] = to_array(*d.sketch_core);
    py::list sk;
    for (const FactorMatrix& f : d.sketch_factors)
      sk.append(py::cast(f.mat, py::return_value_policy::copy));
    out["sketch_factors"] = sk;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(krontucker, m) {
  m.doc() = "Tucker decomposition with Kronecker-structured sketching";

  m.def("algorithms", [] {
    std::vector<std::string> names;
    for (Algorithm a : all_algorithms()) names.push_back(algorithm_name(a));
    return names;
  });

  m.def("decompose", &decompose_py, py::arg("x"), py::arg("rank"),
        py::arg("algorithm") = "sthosvd", py::arg("oversample") = 5,
        py::arg("distribution") = "auto", py::arg("seed") = 0, py::arg("use_dimtree") = true,
        py::arg("rank_ell_only") = false, py::arg("keep_intermediate") = false,
        "Compress x to the given multilinear rank; returns a dict with the core,\n"
        "the factor matrices, and the achieved relative error.");

  m.def(
      "reconstruct",
      [](const FArray& core, const std::vector<Matrix>& factors) {
        return to_array(reconstruct(assemble(core, factors)));
      },
      py::arg("core"), py::arg("factors"));

  m.def(
      "relative_error",
      [](const FArray& x, const FArray& core, const std::vector<Matrix>& factors) {
        return relative_error(to_tensor(x), assemble(core, factors));
      },
      py::arg("x"), py::arg("core"), py::arg("factors"));

  m.def(
      "synth_geometric",
      [](const std::vector<index_t>& dims, double decay, std::uint64_t seed) {
        return to_array(synth_geometric(dims, decay, seed));
      },
      py::arg("dims"), py::arg("decay"), py::arg("seed") = 0);

  m.def(
      "synth_lowrank_noise",
      [](const std::vector<index_t>& dims, const std::vector<index_t>& true_rank, double noise_rel,
         std::uint64_t seed) { return to_array(synth_lowrank_noise(dims, true_rank, noise_rel, seed)); },
      py::arg("dims"), py::arg("true_rank"), py::arg("noise_rel"), py::arg("seed") = 0);

  m.def(
      "synth_exact_lowrank",
      [](const std::vector<index_t>& dims, const std::vector<index_t>& rank, std::uint64_t seed) {
        return to_array(synth_exact_lowrank(dims, rank, seed));
      },
      py::arg("dims"), py::arg("rank"), py::arg("seed") = 0);

  m.def(
      "plan_subrank_row",
      [](const std::vector<index_t>& dims, int mode, index_t ell) {
        const SubrankRow row = plan_subrank_row(dims, mode, ell);
        py::dict out;
        out["s"] = row.s;
        out["adjusted_ell"] = row.adjusted_ell;
        return out;
      },
      py::arg("dims"), py::arg("mode"), py::arg("ell"));

  m.def(
      "plan_subrank_vector",
      [](const std::vector<index_t>& ranks, index_t oversample, const std::vector<index_t>& dims) {
        return plan_subrank_vector(ranks, oversample, dims).s;
      },
      py::arg("ranks"), py::arg("oversample"), py::arg("dims"));
}
