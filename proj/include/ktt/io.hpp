#pragma once

#include "ktt/tensor.hpp"
#include "ktt/tucker.hpp"

#include <string>

namespace ktt {

// Tensor files are a raw little-endian element payload (mode-0 fastest) plus
// a text sidecar NAME.meta:
//   dims = n1 n2 ... nd
//   dtype = f32|f64
// f32 payloads are widened to f64 on read.

std::string meta_path_for(const std::string& payload_path);

void write_tensor(const DenseTensor& t, const std::string& path, const std::string& dtype = "f64");
DenseTensor read_tensor(const std::string& path);

// A decomposition bundle is a directory holding core.bin/core.meta,
// factor_<j>.bin/factor_<j>.meta (1-based, each factor stored as an
// n_j x r_j tensor) and a bundle.meta with the run's provenance.

void write_bundle(const TuckerDecomposition& t, const std::string& dir);
TuckerDecomposition read_bundle(const std::string& dir);

}  // namespace ktt
