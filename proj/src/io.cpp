#include "ktt/io.hpp"

#include "ktt/sketch.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ktt {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<index_t> parse_index_list(const std::string& text, const std::string& what) {
  std::istringstream is(text);
  std::vector<index_t> out;
  index_t v;
  while (is >> v) out.push_back(v);
  if (out.empty()) throw std::runtime_error("empty " + what + " list");
  return out;
}

// key = value lines; later duplicates append under the same key
std::multimap<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::multimap<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv.emplace(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

std::string require(const std::multimap<std::string, std::string>& kv, const std::string& key,
                    const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("missing `" + key + "` in " + path);
  return it->second;
}

void write_payload(const DenseTensor& t, const std::string& path, bool f32) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (f32) {
    std::vector<float> narrow(t.storage().begin(), t.storage().end());
    out.write(reinterpret_cast<const char*>(narrow.data()),
              static_cast<std::streamsize>(narrow.size() * sizeof(float)));
  } else {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.storage().size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace

std::string meta_path_for(const std::string& payload_path) {
  return fs::path(payload_path).replace_extension(".meta").string();
}

void write_tensor(const DenseTensor& t, const std::string& path, const std::string& dtype) {
  if (dtype != "f64" && dtype != "f32")
    throw std::invalid_argument("dtype must be f32 or f64, got " + dtype);
  write_payload(t, path, dtype == "f32");
  std::ofstream meta(meta_path_for(path));
  if (!meta) throw std::runtime_error("cannot write " + meta_path_for(path));
  meta << "dims =";
  for (index_t n : t.dims()) meta << " " << n;
  meta << "\n" << "dtype = " << dtype << "\n";
}

DenseTensor read_tensor(const std::string& path) {
  const std::string meta_path = meta_path_for(path);
  const auto kv = read_kv(meta_path);
  const std::vector<index_t> dims = parse_index_list(require(kv, "dims", meta_path), "dims");
  const std::string dtype = require(kv, "dtype", meta_path);
  if (dtype != "f64" && dtype != "f32")
    throw std::runtime_error("unsupported dtype `" + dtype + "` in " + meta_path);

  index_t total = 1;
  for (index_t n : dims) {
    if (n < 1) throw std::runtime_error("bad dims in " + meta_path);
    total *= n;
  }
  const std::size_t elem = dtype == "f32" ? sizeof(float) : sizeof(double);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  if (bytes != static_cast<std::uint64_t>(total) * elem)
    throw std::runtime_error("payload " + path + " holds " + std::to_string(bytes) +
                             " bytes, expected " + std::to_string(total * static_cast<index_t>(elem)));
  in.seekg(0);

  std::vector<double> data(static_cast<std::size_t>(total));
  if (dtype == "f32") {
    std::vector<float> narrow(static_cast<std::size_t>(total));
    in.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(bytes));
    std::copy(narrow.begin(), narrow.end(), data.begin());
  } else {
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  }
  if (!in) throw std::runtime_error("short read from " + path);
  return DenseTensor(dims, std::move(data));
}

void write_bundle(const TuckerDecomposition& t, const std::string& dir) {
  fs::create_directories(dir);
  write_tensor(t.core, (fs::path(dir) / "core.bin").string());
  for (std::size_t j = 0; j < t.factors.size(); ++j) {
    const Matrix& f = t.factors[j].mat;
    DenseTensor ft({f.rows(), f.cols()}, std::vector<double>(f.data(), f.data() + f.size()));
    write_tensor(ft, (fs::path(dir) / ("factor_" + std::to_string(j + 1) + ".bin")).string());
  }

  std::ofstream meta(fs::path(dir) / "bundle.meta");
  if (!meta) throw std::runtime_error("cannot write bundle.meta in " + dir);
  const Provenance& p = t.provenance;
  meta << "algorithm = " << p.algorithm << "\n";
  meta << "order = " << t.factors.size() << "\n";
  meta << "rank =";
  for (index_t r : p.rank) meta << " " << r;
  meta << "\n";
  meta << "oversample = " << p.oversample << "\n";
  meta << "seed = " << p.seed << "\n";
  meta << "distribution = " << to_string(p.requested_distribution) << "\n";
  meta << "rank_ell_only = " << (p.rank_ell_only ? 1 : 0) << "\n";
  if (!p.mode_order.empty()) {
    meta << "mode_order =";
    for (int m : p.mode_order) meta << " " << m;
    meta << "\n";
  }
  if (p.relative_error) meta << "relative_error = " << format_double(*p.relative_error) << "\n";
  if (p.plan.subrank_vector) {
    meta << "subrank_vector =";
    for (index_t s : p.plan.subrank_vector->s) meta << " " << s;
    meta << "\n";
  }
  if (p.plan.subrank_matrix) {
    for (std::size_t j = 0; j < p.plan.subrank_matrix->s.size(); ++j) {
      meta << "subrank_matrix_row_" << j << " =";
      for (index_t s : p.plan.subrank_matrix->s[j]) meta << " " << s;
      meta << "\n";
    }
    meta << "adjusted_ell =";
    for (index_t e : p.plan.subrank_matrix->adjusted_ell) meta << " " << e;
    meta << "\n";
  }
  for (const std::string& f : p.fallbacks) meta << "fallback = " << f << "\n";
}

TuckerDecomposition read_bundle(const std::string& dir) {
  const std::string meta_path = (fs::path(dir) / "bundle.meta").string();
  const auto kv = read_kv(meta_path);

  TuckerDecomposition t;
  t.core = read_tensor((fs::path(dir) / "core.bin").string());
  const int order = static_cast<int>(std::stoll(require(kv, "order", meta_path)));
  if (order != t.core.order())
    throw std::runtime_error("bundle order disagrees with core dims in " + dir);
  t.factors.resize(static_cast<std::size_t>(order));
  for (int j = 0; j < order; ++j) {
    DenseTensor ft =
        read_tensor((fs::path(dir) / ("factor_" + std::to_string(j + 1) + ".bin")).string());
    if (ft.order() != 2) throw std::runtime_error("factor file is not a matrix in " + dir);
    Matrix m(ft.dim(0), ft.dim(1));
    std::copy(ft.data(), ft.data() + ft.size(), m.data());
    FactorMatrix& f = t.factors[static_cast<std::size_t>(j)];
    f.mat = std::move(m);
    f.orthonormal = orthonormality_residual(f.mat) <= 1e-8;
  }

  Provenance& p = t.provenance;
  p.algorithm = require(kv, "algorithm", meta_path);
  p.rank = parse_index_list(require(kv, "rank", meta_path), "rank");
  p.oversample = std::stoll(require(kv, "oversample", meta_path));
  p.seed = std::stoull(require(kv, "seed", meta_path));
  const std::string dist = require(kv, "distribution", meta_path);
  const auto parsed = distribution_from_name(dist);
  if (!parsed) throw std::runtime_error("unknown distribution `" + dist + "` in " + meta_path);
  p.requested_distribution = *parsed;
  p.rank_ell_only = require(kv, "rank_ell_only", meta_path) == "1";
  if (auto it = kv.find("mode_order"); it != kv.end()) {
    for (index_t v : parse_index_list(it->second, "mode_order"))
      p.mode_order.push_back(static_cast<int>(v));
  }
  if (auto it = kv.find("relative_error"); it != kv.end()) p.relative_error = std::stod(it->second);
  if (auto it = kv.find("subrank_vector"); it != kv.end()) {
    SubrankVector sv;
    sv.s = parse_index_list(it->second, "subrank_vector");
    p.plan.subrank_vector = std::move(sv);
  }
  if (kv.count("subrank_matrix_row_0")) {
    SubrankMatrix sm;
    for (std::size_t j = 0;; ++j) {
      auto it = kv.find("subrank_matrix_row_" + std::to_string(j));
      if (it == kv.end()) break;
      sm.s.push_back(parse_index_list(it->second, "subrank matrix row"));
    }
    sm.adjusted_ell = parse_index_list(require(kv, "adjusted_ell", meta_path), "adjusted_ell");
    p.plan.subrank_matrix = std::move(sm);
  }
  for (auto [it, end] = kv.equal_range("fallback"); it != end; ++it)
    p.fallbacks.push_back(it->second);
  return t;
}

}  // namespace ktt
