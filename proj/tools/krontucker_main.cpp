// Command-line front end: synthetic data generation, compression,
// reconstruction, error reports, benchmarks, and the processor-grid
// simulator. Every command is a deterministic function of its arguments, so
// reruns reproduce their outputs byte for byte.

#include "ktt/analysis.hpp"
#include "ktt/dimtree.hpp"
#include "ktt/gridsim.hpp"
#include "ktt/io.hpp"
#include "ktt/synthetic.hpp"
#include "ktt/tucker.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using ktt::index_t;

std::vector<index_t> parse_dims(const std::string& text, const std::string& what) {
  std::vector<index_t> out;
  std::string token;
  for (char c : text + "x") {
    if (c == 'x' || c == 'X' || c == ',') {
      if (token.empty()) throw CLI::ValidationError(what, "empty component in `" + text + "`");
      out.push_back(std::stoll(token));
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  for (index_t v : out)
    if (v < 1) throw CLI::ValidationError(what, "components must be positive in `" + text + "`");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes to the path when given, else to stdout.
class ReportSink {
 public:
  explicit ReportSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SynthArgs {
  std::string kind;
  std::string dims_text;
  std::string rank_text;
  double decay = 0.4;
  double noise = 1e-4;
  std::uint64_t seed = 0;
  std::string out;
  std::string dtype = "f64";
};

int run_synth(const SynthArgs& a) {
  const auto dims = parse_dims(a.dims_text, "--dims");
  ktt::DenseTensor x;
  if (a.kind == "geometric") {
    x = ktt::synth_geometric(dims, a.decay, a.seed);
  } else if (a.kind == "lowrank-noise") {
    if (a.rank_text.empty()) throw CLI::ValidationError("--rank", "required for lowrank-noise");
    x = ktt::synth_lowrank_noise(dims, parse_dims(a.rank_text, "--rank"), a.noise, a.seed);
  } else {
    if (a.rank_text.empty()) throw CLI::ValidationError("--rank", "required for exact-lowrank");
    x = ktt::synth_exact_lowrank(dims, parse_dims(a.rank_text, "--rank"), a.seed);
  }
  ktt::write_tensor(x, a.out, a.dtype);
  std::cout << "wrote " << a.out << " dims " << ktt::dims_to_string(x.dims()) << "\n";
  return 0;
}

struct CompressArgs {
  std::string input;
  std::string out;
  std::string alg = "sthosvd";
  std::string rank_text;
  index_t oversample = 5;
  std::string dist = "auto";
  std::uint64_t seed = 0;
  std::string dimtree = "on";
  bool rank_ell_only = false;
  bool keep_intermediate = false;
  bool no_error = false;
};

ktt::Distribution parse_dist(const std::string& name) {
  const auto d = ktt::distribution_from_name(name);
  if (!d) throw CLI::ValidationError("--dist", "unknown distribution `" + name + "`");
  return *d;
}

int run_compress(const CompressArgs& a) {
  const auto alg = ktt::algorithm_from_name(a.alg);
  if (!alg) throw CLI::ValidationError("--alg", "unknown algorithm `" + a.alg + "`");
  const ktt::DenseTensor x = ktt::read_tensor(a.input);

  ktt::TuckerOptions opt;
  opt.oversample = a.oversample;
  opt.distribution = parse_dist(a.dist);
  opt.seed = a.seed;
  opt.use_dimtree = a.dimtree == "on";
  opt.rank_ell_only = a.rank_ell_only;
  opt.keep_intermediate = a.keep_intermediate;

  ktt::TuckerDecomposition t = ktt::decompose(*alg, x, parse_dims(a.rank_text, "--rank"), opt);
  if (!a.no_error) t.provenance.relative_error = ktt::relative_error(x, t);
  ktt::write_bundle(t, a.out);

  std::cout << "algorithm = " << t.provenance.algorithm << "\n";
  std::cout << "core dims = " << ktt::dims_to_string(t.core.dims()) << "\n";
  if (t.provenance.relative_error)
    std::cout << "relative_error = " << fmt(*t.provenance.relative_error) << "\n";
  for (const std::string& f : t.provenance.fallbacks) std::cerr << "note: " << f << "\n";
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

int run_reconstruct(const std::string& bundle, const std::string& out, const std::string& dtype) {
  const ktt::TuckerDecomposition t = ktt::read_bundle(bundle);
  const ktt::DenseTensor x = ktt::reconstruct(t);
  ktt::write_tensor(x, out, dtype);
  std::cout << "wrote " << out << " dims " << ktt::dims_to_string(x.dims()) << "\n";
  return 0;
}

int run_error(const std::string& tensor_path, const std::string& bundle) {
  const ktt::DenseTensor x = ktt::read_tensor(tensor_path);
  const ktt::TuckerDecomposition t = ktt::read_bundle(bundle);
  std::cout << "relative_error = " << fmt(ktt::relative_error(x, t)) << "\n";
  return 0;
}

struct BenchAccuracyArgs {
  std::string input;
  std::string dims_text = "100x100x100";
  double decay = 0.4;
  std::string rank_text = "10x10x10";
  index_t oversample = 5;
  int trials = 20;
  std::string dist = "gaussian";
  std::vector<std::string> algs;
  std::uint64_t seed = 0;
  std::string out;
};

int run_bench_accuracy(const BenchAccuracyArgs& a) {
  ktt::DenseTensor x = a.input.empty()
                           ? ktt::synth_geometric(parse_dims(a.dims_text, "--dims"), a.decay, a.seed)
                           : ktt::read_tensor(a.input);
  const auto rank = parse_dims(a.rank_text, "--rank");

  std::vector<ktt::Algorithm> algs;
  if (a.algs.empty()) {
    algs = ktt::randomized_algorithms();
  } else {
    for (const std::string& name : a.algs) {
      const auto alg = ktt::algorithm_from_name(name);
      if (!alg) throw CLI::ValidationError("--algs", "unknown algorithm `" + name + "`");
      algs.push_back(*alg);
    }
  }

  const double det_err = ktt::relative_error(x, ktt::sthosvd(x, rank));

  ReportSink sink(a.out);
  sink.out() << "algorithm,distribution,trials,deterministic_error,median_error,max_error,"
                "median_ratio,max_ratio\n";
  for (ktt::Algorithm alg : algs) {
    std::vector<double> errs;
    errs.reserve(static_cast<std::size_t>(a.trials));
    ktt::TuckerOptions opt;
    opt.oversample = a.oversample;
    opt.distribution = parse_dist(a.dist);
    for (int t = 0; t < a.trials; ++t) {
      opt.seed = ktt::mix64(a.seed, static_cast<std::uint64_t>(t) + 1);
      errs.push_back(ktt::relative_error(x, ktt::decompose(alg, x, rank, opt)));
    }
    std::sort(errs.begin(), errs.end());
    const std::size_t n = errs.size();
    const double median = n % 2 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
    const double worst = errs.back();
    sink.out() << ktt::algorithm_name(alg) << "," << a.dist << "," << a.trials << ","
               << fmt(det_err) << "," << fmt(median) << "," << fmt(worst) << ","
               << fmt(median / det_err) << "," << fmt(worst / det_err) << "\n";
  }
  return 0;
}

struct BenchMttmArgs {
  index_t n = 64;
  index_t s = 2;
  index_t q = 4;
  int d = 3;
  std::uint64_t seed = 0;
  std::string out;
};

int run_bench_mttm(const BenchMttmArgs& a) {
  namespace grid = ktt::grid;
  if (a.n % a.q != 0) throw CLI::ValidationError("--q", "must divide --n");

  const std::vector<index_t> dims(static_cast<std::size_t>(a.d), a.n);
  ktt::DenseTensor x = ktt::synth_exact_lowrank(dims, std::vector<index_t>(dims.size(), std::min<index_t>(4, a.n)), a.seed);
  grid::GridContext g{std::vector<index_t>(dims.size(), a.q)};
  const grid::DistTensor dist = grid::distribute(x, g);

  std::vector<ktt::Matrix> phis;
  std::vector<ktt::ModeApplication> apps;
  const int skip = a.d - 1;
  for (int k = 0; k < a.d; ++k)
    phis.push_back(ktt::gen_gaussian(a.n, a.s, {a.seed, ktt::streams::derive(ktt::streams::kGeneric, static_cast<std::uint64_t>(k))}));
  for (int k = 0; k + 1 < a.d; ++k) apps.push_back({k, &phis[static_cast<std::size_t>(k)], true});

  struct Row {
    std::string name;
    grid::MttmPrediction pred;
    std::int64_t meas_flops = 0, meas_first = 0, meas_events = 0, meas_words = 0;
  };
  std::vector<Row> rows(2);

  rows[0].name = "is";
  rows[0].pred = grid::predict_is_mttm(a.n, a.s, a.d, a.q);
  {
    grid::CommStats stats(g.nprocs());
    grid::is_mttm(dist, skip, apps, &stats);
    rows[0].meas_flops = stats.totals(0).flops;
    rows[0].meas_first = stats.events().front().payload;
    rows[0].meas_events = static_cast<std::int64_t>(stats.events().size());
    rows[0].meas_words = stats.grid_words_sent();
  }
  rows[1].name = "aao";
  rows[1].pred = grid::predict_aao_mttm(a.n, a.s, a.d, a.q);
  {
    grid::CommStats stats(g.nprocs());
    grid::aao_mttm(dist, skip, apps, &stats);
    rows[1].meas_flops = stats.totals(0).flops;
    rows[1].meas_first = stats.events().front().payload;
    rows[1].meas_events = static_cast<std::int64_t>(stats.events().size());
    rows[1].meas_words = stats.grid_words_sent();
  }

  ReportSink sink(a.out);
  sink.out() << "strategy,n,s,d,q,pred_flops_per_proc,pred_first_payload,pred_total_payload,"
                "pred_collectives,meas_flops_rank0,meas_first_payload,meas_events,"
                "meas_grid_words_sent\n";
  for (const Row& r : rows)
    sink.out() << r.name << "," << a.n << "," << a.s << "," << a.d << "," << a.q << ","
               << r.pred.flops_per_proc << "," << r.pred.first_payload << ","
               << r.pred.total_payload << "," << r.pred.collectives << "," << r.meas_flops << ","
               << r.meas_first << "," << r.meas_events << "," << r.meas_words << "\n";
  return 0;
}

struct BenchDimtreeArgs {
  index_t n = 16;
  index_t r = 2;
  std::vector<int> d_list = {3, 4, 5};
  index_t max_elems = 1 << 24;
  std::uint64_t seed = 0;
  std::string out;
};

int run_bench_dimtree(const BenchDimtreeArgs& a) {
  ReportSink sink(a.out);
  sink.out() << "d,n,r,tree_flops,naive_flops,ratio,tree_ttms,naive_ttms,measured,"
                "measured_tree_flops,measured_naive_flops\n";
  for (int d : a.d_list) {
    if (d < 2) throw CLI::ValidationError("--d", "needs d >= 2");
    const std::int64_t tree = ktt::predicted_sketch_flops(a.n, a.r, d, true);
    const std::int64_t naive = ktt::predicted_sketch_flops(a.n, a.r, d, false);
    index_t elems = 1;
    bool fits = true;
    for (int k = 0; k < d; ++k) {
      elems *= a.n;
      if (elems > a.max_elems) {
        fits = false;
        break;
      }
    }
    std::string mt, mn;
    if (fits) {
      const std::vector<index_t> dims(static_cast<std::size_t>(d), a.n);
      ktt::DenseTensor x = ktt::synth_exact_lowrank(dims, std::vector<index_t>(dims.size(), std::min(a.r, a.n)), a.seed);
      std::vector<ktt::Matrix> phis;
      for (int k = 0; k < d; ++k)
        phis.push_back(ktt::gen_gaussian(a.n, a.r, {a.seed, ktt::streams::derive(ktt::streams::kGeneric, static_cast<std::uint64_t>(k))}));
      mt = std::to_string(ktt::all_mode_sketches(x, phis, true).flops);
      mn = std::to_string(ktt::all_mode_sketches(x, phis, false).flops);
    }
    sink.out() << d << "," << a.n << "," << a.r << "," << tree << "," << naive << ","
               << fmt(static_cast<double>(naive) / static_cast<double>(tree)) << ","
               << ktt::predicted_ttm_applications(d, true) << ","
               << ktt::predicted_ttm_applications(d, false) << "," << (fits ? 1 : 0) << "," << mt
               << "," << mn << "\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string input;
  std::string grid_text;
  std::string alg = "alg11";
  std::string mttm = "aao";
  std::string rank_text;
  index_t oversample = 5;
  std::string dist = "auto";
  std::uint64_t seed = 0;
  std::string report = "csv";
  std::string out;
  std::string bundle;
  bool no_error = false;
};

int run_simulate(const SimulateArgs& a) {
  namespace grid = ktt::grid;
  const ktt::DenseTensor x = ktt::read_tensor(a.input);
  grid::GridContext g{parse_dims(a.grid_text, "--grid")};
  const grid::DistTensor dist = grid::distribute(x, g);

  ktt::TuckerOptions opt;
  opt.oversample = a.oversample;
  opt.distribution = parse_dist(a.dist);
  opt.seed = a.seed;

  grid::ParallelOptions popt;
  popt.use_aao = a.mttm == "aao";

  grid::CommStats stats(g.nprocs());
  ktt::TuckerDecomposition t;
  const auto rank = parse_dims(a.rank_text, "--rank");
  if (a.alg == "alg11") {
    t = grid::parallel_rsthosvd_kron(dist, rank, opt, popt, &stats);
  } else {
    t = grid::parallel_rhosvd_kron_reuse(dist, rank, opt, popt, &stats);
  }

  std::cerr << "algorithm = " << t.provenance.algorithm << "\n";
  std::cerr << "grid = " << ktt::dims_to_string(g.shape) << " (" << g.nprocs() << " procs)\n";
  if (!a.no_error) std::cerr << "relative_error = " << fmt(ktt::relative_error(x, t)) << "\n";
  std::cerr << "grid words sent = " << stats.grid_words_sent()
            << ", received = " << stats.grid_words_recv() << ", flops = " << stats.grid_flops()
            << "\n";
  if (!a.bundle.empty()) {
    ktt::write_bundle(t, a.bundle);
    std::cerr << "wrote " << a.bundle << "\n";
  }

  ReportSink sink(a.out);
  stats.write_csv(sink.out());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tucker compression with Kronecker-structured sketches"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for the linear algebra backend")
      ->default_val(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic tensor");
  synth_cmd->add_option("--kind", synth.kind, "generator")
      ->required()
      ->check(CLI::IsMember({"geometric", "lowrank-noise", "exact-lowrank"}));
  synth_cmd->add_option("--dims", synth.dims_text, "tensor dims, e.g. 100x100x100")->required();
  synth_cmd->add_option("--decay", synth.decay, "geometric decay rate")->default_val(0.4);
  synth_cmd->add_option("--rank", synth.rank_text, "true rank, e.g. 20x20x20");
  synth_cmd->add_option("--noise", synth.noise, "relative noise level")->default_val(1e-4);
  synth_cmd->add_option("--seed", synth.seed, "random seed")->default_val(0);
  synth_cmd->add_option("-o,--out", synth.out, "output tensor path")->required();
  synth_cmd->add_option("--dtype", synth.dtype, "element type")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->default_val("f64");

  CompressArgs comp;
  CLI::App* comp_cmd = app.add_subcommand("compress", "compute a Tucker decomposition");
  comp_cmd->add_option("input", comp.input, "input tensor path")->required();
  comp_cmd->add_option("-o,--out", comp.out, "output bundle directory")->required();
  comp_cmd->add_option("--alg", comp.alg, "algorithm")
      ->check(CLI::IsMember({"hosvd", "sthosvd", "rhosvd", "rsthosvd", "rhosvd-kron",
                             "rsthosvd-kron", "rhkron-re"}))
      ->default_val("sthosvd");
  comp_cmd->add_option("--rank", comp.rank_text, "target rank, e.g. 10x10x10")->required();
  comp_cmd->add_option("--oversample", comp.oversample, "sketch columns beyond the rank")
      ->default_val(5);
  comp_cmd->add_option("--dist", comp.dist, "sketch distribution")
      ->check(CLI::IsMember({"auto", "gaussian", "srht"}))
      ->default_val("auto");
  comp_cmd->add_option("--seed", comp.seed, "random seed")->default_val(0);
  comp_cmd->add_option("--dimtree", comp.dimtree, "share partial contractions across modes")
      ->check(CLI::IsMember({"on", "off"}))
      ->default_val("on");
  comp_cmd->add_flag("--rank-ell-only", comp.rank_ell_only, "skip the recompression stage");
  comp_cmd->add_flag("--keep-intermediate", comp.keep_intermediate,
                     "store the oversampled stage in memory for diagnostics");
  comp_cmd->add_flag("--no-error", comp.no_error, "skip the relative-error report");

  std::string rec_bundle, rec_out, rec_dtype = "f64";
  CLI::App* rec_cmd = app.add_subcommand("reconstruct", "expand a bundle to a dense tensor");
  rec_cmd->add_option("bundle", rec_bundle, "bundle directory")->required();
  rec_cmd->add_option("-o,--out", rec_out, "output tensor path")->required();
  rec_cmd->add_option("--dtype", rec_dtype, "element type")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->default_val("f64");

  std::string err_tensor, err_bundle;
  CLI::App* err_cmd = app.add_subcommand("error", "relative error of a bundle against a tensor");
  err_cmd->add_option("tensor", err_tensor, "reference tensor path")->required();
  err_cmd->add_option("bundle", err_bundle, "bundle directory")->required();

  CLI::App* bench_cmd = app.add_subcommand("bench", "benchmarks");
  bench_cmd->require_subcommand(1);

  BenchAccuracyArgs acc;
  CLI::App* acc_cmd = bench_cmd->add_subcommand("accuracy", "randomized accuracy trials");
  acc_cmd->add_option("--input", acc.input, "tensor path (default: geometric synthetic)");
  acc_cmd->add_option("--dims", acc.dims_text, "synthetic dims")->default_val("100x100x100");
  acc_cmd->add_option("--decay", acc.decay, "synthetic decay")->default_val(0.4);
  acc_cmd->add_option("--rank", acc.rank_text, "target rank")->default_val("10x10x10");
  acc_cmd->add_option("--oversample", acc.oversample, "oversampling")->default_val(5);
  acc_cmd->add_option("--trials", acc.trials, "trials per algorithm")->default_val(20);
  acc_cmd->add_option("--dist", acc.dist, "sketch distribution")
      ->check(CLI::IsMember({"auto", "gaussian", "srht"}))
      ->default_val("gaussian");
  acc_cmd->add_option("--algs", acc.algs, "algorithms (default: all randomized)");
  acc_cmd->add_option("--seed", acc.seed, "base seed")->default_val(0);
  acc_cmd->add_option("-o,--out", acc.out, "CSV path (default: stdout)");

  BenchMttmArgs mtm;
  CLI::App* mtm_cmd = bench_cmd->add_subcommand("mttm", "multi-TTM strategies on a simulated grid");
  mtm_cmd->add_option("--n", mtm.n, "cubic mode size")->default_val(64);
  mtm_cmd->add_option("--s", mtm.s, "sketch width per mode")->default_val(2);
  mtm_cmd->add_option("--q", mtm.q, "grid side")->default_val(4);
  mtm_cmd->add_option("--d", mtm.d, "tensor order")->default_val(3);
  mtm_cmd->add_option("--seed", mtm.seed, "random seed")->default_val(0);
  mtm_cmd->add_option("-o,--out", mtm.out, "CSV path (default: stdout)");

  BenchDimtreeArgs dt;
  CLI::App* dt_cmd = bench_cmd->add_subcommand("dimtree", "shared-contraction flop counts");
  dt_cmd->add_option("--n", dt.n, "cubic mode size")->default_val(16);
  dt_cmd->add_option("--r", dt.r, "sketch width")->default_val(2);
  dt_cmd->add_option("--d", dt.d_list, "tensor orders (repeatable)");
  dt_cmd->add_option("--max-elems", dt.max_elems, "largest tensor to actually run")
      ->default_val(1 << 24);
  dt_cmd->add_option("--seed", dt.seed, "random seed")->default_val(0);
  dt_cmd->add_option("-o,--out", dt.out, "CSV path (default: stdout)");

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "distributed run on a logical processor grid");
  sim_cmd->add_option("input", sim.input, "input tensor path")->required();
  sim_cmd->add_option("--grid", sim.grid_text, "grid shape, e.g. 2x2x2")->required();
  sim_cmd->add_option("--alg", sim.alg, "parallel algorithm")
      ->check(CLI::IsMember({"alg11", "alg12"}))
      ->default_val("alg11");
  sim_cmd->add_option("--mttm", sim.mttm, "sketch contraction strategy")
      ->check(CLI::IsMember({"is", "aao"}))
      ->default_val("aao");
  sim_cmd->add_option("--rank", sim.rank_text, "target rank")->required();
  sim_cmd->add_option("--oversample", sim.oversample, "oversampling")->default_val(5);
  sim_cmd->add_option("--dist", sim.dist, "sketch distribution")
      ->check(CLI::IsMember({"auto", "gaussian", "srht"}))
      ->default_val("auto");
  sim_cmd->add_option("--seed", sim.seed, "random seed")->default_val(0);
  sim_cmd->add_option("--report", sim.report, "report format")
      ->check(CLI::IsMember({"csv"}))
      ->default_val("csv");
  sim_cmd->add_option("-o,--out", sim.out, "report path (default: stdout)");
  sim_cmd->add_option("--bundle", sim.bundle, "also write the decomposition bundle here");
  sim_cmd->add_flag("--no-error", sim.no_error, "skip the relative-error report");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(threads);

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*comp_cmd) return run_compress(comp);
    if (*rec_cmd) return run_reconstruct(rec_bundle, rec_out, rec_dtype);
    if (*err_cmd) return run_error(err_tensor, err_bundle);
    if (*bench_cmd) {
      if (*acc_cmd) return run_bench_accuracy(acc);
      if (*mtm_cmd) return run_bench_mttm(mtm);
      return run_bench_dimtree(dt);
    }
    return run_simulate(sim);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
