#pragma once

#include "mxcd/mxcd.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mxcd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// "0.6" broadcasts to every layer; "0.6,0.8" must list one value per layer.
inline std::vector<double> parse_gamma(const std::string& text, Index num_layers) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad --gamma value '" + tok + "'");
    }
  }
  if (values.size() == 1) values.assign(static_cast<std::size_t>(num_layers), values[0]);
  if (static_cast<Index>(values.size()) != num_layers)
    throw UsageError("--gamma needs 1 or L=" + std::to_string(num_layers) + " values");
  return values;
}

// "2:5" (inclusive) or "2,3,4".
inline std::vector<Index> parse_range(const std::string& text, const std::string& flag) {
  std::vector<Index> out;
  try {
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      const Index lo = std::stoll(text.substr(0, colon));
      const Index hi = std::stoll(text.substr(colon + 1));
      if (hi < lo) throw std::invalid_argument(text);
      for (Index v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      std::stringstream ss(text);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
    }
  } catch (const std::exception&) {
    throw UsageError("bad " + flag + " value '" + text + "'");
  }
  if (out.empty()) throw UsageError(flag + " is empty");
  return out;
}

struct NetworkArgs {
  std::string input;
  std::string coupling;
  double omega{1.0};
  std::string gamma{"1"};

  void add_to(CLI::App* cmd) {
    cmd->add_option("--input", input, "Multiplex edge-list file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--coupling", coupling, "Layer coupling file (default: all-to-all)")->check(CLI::ExistingFile);
    cmd->add_option("--omega", omega, "Inter-layer coupling strength")->capture_default_str();
    cmd->add_option("--gamma", gamma, "Resolution: one value or one per layer")->capture_default_str();
  }

  MultiplexNetwork load() const {
    if (!(omega >= 0.0)) throw UsageError("--omega must be non-negative");
    return load_network(input, coupling.empty() ? std::nullopt : std::optional<std::string>(coupling), omega);
  }
};

struct DetectArgs {
  NetworkArgs net;
  std::string method{"mpbtv"};
  Index nc{0};
  Index k{0};
  double dt{1.0};
  Index runs{20};
  std::uint64_t seed{0};
  Index max_iter{300};
  double tol{1e-8};
  double eig_tol{1e-8};
  double krylov_factor{2.0};
  double tie_tol{1e-8};
  std::string out;
  std::string basis_cache;
  unsigned threads{1};
  std::string nc_range;
  std::string k_range;

  void add_common(CLI::App* cmd) {
    net.add_to(cmd);
    cmd->add_option("--method", method, "mpbtv or dgfm3")->check(CLI::IsMember({"mpbtv", "dgfm3"}))->capture_default_str();
    cmd->add_option("--dt", dt, "MBO time step")->capture_default_str();
    cmd->add_option("--runs", runs, "Random initial partitions")->capture_default_str();
    cmd->add_option("--seed", seed, "Base seed")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "MBO iteration cap")->capture_default_str();
    cmd->add_option("--tol", tol, "Stopping tolerance on ||U_j - U_{j-1}||_F")->capture_default_str();
    cmd->add_option("--eig-tol", eig_tol, "Relative eigenpair residual tolerance")->capture_default_str();
    cmd->add_option("--krylov-factor", krylov_factor, "Lanczos subspace size as a multiple of k")->capture_default_str();
    cmd->add_option("--tie-tol", tie_tol, "Relative tolerance for argmax ties in thresholding")->capture_default_str();
    cmd->add_option("--basis-cache", basis_cache, "Reuse (or create) a cached spectral basis");
    cmd->add_option("--threads", threads, "Worker threads for the runs")->capture_default_str()->check(CLI::PositiveNumber);
  }

  DetectConfig config(Index num_layers, Index nc_value, Index k_value) const {
    DetectConfig c;
    c.method = parse_method(method);
    c.gamma = parse_gamma(net.gamma, num_layers);
    c.omega = net.omega;
    c.num_communities = nc_value;
    c.k = k_value;
    c.dt = dt;
    c.max_iter = max_iter;
    c.tol = tol;
    c.n_runs = runs;
    c.seed = seed;
    c.eig_tol = eig_tol;
    c.subspace_factor = krylov_factor;
    c.threads = threads;
    c.tie_tol = tie_tol;
    try {
      c.validate(num_layers);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct Timed {
  SpectralBasis basis;
  double seconds{0.0};
  bool from_cache{false};
};

// Loads the basis from the cache when it holds at least k pairs for the same
// inputs; otherwise computes it (and writes the cache if a path was given).
inline Timed obtain_basis(const DetectArgs& args, const MultiplexNetwork& net, const DegreeData& deg,
                          const DetectConfig& cfg, Index k) {
  const BasisKey key{cfg.method, cfg.gamma, cfg.omega, net.size(), deg.total_strength};
  const auto start = std::chrono::steady_clock::now();
  Timed t;
  if (!args.basis_cache.empty() && std::filesystem::exists(args.basis_cache)) {
    t.basis = load_basis(args.basis_cache, key);
    if (t.basis.size() >= k) {
      t.from_cache = true;
      if (t.basis.size() > k) t.basis = t.basis.truncated(k);
    }
  }
  if (!t.from_cache) {
    if (k >= net.size()) throw UsageError("--k must be smaller than nL=" + std::to_string(net.size()));
    t.basis = basis_for_method(cfg.method, net, deg, cfg.gamma, k, cfg.eig_tol, cfg.seed, cfg.subspace_factor);
    if (!args.basis_cache.empty()) save_basis(t.basis, key, args.basis_cache);
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

inline void print_detect_summary(std::ostream& out, const DetectConfig& cfg, const DetectResult& r,
                                 const Timed& basis) {
  out << "method\t" << to_string(cfg.method) << '\n';
  out << "best_modularity\t" << num(r.best.modularity) << '\n';
  out << "best_run\t" << r.best.run_index << '\n';
  out << "communities\t" << r.best.partition.nonempty_communities() << '\n';
  out << "iterations\t" << r.best.iterations << '\n';
  out << "converged\t" << (r.best.converged ? 1 : 0) << '\n';
  auto q = r.run_modularity;
  std::sort(q.begin(), q.end());
  out << "modularity_min\t" << num(q.front()) << '\n';
  out << "modularity_median\t" << num(q[q.size() / 2]) << '\n';
  out << "modularity_max\t" << num(q.back()) << '\n';
  out << "basis_from_cache\t" << (basis.from_cache ? 1 : 0) << '\n';
  out << "offline_seconds\t" << num(basis.seconds) << '\n';
  out << "per_run_seconds\t" << num(r.runs_seconds / static_cast<double>(r.run_modularity.size())) << '\n';
  out << "#run\tmodularity\titerations\tconverged\n";
  for (std::size_t i = 0; i < r.run_modularity.size(); ++i)
    out << i << '\t' << num(r.run_modularity[i]) << '\t' << r.run_iterations[i] << '\t'
        << (r.run_converged[i] ? 1 : 0) << '\n';
}

inline int cmd_detect(const DetectArgs& args, std::ostream& out) {
  const MultiplexNetwork net = args.net.load();
  const DegreeData deg = compute_degrees(net);
  const DetectConfig cfg = args.config(net.num_layers(), args.nc, args.k);
  const Timed basis = obtain_basis(args, net, deg, cfg, cfg.k);
  const DetectResult result = detect_with_basis(basis.basis, net, deg, cfg);
  if (!args.out.empty()) save_partition(result.best.partition, net.nodes(), args.out);
  print_detect_summary(out, cfg, result, basis);
  return kOk;
}

inline int cmd_grid(const DetectArgs& args, std::ostream& out) {
  const MultiplexNetwork net = args.net.load();
  const DegreeData deg = compute_degrees(net);
  std::vector<Index> ncs = args.nc_range.empty() ? std::vector<Index>{args.nc} : parse_range(args.nc_range, "--nc-range");
  std::vector<Index> ks = args.k_range.empty() ? std::vector<Index>{args.k} : parse_range(args.k_range, "--k-range");
  for (Index v : ncs)
    if (v < 2) throw UsageError("grid needs n_c >= 2 (use --nc or --nc-range)");
  for (Index v : ks)
    if (v < 1) throw UsageError("grid needs k >= 1 (use --k or --k-range)");
  const Index k_max = *std::max_element(ks.begin(), ks.end());
  const DetectConfig base = args.config(net.num_layers(), ncs.front(), k_max);
  const Timed basis = obtain_basis(args, net, deg, base, k_max);

  out << "offline_seconds\t" << num(basis.seconds) << '\n';
  out << "#nc\tk\tbest_modularity\tcommunities\tbest_run\n";
  double best_q = -std::numeric_limits<double>::infinity();
  Index best_nc = 0, best_k = 0;
  for (Index nc : ncs)
    for (Index k : ks) {
      const DetectConfig cfg = args.config(net.num_layers(), nc, k);
      const DetectResult r = detect_with_basis(basis.basis.truncated(k), net, deg, cfg);
      out << nc << '\t' << k << '\t' << num(r.best.modularity) << '\t' << r.best.partition.nonempty_communities()
          << '\t' << r.best.run_index << '\n';
      if (r.best.modularity > best_q) {
        best_q = r.best.modularity;
        best_nc = nc;
        best_k = k;
      }
    }
  out << "recommended\tnc=" << best_nc << "\tk=" << best_k << "\tmodularity=" << num(best_q) << '\n';
  return kOk;
}

struct EvalArgs {
  NetworkArgs net;
  std::string partition;
  std::string truth;
};

inline int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const MultiplexNetwork net = args.net.load();
  const DegreeData deg = compute_degrees(net);
  const auto gamma = parse_gamma(args.net.gamma, net.num_layers());
  const Partition p = load_partition(args.partition, net.nodes(), net.num_layers());
  std::optional<Partition> truth;
  if (!args.truth.empty()) truth = load_labels(args.truth, net);
  const EvalReport report = evaluate(p, net, deg, gamma, truth);
  out << "modularity\t" << num(report.modularity) << '\n';
  out << "communities\t" << report.communities << '\n';
  if (report.accuracy) out << "accuracy\t" << num(*report.accuracy) << '\n';
  if (report.nmi) out << "nmi\t" << num(*report.nmi) << '\n';
  return kOk;
}

struct SpectrumArgs {
  NetworkArgs net;
  std::string op{"lk"};
  Index k{0};
  double eig_tol{1e-8};
  double krylov_factor{2.0};
  std::uint64_t seed{0};
  std::string basis_cache;
  std::string out;
};

inline int cmd_spectrum(const SpectrumArgs& args, std::ostream& out) {
  const MultiplexNetwork net = args.net.load();
  const DegreeData deg = compute_degrees(net);
  const auto gamma = parse_gamma(args.net.gamma, net.num_layers());
  const Method method = args.op == "lk" ? Method::mpbtv : Method::dgfm3;
  if (args.k < 1 || args.k >= net.size()) throw UsageError("--k must satisfy 1 <= k < nL=" + std::to_string(net.size()));
  const auto start = std::chrono::steady_clock::now();
  const SpectralBasis basis = basis_for_method(method, net, deg, gamma, args.k, args.eig_tol, args.seed, args.krylov_factor);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!args.basis_cache.empty())
    save_basis(basis, BasisKey{method, gamma, net.omega(), net.size(), deg.total_strength}, args.basis_cache);

  std::ostringstream table;
  // For lk the eigenvalues of L + K are reported (smallest first).
  table << "#index\teigenvalue\tresidual\n";
  for (Index i = 0; i < basis.size(); ++i) {
    const double value = method == Method::mpbtv ? -basis.eigenvalues(i) : basis.eigenvalues(i);
    table << (i + 1) << '\t' << num(value) << '\t' << num(basis.residuals(i)) << '\n';
  }
  out << "operator\t" << (method == Method::mpbtv ? "L+K" : "M") << '\n';
  if (method == Method::mpbtv) out << "shift\t" << num(basis.shift) << '\n';
  out << "seconds\t" << num(seconds) << '\n';
  out << table.str();
  if (!args.out.empty()) {
    auto f = detail::open_output(args.out);
    f << table.str();
  }
  return kOk;
}

struct OracleArgs {
  NetworkArgs net;
  Index nc{0};
  std::string out;
};

inline int cmd_oracle(const OracleArgs& args, std::ostream& out) {
  const MultiplexNetwork net = args.net.load();
  const DegreeData deg = compute_degrees(net);
  const auto gamma = parse_gamma(args.net.gamma, net.num_layers());
  const OracleResult r = oracle_max_modularity(net, deg, gamma, args.nc);
  if (!args.out.empty()) save_partition(r.argmax, net.nodes(), args.out);
  out << "max_modularity\t" << num(r.q_max) << '\n';
  out << "communities\t" << r.argmax.nonempty_communities() << '\n';
  out << "#node\tlayer\tcommunity\n";
  for (Index i = 0; i < r.argmax.size(); ++i)
    out << (i % net.nodes() + 1) << '\t' << (i / net.nodes() + 1) << '\t' << (r.argmax[i] + 1) << '\n';
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Community detection in multiplex networks (MPBTV / DGFM3 via spectral MBO)"};
  app.require_subcommand(1);

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "Detect communities with the MBO scheme");
  detect_args.add_common(detect);
  detect->add_option("--nc", detect_args.nc, "Number of communities")->required();
  detect->add_option("--k", detect_args.k, "Number of eigenpairs")->required();
  detect->add_option("--out", detect_args.out, "Write the best partition here");

  DetectArgs grid_args;
  auto* grid = app.add_subcommand("grid", "Grid search over n_c and k with one shared basis");
  grid_args.add_common(grid);
  grid->add_option("--nc", grid_args.nc, "Single number of communities");
  grid->add_option("--k", grid_args.k, "Single number of eigenpairs");
  grid->add_option("--nc-range", grid_args.nc_range, "n_c values, 'a:b' or 'a,b,c'");
  grid->add_option("--k-range", grid_args.k_range, "k values, 'a:b' or 'a,b,c'");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate a partition");
  eval_args.net.add_to(eval);
  eval->add_option("--partition", eval_args.partition, "Partition file (node layer community)")
      ->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_args.truth, "Ground-truth labels")->check(CLI::ExistingFile);

  SpectrumArgs spectrum_args;
  auto* spectrum = app.add_subcommand("spectrum", "Compute the spectral basis of L+K or M");
  spectrum_args.net.add_to(spectrum);
  spectrum->add_option("--operator", spectrum_args.op, "lk (smallest of L+K) or mod (largest of M)")
      ->check(CLI::IsMember({"lk", "mod"}))->capture_default_str();
  spectrum->add_option("--k", spectrum_args.k, "Number of eigenpairs")->required();
  spectrum->add_option("--eig-tol", spectrum_args.eig_tol, "Relative residual tolerance")->capture_default_str();
  spectrum->add_option("--krylov-factor", spectrum_args.krylov_factor, "Lanczos subspace multiple of k")->capture_default_str();
  spectrum->add_option("--seed", spectrum_args.seed, "Start-vector seed")->capture_default_str();
  spectrum->add_option("--basis-cache", spectrum_args.basis_cache, "Write the basis here");
  spectrum->add_option("--out", spectrum_args.out, "Write the eigenvalue table here");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive maximum modularity for tiny networks");
  oracle_args.net.add_to(oracle);
  oracle->add_option("--nc", oracle_args.nc, "Maximum number of communities")->required();
  oracle->add_option("--out", oracle_args.out, "Write the optimal partition here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (detect->parsed()) return cmd_detect(detect_args, out);
    if (grid->parsed()) return cmd_grid(grid_args, out);
    if (eval->parsed()) return cmd_eval(eval_args, out);
    if (spectrum->parsed()) return cmd_spectrum(spectrum_args, out);
    if (oracle->parsed()) return cmd_oracle(oracle_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace mxcd::cli
