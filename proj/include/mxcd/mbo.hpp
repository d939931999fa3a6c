#pragma once

#include "mxcd/lanczos.hpp"
#include "mxcd/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace mxcd {

/// Hyper-parameters of the MBO community detection driver.
struct DetectConfig {
  Method method{Method::mpbtv};
  std::vector<double> gamma;  // one resolution value per layer
  double omega{1.0};
  Index num_communities{2};
  Index k{1};  // spectral truncation
  double dt{1.0};
  Index max_iter{300};
  double tol{1e-8};
  Index n_runs{20};
  std::uint64_t seed{0};
  double eig_tol{1e-8};
  double subspace_factor{2.0};
  unsigned threads{1};
  // Entries of a diffused row within tie_tol * max|V| of the row maximum count
  // as ties. Differences that small are below the accuracy of the eigenpairs.
  double tie_tol{1e-8};

  void validate(Index num_layers) const {
    if (num_communities < 2) throw std::invalid_argument("need at least two communities (n_c >= 2)");
    if (k < 1) throw std::invalid_argument("spectral truncation k must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step dt must be positive");
    if (max_iter < 0) throw std::invalid_argument("max_iter must be non-negative");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (n_runs < 1) throw std::invalid_argument("need at least one run");
    if (!(eig_tol > 0.0)) throw std::invalid_argument("eig_tol must be positive");
    if (!(tie_tol >= 0.0) || !std::isfinite(tie_tol)) throw std::invalid_argument("tie_tol must be non-negative");
    if (static_cast<Index>(gamma.size()) != num_layers)
      throw std::invalid_argument("gamma needs one value per layer");
    for (double g : gamma)
      if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("resolution parameters must be positive");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("omega must be non-negative");
  }
};

struct RunResult {
  Partition partition;
  double modularity{0.0};
  Index iterations{0};
  bool converged{false};
  Index run_index{0};
};

/// Each row an independent uniform draw of one of n_c labels.
template <class Rng>
Partition random_onehot_init(Index size, Index num_communities, Rng& rng) {
  if (num_communities < 2) throw std::invalid_argument("need at least two communities (n_c >= 2)");
  std::uniform_int_distribution<Index> pick(0, num_communities - 1);
  std::vector<Index> labels(static_cast<std::size_t>(size));
  for (auto& c : labels) c = pick(rng);
  return Partition(std::move(labels), num_communities);
}

/// V = Phi exp(dt Lambda) Phi^T U, with Phi^T U formed first.
inline Matrix diffusion_step(const SpectralBasis& basis, double dt, const Matrix& u) {
  if (u.rows() != basis.dim()) throw std::invalid_argument("diffusion: basis and U dimensions differ");
  const Vector decay = (dt * basis.eigenvalues.array()).exp().matrix();
  Matrix coeff = basis.eigenvectors.transpose() * u;
  coeff = decay.asDiagonal() * coeff;
  return basis.eigenvectors * coeff;
}

/// Row-wise argmax; ties go to the smallest community index. With
/// tie_tol > 0, entries within tie_tol * max|V| of the row maximum are ties.
inline Partition threshold(const Matrix& v, double tie_tol = 0.0) {
  if (!v.allFinite()) throw std::domain_error("threshold: non-finite entry");
  const double slack = v.size() ? tie_tol * v.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Index> labels(static_cast<std::size_t>(v.rows()));
  for (Index i = 0; i < v.rows(); ++i) {
    const double top = v.row(i).maxCoeff();
    Index best = 0;
    while (v(i, best) < top - slack) ++best;
    labels[static_cast<std::size_t>(i)] = best;
  }
  return Partition(std::move(labels), v.cols());
}

namespace detail {

// Diffusion used inside the iteration. Weights are divided by
// exp(dt * lambda_max): a positive row scale leaves the argmax unchanged and
// keeps large modularity eigenvalues from overflowing.
struct Diffuser {
  const SpectralBasis& basis;
  Vector weights;

  Diffuser(const SpectralBasis& b, double dt) : basis(b) {
    const double top = b.eigenvalues.size() ? b.eigenvalues.maxCoeff() : 0.0;
    weights = (dt * (b.eigenvalues.array() - top)).exp().matrix();
  }

  Matrix operator()(const Matrix& u) const {
    Matrix coeff = basis.eigenvectors.transpose() * u;
    coeff = weights.asDiagonal() * coeff;
    return basis.eigenvectors * coeff;
  }
};

}  // namespace detail

/// One MBO trajectory from u0: diffuse, threshold, stop once no row changes
/// (Frobenius distance below tol) or after max_iter iterations.
inline RunResult mbo_run(const SpectralBasis& basis, const DetectConfig& config, const Partition& u0,
                         const LinearOperator& modularity, double total_strength) {
  if (u0.size() != basis.dim()) throw std::invalid_argument("mbo_run: initial partition has wrong size");
  const detail::Diffuser diffuse(basis, config.dt);
  RunResult r;
  r.partition = u0;
  for (Index it = 1; it <= config.max_iter; ++it) {
    Partition next = threshold(diffuse(r.partition.onehot()), config.tie_tol);
    // ||U_j - U_{j-1}||_F = sqrt(2 * changed rows) for one-hot matrices.
    Index changed = 0;
    for (Index i = 0; i < next.size(); ++i) changed += next[i] != r.partition[i];
    r.partition = std::move(next);
    r.iterations = it;
    if (std::sqrt(2.0 * static_cast<double>(changed)) < config.tol) {
      r.converged = true;
      break;
    }
  }
  r.modularity = multiplex_modularity(r.partition, modularity, total_strength);
  return r;
}

inline RunResult mbo_run(const SpectralBasis& basis, const DetectConfig& config, const Partition& u0,
                         const MultiplexNetwork& net, const DegreeData& deg) {
  return mbo_run(basis, config, u0, modularity_M_op(net, deg, config.gamma), deg.total_strength);
}

struct DetectResult {
  RunResult best;
  std::vector<double> run_modularity;
  std::vector<Index> run_iterations;
  std::vector<bool> run_converged;
  double offline_seconds{0.0};
  double runs_seconds{0.0};
};

/// Per-run generator, seeded from seed XOR run index so each run is
/// reproducible on its own regardless of scheduling.
inline std::mt19937_64 run_generator(std::uint64_t seed, Index run_index) {
  return std::mt19937_64(seed ^ static_cast<std::uint64_t>(run_index));
}

/// Runs config.n_runs MBO trajectories against a precomputed basis and keeps
/// the one with the highest modularity (ties: lowest run index). Results do not
/// depend on config.threads.
inline DetectResult detect_with_basis(const SpectralBasis& basis, const MultiplexNetwork& net,
                                      const DegreeData& deg, const DetectConfig& config) {
  config.validate(net.num_layers());
  if (basis.dim() != net.size()) throw std::invalid_argument("basis does not match network size");
  if (basis.size() < config.k) throw std::invalid_argument("basis has fewer than k eigenpairs");
  const SpectralBasis used = basis.size() == config.k ? basis : basis.truncated(config.k);
  const LinearOperator modularity = modularity_M_op(net, deg, config.gamma);

  std::vector<RunResult> runs(static_cast<std::size_t>(config.n_runs));
  auto work = [&](Index first, Index stride) {
    for (Index r = first; r < config.n_runs; r += stride) {
      auto rng = run_generator(config.seed, r);
      const Partition u0 = random_onehot_init(net.size(), config.num_communities, rng);
      runs[static_cast<std::size_t>(r)] = mbo_run(used, config, u0, modularity, deg.total_strength);
      runs[static_cast<std::size_t>(r)].run_index = r;
    }
  };

  const auto start = std::chrono::steady_clock::now();
  const Index workers = std::clamp<Index>(static_cast<Index>(config.threads), 1, config.n_runs);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (Index t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
    for (auto& th : pool) th.join();
  }
  const auto stop = std::chrono::steady_clock::now();

  DetectResult out;
  out.runs_seconds = std::chrono::duration<double>(stop - start).count();
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.run_modularity.push_back(runs[r].modularity);
    out.run_iterations.push_back(runs[r].iterations);
    out.run_converged.push_back(runs[r].converged);
    if (runs[r].modularity > runs[best].modularity) best = r;
  }
  out.best = runs[best];
  return out;
}

/// Computes the method's spectral basis once, then runs the MBO scheme from
/// n_runs random initial partitions.
inline DetectResult detect(const MultiplexNetwork& net, const DegreeData& deg, const DetectConfig& config) {
  config.validate(net.num_layers());
  const auto start = std::chrono::steady_clock::now();
  const SpectralBasis basis =
      basis_for_method(config.method, net, deg, config.gamma, config.k, config.eig_tol, config.seed,
                       config.subspace_factor);
  const double offline = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  DetectResult out = detect_with_basis(basis, net, deg, config);
  out.offline_seconds = offline;
  return out;
}

}  // namespace mxcd
