#pragma once

#include "mxcd/operators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxcd {

/// k eigenpairs of an operator, eigenvalues sorted descending.
///
/// For the MPBTV operator the stored eigenvalues are those of -(L + K), i.e.
/// already un-shifted, and `shift` records the sigma that was used.
struct SpectralBasis {
  Vector eigenvalues;
  Matrix eigenvectors;  // nL x k, orthonormal columns
  Vector residuals;  // ||A phi_i - lambda_i phi_i||
  OperatorKind operator_kind{OperatorKind::modularity_M};
  double shift{0.0};

  Index size() const { return eigenvalues.size(); }
  Index dim() const { return eigenvectors.rows(); }

  /// Leading `k` pairs. Valid because every pair is converged on its own.
  SpectralBasis truncated(Index k) const {
    if (k < 1 || k > size()) throw std::invalid_argument("cannot truncate basis to k=" + std::to_string(k));
    return {eigenvalues.head(k), eigenvectors.leftCols(k), residuals.head(k), operator_kind, shift};
  }
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Vector best_residuals)
      : std::runtime_error(what), best_residuals_(std::move(best_residuals)) {}
  const Vector& best_residuals() const { return best_residuals_; }

 private:
  Vector best_residuals_;
};

struct LanczosOptions {
  Index k{1};
  double tol{1e-8};
  Index max_restarts{500};
  std::uint64_t seed{0};
  // Working subspace is max(subspace_factor * k, k + min_extra), capped at the dimension.
  double subspace_factor{2.0};
  Index min_extra{15};
  // Residuals are measured against max(spectral radius estimate, scale_hint).
  double scale_hint{0.0};
};

namespace detail {

class ThickRestartLanczos {
 public:
  ThickRestartLanczos(const LinearOperator& op, const LanczosOptions& opt)
      : op_(op), opt_(opt), n_(op.dim()), rng_(opt.seed) {}

  SpectralBasis run() {
    const Index k = opt_.k;
    const Index target = std::max<Index>(static_cast<Index>(std::ceil(opt_.subspace_factor * k)),
                                         k + opt_.min_extra);
    const Index m_total = std::min(target, n_);

    locked_vecs_.resize(n_, 0);
    Matrix v(n_, m_total);
    Matrix h = Matrix::Zero(m_total, m_total);
    Vector f(n_);
    double beta_last = 0.0;

    Index m = m_total;  // active subspace size this cycle
    v.col(0) = random_orthogonal(v, 0);
    Index start = 0;
    bool validating = false;
    Vector best_res = Vector::Constant(k, std::numeric_limits<double>::infinity());

    for (Index restart = 0; restart <= opt_.max_restarts; ++restart) {
      for (Index j = start; j < m; ++j) {
        Vector w = op_.apply(v.col(j));
        const double wnorm = w.norm();
        orthogonalize_locked(w);
        // Two passes of classical Gram-Schmidt against the active basis.
        Vector coeff = v.leftCols(j + 1).transpose() * w;
        w.noalias() -= v.leftCols(j + 1) * coeff;
        Vector again = v.leftCols(j + 1).transpose() * w;
        w.noalias() -= v.leftCols(j + 1) * again;
        coeff += again;
        orthogonalize_locked(w);
        h.col(j).head(j + 1) = coeff;
        h.row(j).head(j + 1) = coeff.transpose();
        const double beta = w.norm();
        const bool breakdown = beta <= 1e-10 * wnorm || beta == 0.0;
        if (j + 1 < m) {
          if (breakdown) {
            v.col(j + 1) = random_orthogonal(v, j + 1);
            h(j + 1, j) = h(j, j + 1) = 0.0;
          } else {
            v.col(j + 1) = w / beta;
            h(j + 1, j) = h(j, j + 1) = beta;
          }
        } else {
          f = breakdown ? Vector::Zero(n_) : w;
          beta_last = breakdown ? 0.0 : beta;
        }
      }

      Eigen::SelfAdjointEigenSolver<Matrix> es(h.topLeftCorner(m, m));
      if (es.info() != Eigen::Success) throw std::runtime_error("projected eigenproblem failed");
      // Descending order.
      const Vector theta = es.eigenvalues().reverse();
      const Matrix y = es.eigenvectors().rowwise().reverse();
      const Vector estimate = (beta_last * y.row(m - 1).transpose()).cwiseAbs();

      // Spectral radius estimate; |lambda_1| alone collapses when the top eigenvalue is 0.
      double radius = std::max(std::abs(theta(0)), std::abs(theta(m - 1)));
      for (double lv : locked_vals_) radius = std::max(radius, std::abs(lv));
      scale_ = std::max(scale_, radius);
      const double scale = std::max({scale_, opt_.scale_hint, std::numeric_limits<double>::min()});
      const double threshold = opt_.tol * scale;

      // Merge locked and active Ritz values; find the active ones inside the top k.
      const Index nlock = static_cast<Index>(locked_vals_.size());
      // Locked plus active vectors span the whole space: Ritz pairs are exact.
      const bool exhausted = nlock + m >= n_;
      std::vector<std::pair<double, Index>> merged;  // (value, index); index < 0 marks locked -(i+1)
      for (Index i = 0; i < nlock; ++i) merged.emplace_back(locked_vals_[static_cast<std::size_t>(i)], -(i + 1));
      for (Index i = 0; i < m; ++i) merged.emplace_back(theta(i), i);
      std::stable_sort(merged.begin(), merged.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      const Index wanted = std::min<Index>(k, static_cast<Index>(merged.size()));

      // Lock converged active pairs within the wanted set, confirming each with
      // its true residual.
      std::vector<bool> newly_locked(static_cast<std::size_t>(m), false);
      bool all_locked = true;
      for (Index r = 0; r < wanted; ++r) {
        const Index idx = merged[static_cast<std::size_t>(r)].second;
        if (idx < 0) {
          best_res(r) = locked_res_[static_cast<std::size_t>(-idx - 1)];
          continue;
        }
        best_res(r) = std::min(best_res(r), estimate(idx));
        if (estimate(idx) > threshold) {
          all_locked = false;
          continue;
        }
        Vector x = v.leftCols(m) * y.col(idx);
        x.normalize();
        const double res = (op_.apply(x) - theta(idx) * x).norm();
        if (res <= threshold) {
          newly_locked[static_cast<std::size_t>(idx)] = true;
          lock(x, theta(idx), res);
        } else {
          all_locked = false;
        }
      }

      const Index nlock_now = static_cast<Index>(locked_vals_.size());
      if (all_locked) {
        // Either the whole space is spanned, or a cycle started from a fresh
        // random vector found nothing new. A validation cycle that did lock
        // something is repeated, since each start vector exposes at most one
        // copy of a repeated eigenvalue.
        if (exhausted || (validating && nlock_now == nlock) || nlock_now >= n_) return finish();
      }
      // A validation cycle restarts from a random direction to expose missed
      // copies of repeated eigenvalues.
      validating = all_locked;

      // Thick restart with the leading unlocked Ritz vectors.
      std::vector<Index> keep;
      for (Index i = 0; i < m; ++i)
        if (!newly_locked[static_cast<std::size_t>(i)]) keep.push_back(i);
      const Index m_next = std::min(m_total, n_ - nlock_now);
      if (m_next < 1) return finish();
      const Index still_wanted = std::max<Index>(0, k - nlock_now);
      Index p = still_wanted + (m_next - still_wanted) / 2;
      p = std::min({p, m_next - 1, static_cast<Index>(keep.size())});
      if (validating) p = 0;

      Matrix kept(n_, p);
      for (Index c = 0; c < p; ++c) kept.col(c) = v.leftCols(m) * y.col(keep[static_cast<std::size_t>(c)]);
      v.resize(n_, m_next);
      h = Matrix::Zero(m_next, m_next);
      for (Index c = 0; c < p; ++c) {
        v.col(c) = kept.col(c);
        h(c, c) = theta(keep[static_cast<std::size_t>(c)]);
      }
      // Re-orthonormalize the kept block against locked vectors (drift is tiny).
      for (Index c = 0; c < p; ++c) {
        Vector col = v.col(c);
        orthogonalize_locked(col);
        col -= v.leftCols(c) * (v.leftCols(c).transpose() * col);
        v.col(c) = col.normalized();
      }
      if (!validating && beta_last > 0.0) {
        Vector next = f / beta_last;
        orthogonalize_locked(next);
        next -= v.leftCols(p) * (v.leftCols(p).transpose() * next);
        const double nn = next.norm();
        if (nn > 1e-8) {
          v.col(p) = next / nn;
          for (Index c = 0; c < p; ++c)
            h(p, c) = h(c, p) = beta_last * y(m - 1, keep[static_cast<std::size_t>(c)]);
        } else {
          v.col(p) = random_orthogonal(v, p);
        }
      } else {
        v.col(p) = random_orthogonal(v, p);
      }
      m = m_next;
      start = p;
    }
    throw ConvergenceError("Lanczos did not converge after " + std::to_string(opt_.max_restarts) +
                               " restarts (best residual " + std::to_string(best_res.maxCoeff()) + ")",
                           best_res);
  }

 private:
  void orthogonalize_locked(Eigen::Ref<Vector> w) const {
    const Index nl = locked_vecs_.cols();
    if (nl == 0) return;
    w.noalias() -= locked_vecs_ * (locked_vecs_.transpose() * w);
  }

  void lock(const Vector& x, double value, double residual) {
    Vector q = x;
    orthogonalize_locked(q);
    q.normalize();
    const Index nl = locked_vecs_.cols();
    locked_vecs_.conservativeResize(n_, nl + 1);
    locked_vecs_.col(nl) = q;
    locked_vals_.push_back(value);
    locked_res_.push_back(residual);
  }

  Vector random_orthogonal(const Matrix& v, Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
      Vector x(n_);
      for (Index i = 0; i < n_; ++i) x(i) = normal(rng_);
      const double x0 = x.norm();
      for (int pass = 0; pass < 2; ++pass) {
        orthogonalize_locked(x);
        if (cols > 0) x -= v.leftCols(cols) * (v.leftCols(cols).transpose() * x);
      }
      const double nx = x.norm();
      if (nx > 1e-6 * x0) return x / nx;
    }
    throw std::runtime_error("could not extend the Krylov basis");
  }

  SpectralBasis finish() {
    const Index k = opt_.k;
    std::vector<Index> order(locked_vals_.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return locked_vals_[static_cast<std::size_t>(a)] > locked_vals_[static_cast<std::size_t>(b)];
    });
    if (static_cast<Index>(order.size()) < k) throw std::runtime_error("Lanczos finished with too few pairs");
    SpectralBasis basis;
    basis.eigenvalues.resize(k);
    basis.eigenvectors.resize(n_, k);
    basis.residuals.resize(k);
    basis.operator_kind = op_.kind();
    for (Index i = 0; i < k; ++i) {
      const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
      basis.eigenvalues(i) = locked_vals_[src];
      basis.eigenvectors.col(i) = locked_vecs_.col(static_cast<Index>(src));
      basis.residuals(i) =
          (op_.apply(basis.eigenvectors.col(i)) - basis.eigenvalues(i) * basis.eigenvectors.col(i)).norm();
    }
    return basis;
  }

  const LinearOperator& op_;
  LanczosOptions opt_;
  Index n_;
  std::mt19937_64 rng_;
  double scale_{0.0};
  Matrix locked_vecs_;
  std::vector<double> locked_vals_;
  std::vector<double> locked_res_;
};

}  // namespace detail

/// The k algebraically largest eigenpairs of a symmetric operator by
/// thick-restart Lanczos with full reorthogonalization and locking.
/// Deterministic for a fixed seed. Throws ConvergenceError after
/// max_restarts restarts.
inline SpectralBasis largest_eigenpairs(const LinearOperator& op, const LanczosOptions& opt) {
  if (opt.k < 1 || opt.k >= op.dim())
    throw std::invalid_argument("need 1 <= k < nL (k=" + std::to_string(opt.k) +
                                ", nL=" + std::to_string(op.dim()) + ")");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("eigensolver tolerance must be positive");
  return detail::ThickRestartLanczos(op, opt).run();
}

enum class Method { mpbtv, dgfm3 };

inline std::string_view to_string(Method m) { return m == Method::mpbtv ? "mpbtv" : "dgfm3"; }

inline Method parse_method(std::string_view s) {
  if (s == "mpbtv") return Method::mpbtv;
  if (s == "dgfm3") return Method::dgfm3;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected mpbtv or dgfm3)");
}

/// Diffusion operator spectrum for a method: the k largest eigenpairs of
/// -(L + K) for MPBTV (through the shifted operator, eigenvalues <= 0), or of
/// the modularity matrix M for DGFM3.
inline SpectralBasis basis_for_method(Method method, const MultiplexNetwork& net, const DegreeData& deg,
                                      const std::vector<double>& gamma, Index k, double tol, std::uint64_t seed,
                                      double subspace_factor = 2.0) {
  LanczosOptions opt;
  opt.k = k;
  opt.tol = tol;
  opt.seed = seed;
  opt.subspace_factor = subspace_factor;
  if (method == Method::mpbtv) {
    auto shifted = shifted_neg_LK_op(net, deg, gamma);
    opt.scale_hint = shifted.shift;
    SpectralBasis basis = largest_eigenpairs(shifted.op, opt);
    basis.eigenvalues.array() -= shifted.shift;
    basis.shift = shifted.shift;
    return basis;
  }
  return largest_eigenpairs(modularity_M_op(net, deg, gamma), opt);
}

}  // namespace mxcd
