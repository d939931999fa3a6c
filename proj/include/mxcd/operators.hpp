#pragma once

#include "mxcd/network.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace mxcd {

enum class OperatorKind { supra_adjacency, supra_laplacian, balance_K, neg_L_plus_K_shifted, modularity_M };

inline std::string_view to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::supra_adjacency: return "supra_adjacency";
    case OperatorKind::supra_laplacian: return "supra_laplacian";
    case OperatorKind::balance_K: return "balance_K";
    case OperatorKind::neg_L_plus_K_shifted: return "neg_L_plus_K_shifted";
    case OperatorKind::modularity_M: return "modularity_M";
  }
  return "unknown";
}

/// Symmetric matrix-free operator on vectors of length nL. Immutable; apply()
/// may be called concurrently.
class LinearOperator {
 public:
  using Kernel = std::function<void(const Eigen::Ref<const Vector>&, Eigen::Ref<Vector>)>;

  LinearOperator(Index dim, OperatorKind kind, Kernel kernel)
      : dim_(dim), kind_(kind), kernel_(std::move(kernel)) {}

  Index dim() const { return dim_; }
  OperatorKind kind() const { return kind_; }
  bool symmetric() const { return true; }

  void apply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const {
    if (x.size() != dim_ || y.size() != dim_) throw std::invalid_argument("operator dimension mismatch");
    kernel_(x, y);
  }

  Vector apply(const Eigen::Ref<const Vector>& x) const {
    Vector y(dim_);
    apply(x, y);
    return y;
  }

  /// Column-wise product with a block of vectors.
  Matrix apply_block(const Matrix& x) const {
    if (x.rows() != dim_) throw std::invalid_argument("operator dimension mismatch");
    Matrix y(dim_, x.cols());
    for (Index c = 0; c < x.cols(); ++c) {
      Eigen::Ref<Vector> col = y.col(c);
      kernel_(x.col(c), col);
    }
    return y;
  }

  Matrix to_dense() const { return apply_block(Matrix::Identity(dim_, dim_)); }

 private:
  Index dim_;
  OperatorKind kind_;
  Kernel kernel_;
};

namespace detail {

struct OperatorData {
  MultiplexNetwork net;
  DegreeData deg;
  std::vector<double> layer_weight;  // gamma / 2m per layer, 0 for empty layers
};

// y = A x for the supra-adjacency; the coupling part omega (C ⊗ I) x is
// applied block by block.
inline void supra_adjacency_apply(const MultiplexNetwork& net, const Eigen::Ref<const Vector>& x,
                                  Eigen::Ref<Vector> y) {
  const Index n = net.nodes();
  const Index num = net.num_layers();
  for (Index l = 0; l < num; ++l) y.segment(l * n, n).noalias() = net.layer(l) * x.segment(l * n, n);
  if (net.omega() == 0.0) return;
  for (Index k = 0; k < num; ++k)
    for (Index l = 0; l < num; ++l) {
      const double c = net.omega() * net.coupling()(k, l);
      if (c != 0.0) y.segment(k * n, n) += c * x.segment(l * n, n);
    }
}

// y += scale * sum_l w_l d^(l) (d^(l)^T x^(l)), one inner product per layer.
inline void add_rank_one_blocks(const DegreeData& deg, const std::vector<double>& w, double scale,
                                const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (w[l] == 0.0) continue;
    const Vector& d = deg.intra_degrees[l];
    const Index n = d.size();
    const Index off = static_cast<Index>(l) * n;
    const double ip = d.dot(x.segment(off, n));
    y.segment(off, n) += (scale * w[l] * ip) * d;
  }
}

inline std::shared_ptr<const OperatorData> make_data(const MultiplexNetwork& net, const DegreeData& deg,
                                                     const std::vector<double>& gamma) {
  auto data = std::make_shared<OperatorData>(OperatorData{net, deg, {}});
  data->layer_weight = gamma.empty() ? std::vector<double>(deg.layer_strengths.size(), 0.0)
                                     : null_model_weights(deg, gamma);
  return data;
}

}  // namespace detail

/// Supra-adjacency A = blkdiag(A^(l)) + omega (C ⊗ I).
inline LinearOperator supra_adjacency_op(const MultiplexNetwork& net) {
  auto data = std::make_shared<const MultiplexNetwork>(net);
  return LinearOperator(net.size(), OperatorKind::supra_adjacency,
                        [data](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
                          detail::supra_adjacency_apply(*data, x, y);
                        });
}

/// Supra-Laplacian L = diag(d) - A.
inline LinearOperator supra_laplacian_op(const MultiplexNetwork& net, const DegreeData& deg) {
  if (deg.supra_degrees.size() != net.size()) throw std::invalid_argument("degrees do not match network");
  auto data = detail::make_data(net, deg, {});
  return LinearOperator(net.size(), OperatorKind::supra_laplacian,
                        [data](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
                          detail::supra_adjacency_apply(data->net, x, y);
                          y = data->deg.supra_degrees.cwiseProduct(x) - y;
                        });
}

/// Balance operator K = blkdiag((gamma^(l) / m^(l)) d^(l) d^(l)^T), never formed densely.
inline LinearOperator balance_K_op(const DegreeData& deg, const std::vector<double>& gamma) {
  auto w = std::make_shared<const std::vector<double>>(null_model_weights(deg, gamma));
  auto d = std::make_shared<const DegreeData>(deg);
  return LinearOperator(deg.supra_degrees.size(), OperatorKind::balance_K,
                        [w, d](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
                          y.setZero();
                          // gamma / m = 2 * gamma / 2m
                          detail::add_rank_one_blocks(*d, *w, 2.0, x, y);
                        });
}

/// Multiplex modularity matrix M: diagonal blocks A^(l) - (gamma^(l) / 2m^(l)) d^(l) d^(l)^T,
/// off-diagonal blocks omega * C(k, l) * I.
inline LinearOperator modularity_M_op(const MultiplexNetwork& net, const DegreeData& deg,
                                      const std::vector<double>& gamma) {
  auto data = detail::make_data(net, deg, gamma);
  return LinearOperator(net.size(), OperatorKind::modularity_M,
                        [data](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
                          detail::supra_adjacency_apply(data->net, x, y);
                          detail::add_rank_one_blocks(data->deg, data->layer_weight, -1.0, x, y);
                        });
}

/// Gershgorin bound on the largest eigenvalue of L + K: the largest absolute
/// row sum, 2 d_(j,l) + 2 gamma^(l) d^(l)_j.
inline double gershgorin_shift(const MultiplexNetwork& net, const DegreeData& deg,
                               const std::vector<double>& gamma) {
  const auto w = gamma.empty() ? std::vector<double>(deg.layer_strengths.size(), 0.0)
                               : null_model_weights(deg, gamma);
  const Index n = net.nodes();
  double sigma = 0.0;
  for (Index l = 0; l < net.num_layers(); ++l) {
    const double g = w[static_cast<std::size_t>(l)] == 0.0 ? 0.0 : gamma[static_cast<std::size_t>(l)];
    for (Index j = 0; j < n; ++j)
      sigma = std::max(sigma, 2.0 * deg.supra_degrees(l * n + j) +
                                  2.0 * g * deg.intra_degrees[static_cast<std::size_t>(l)](j));
  }
  return sigma;
}

struct ShiftedOperator {
  LinearOperator op;
  double shift;
};

/// sigma I - (L + K). Its largest eigenvalues theta_i give the smallest
/// eigenvalues sigma - theta_i of L + K with the same eigenvectors. An empty
/// gamma yields the pure Laplacian (K = 0).
inline ShiftedOperator shifted_neg_LK_op(const MultiplexNetwork& net, const DegreeData& deg,
                                         const std::vector<double>& gamma) {
  if (deg.supra_degrees.size() != net.size()) throw std::invalid_argument("degrees do not match network");
  auto data = detail::make_data(net, deg, gamma);
  const double sigma = gershgorin_shift(net, deg, gamma);
  LinearOperator op(net.size(), OperatorKind::neg_L_plus_K_shifted,
                    [data, sigma](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
                      // sigma x - (diag(d) x - A x) - K x
                      detail::supra_adjacency_apply(data->net, x, y);
                      y += (sigma - data->deg.supra_degrees.array()).matrix().cwiseProduct(x);
                      detail::add_rank_one_blocks(data->deg, data->layer_weight, -2.0, x, y);
                    });
  return {std::move(op), sigma};
}

}  // namespace mxcd
