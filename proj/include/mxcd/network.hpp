#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mxcd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Undirected weighted edge inside one layer, 0-based node ids.
struct Edge {
  Index u{0};
  Index v{0};
  double weight{1.0};
};

// Builds a canonical symmetric layer matrix. Duplicate edges are summed on the
// unordered pair before mirroring, so A(u,v) and A(v,u) are bit-identical.
inline SparseMatrix symmetric_layer(Index n, const std::vector<Edge>& edges) {
  std::map<std::pair<Index, Index>, double> acc;
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw std::out_of_range("edge endpoint out of range");
    if (!std::isfinite(e.weight) || e.weight < 0.0)
      throw std::invalid_argument("edge weight must be finite and non-negative");
    acc[{std::min(e.u, e.v), std::max(e.u, e.v)}] += e.weight;
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * acc.size());
  for (const auto& [key, w] : acc) {
    if (w == 0.0) continue;
    trips.emplace_back(key.first, key.second, w);
    if (key.first != key.second) trips.emplace_back(key.second, key.first, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

/// Node-aligned multiplex network: L sparse symmetric intra-layer adjacency
/// matrices over the same n physical nodes, plus diagonal inter-layer coupling
/// omega * coupling(k, l) * I between every pair of layers.
///
/// Node-layer pair (j, l) maps to supra row l * n + j (0-based). The supra
/// adjacency matrix itself is never assembled; see operators.hpp.
class MultiplexNetwork {
 public:
  MultiplexNetwork(Index n, std::vector<SparseMatrix> layers, Matrix coupling, double omega)
      : n_(n), layers_(std::move(layers)), coupling_(std::move(coupling)), omega_(omega) {
    validate();
  }

  /// Coupling matrix 11^T - I (every layer coupled to every other).
  static Matrix all_to_all_coupling(Index num_layers) {
    Matrix c = Matrix::Ones(num_layers, num_layers);
    c.diagonal().setZero();
    return c;
  }

  Index nodes() const { return n_; }
  Index num_layers() const { return static_cast<Index>(layers_.size()); }
  Index size() const { return n_ * num_layers(); }
  const SparseMatrix& layer(Index l) const { return layers_[static_cast<std::size_t>(l)]; }
  const std::vector<SparseMatrix>& layers() const { return layers_; }
  const Matrix& coupling() const { return coupling_; }
  double omega() const { return omega_; }

  Index pair_index(Index node, Index layer) const { return layer * n_ + node; }

 private:
  void validate() const {
    if (n_ < 0) throw std::invalid_argument("negative node count");
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
    const Index num = num_layers();
    if (!std::isfinite(omega_) || omega_ < 0.0)
      throw std::invalid_argument("omega must be finite and non-negative");
    if (coupling_.rows() != num || coupling_.cols() != num)
      throw std::invalid_argument("coupling matrix must be L x L");
    for (Index k = 0; k < num; ++k) {
      if (coupling_(k, k) != 0.0)
        throw std::invalid_argument("coupling matrix must have a zero diagonal");
      for (Index l = 0; l < num; ++l) {
        const double c = coupling_(k, l);
        if (!std::isfinite(c) || c < 0.0)
          throw std::invalid_argument("coupling entries must be finite and non-negative");
        if (c != coupling_(l, k)) throw std::invalid_argument("coupling matrix must be symmetric");
      }
    }
    for (const auto& a : layers_) {
      if (a.rows() != n_ || a.cols() != n_) throw std::invalid_argument("layer must be n x n");
      for (Index col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
          if (!std::isfinite(it.value()) || it.value() < 0.0)
            throw std::invalid_argument("layer weights must be finite and non-negative");
          if (a.coeff(it.col(), it.row()) != it.value())
            throw std::invalid_argument("layer matrix must be exactly symmetric");
        }
      }
    }
  }

  Index n_;
  std::vector<SparseMatrix> layers_;
  Matrix coupling_;
  double omega_;
};

/// Per-layer and supra degrees. Layers with zero strength are flagged via
/// layer_strengths == 0; every gamma / 2m term for them is taken as 0.
struct DegreeData {
  std::vector<Vector> intra_degrees;  // d^(l) = A^(l) 1
  std::vector<double> layer_strengths;  // 2m^(l) = 1^T d^(l)
  Vector supra_degrees;  // d = A 1, length nL
  double total_strength{0.0};  // 2 mu = 1^T A 1

  bool empty_layer(Index l) const { return layer_strengths[static_cast<std::size_t>(l)] == 0.0; }
};

inline DegreeData compute_degrees(const MultiplexNetwork& net) {
  const Index n = net.nodes();
  const Index num = net.num_layers();
  DegreeData deg;
  deg.supra_degrees.resize(net.size());
  const Vector coupling_rows = net.coupling().rowwise().sum();
  for (Index l = 0; l < num; ++l) {
    // Column sums equal row sums for a symmetric matrix; a self-loop counts once.
    Vector d = Vector::Zero(n);
    const SparseMatrix& a = net.layer(l);
    for (Index col = 0; col < a.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(a, col); it; ++it) d(it.row()) += it.value();
    deg.layer_strengths.push_back(d.sum());
    deg.supra_degrees.segment(l * n, n) = d.array() + net.omega() * coupling_rows(l);
    deg.intra_degrees.push_back(std::move(d));
  }
  deg.total_strength = deg.supra_degrees.sum();
  return deg;
}

/// Null-model weights gamma^(l) / 2m^(l), zero for empty layers.
inline std::vector<double> null_model_weights(const DegreeData& deg, const std::vector<double>& gamma) {
  if (gamma.size() != deg.layer_strengths.size())
    throw std::invalid_argument("gamma needs one value per layer");
  std::vector<double> w(gamma.size(), 0.0);
  for (std::size_t l = 0; l < gamma.size(); ++l) {
    if (!std::isfinite(gamma[l]) || gamma[l] < 0.0)
      throw std::invalid_argument("resolution parameters must be finite and non-negative");
    if (deg.layer_strengths[l] > 0.0) w[l] = gamma[l] / deg.layer_strengths[l];
  }
  return w;
}

/// Non-overlapping assignment of all nL node-layer pairs to communities
/// 0..n_c-1. Empty communities are allowed.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<Index> labels, Index num_communities)
      : labels_(std::move(labels)), num_communities_(num_communities) {
    if (num_communities_ < 1 && !labels_.empty())
      throw std::invalid_argument("partition needs at least one community");
    for (Index c : labels_)
      if (c < 0 || c >= num_communities_) throw std::out_of_range("community label out of range");
  }

  /// Takes n_c as one past the largest label.
  static Partition from_labels(std::vector<Index> labels) {
    Index nc = 0;
    for (Index c : labels) nc = std::max(nc, c + 1);
    return Partition(std::move(labels), nc);
  }

  Index size() const { return static_cast<Index>(labels_.size()); }
  Index num_communities() const { return num_communities_; }
  Index operator[](Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& labels() const { return labels_; }

  Index nonempty_communities() const {
    std::vector<bool> seen(static_cast<std::size_t>(num_communities_), false);
    Index count = 0;
    for (Index c : labels_)
      if (!seen[static_cast<std::size_t>(c)]) {
        seen[static_cast<std::size_t>(c)] = true;
        ++count;
      }
    return count;
  }

  std::vector<Index> community_sizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(num_communities_), 0);
    for (Index c : labels_) ++sizes[static_cast<std::size_t>(c)];
    return sizes;
  }

  /// One-hot matrix U (nL x n_c).
  Matrix onehot() const {
    Matrix u = Matrix::Zero(size(), num_communities_);
    for (Index i = 0; i < size(); ++i) u(i, (*this)[i]) = 1.0;
    return u;
  }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.num_communities_ == b.num_communities_ && a.labels_ == b.labels_;
  }

 private:
  std::vector<Index> labels_;
  Index num_communities_{0};
};

}  // namespace mxcd
