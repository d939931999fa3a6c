#pragma once

#include "mxcd/mxcd.hpp"

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace mxcd::testing {

inline std::string data_path(const std::string& name) { return std::string(MXCD_DATA_DIR) + "/" + name; }

// Fresh scratch directory per call site name, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("mxcd_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline MultiplexNetwork make_network(Index n, const std::vector<std::vector<Edge>>& layers, double omega,
                                     Matrix coupling = Matrix()) {
  std::vector<SparseMatrix> mats;
  for (const auto& e : layers) mats.push_back(symmetric_layer(n, e));
  if (coupling.size() == 0) coupling = MultiplexNetwork::all_to_all_coupling(static_cast<Index>(layers.size()));
  return MultiplexNetwork(n, std::move(mats), std::move(coupling), omega);
}

// Single layer: triangles {0,1,2} and {3,4,5}, no edges between them.
inline MultiplexNetwork two_triangles() {
  return make_network(6, {{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}}}, 0.0);
}

// The 2-node, 2-layer example: one edge in layer 1, layer 2 empty, omega 1.
inline MultiplexNetwork tiny_two_layer() { return make_network(2, {{{0, 1, 1}}, {}}, 1.0); }

struct RandomSpec {
  Index max_nodes{20};
  Index max_layers{3};
  double edge_prob{0.3};
  bool integer_weights{false};
};

// Random undirected multiplex with random weights and omega in {0, 0.5, 1}.
template <class Rng>
MultiplexNetwork random_network(Rng& rng, const RandomSpec& spec = {}) {
  std::uniform_int_distribution<Index> pick_n(2, spec.max_nodes);
  std::uniform_int_distribution<Index> pick_l(1, spec.max_layers);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_w(1, 4);
  const Index n = pick_n(rng);
  const Index num = pick_l(rng);
  std::vector<std::vector<Edge>> layers(static_cast<std::size_t>(num));
  for (auto& edges : layers)
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (unit(rng) < spec.edge_prob)
          edges.push_back({i, j, spec.integer_weights ? double(pick_w(rng)) : 0.1 + 2.0 * unit(rng)});
  // Guarantee a positive total strength.
  if (std::all_of(layers.begin(), layers.end(), [](const auto& e) { return e.empty(); }))
    layers[0].push_back({0, 1, 1.0});
  const double omegas[] = {0.0, 0.5, 1.0};
  return make_network(n, layers, omegas[std::uniform_int_distribution<int>(0, 2)(rng)]);
}

template <class Rng>
std::vector<double> random_gamma(Rng& rng, Index num_layers) {
  std::uniform_real_distribution<double> g(0.3, 2.0);
  std::vector<double> out(static_cast<std::size_t>(num_layers));
  for (auto& v : out) v = g(rng);
  return out;
}

template <class Rng>
Partition random_partition(Rng& rng, Index size, Index num_communities) {
  std::uniform_int_distribution<Index> pick(0, num_communities - 1);
  std::vector<Index> labels(static_cast<std::size_t>(size));
  for (auto& c : labels) c = pick(rng);
  return Partition(std::move(labels), num_communities);
}

// Dense matrices assembled entry by entry from the definitions, without the
// operator code.
struct DenseModel {
  Matrix adjacency;  // supra-adjacency
  Vector degrees;
  double two_mu{0.0};
  Matrix laplacian;
  Matrix k;  // blkdiag (gamma/m) d d^T
  Matrix m;  // A - blkdiag (gamma/2m) d d^T
};

inline DenseModel dense_model(const MultiplexNetwork& net, const std::vector<double>& gamma) {
  const Index n = net.nodes();
  const Index num = net.num_layers();
  const Index size = n * num;
  DenseModel out;
  out.adjacency = Matrix::Zero(size, size);
  for (Index l = 0; l < num; ++l) out.adjacency.block(l * n, l * n, n, n) = Matrix(net.layer(l));
  for (Index a = 0; a < num; ++a)
    for (Index b = 0; b < num; ++b)
      for (Index j = 0; j < n; ++j) out.adjacency(a * n + j, b * n + j) += net.omega() * net.coupling()(a, b);
  out.degrees = out.adjacency.rowwise().sum();
  out.two_mu = out.degrees.sum();
  out.laplacian = Matrix(out.degrees.asDiagonal()) - out.adjacency;
  out.k = Matrix::Zero(size, size);
  out.m = out.adjacency;
  for (Index l = 0; l < num; ++l) {
    const Matrix block = Matrix(net.layer(l));
    const Vector d = block.rowwise().sum();
    const double two_m = d.sum();
    if (two_m == 0.0 || gamma.empty()) continue;
    const double g = gamma[static_cast<std::size_t>(l)];
    out.k.block(l * n, l * n, n, n) = (g / (two_m / 2.0)) * d * d.transpose();
    out.m.block(l * n, l * n, n, n) -= (g / two_m) * d * d.transpose();
  }
  return out;
}

// Q from the double sum of the definition over all pairs of node-layer pairs.
inline double dense_modularity(const DenseModel& dm, const Partition& p) {
  double total = 0.0;
  for (Index a = 0; a < p.size(); ++a)
    for (Index b = 0; b < p.size(); ++b)
      if (p[a] == p[b]) total += dm.m(a, b);
  return total / dm.two_mu;
}

// Ascending eigenvalues/eigenvectors of a dense symmetric matrix.
inline Eigen::SelfAdjointEigenSolver<Matrix> dense_eigen(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a);
}

// ||(I - B B^T) A||_F for orthonormal A, B; zero iff span(A) lies in span(B).
inline double spectral_radius(const Matrix& a) { return dense_eigen(a).eigenvalues().cwiseAbs().maxCoeff(); }

inline double subspace_distance(const Matrix& a, const Matrix& b) {
  const Matrix proj = a - b * (b.transpose() * a);
  return proj.norm();
}

}  // namespace mxcd::testing
