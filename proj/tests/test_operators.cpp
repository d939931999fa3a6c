#include "support.hpp"

#include <gtest/gtest.h>

using namespace mxcd;
using namespace mxcd::testing;

namespace {

double rel_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST(SupraAdjacency, TinyExample) {
  const auto net = tiny_two_layer();
  const auto op = supra_adjacency_op(net);
  EXPECT_EQ(op.apply((Vector(4) << 1, 0, 0, 0).finished()), (Vector(4) << 0, 1, 1, 0).finished());
}

TEST(SupraAdjacency, OnesGiveDegrees) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_network(rng);
    const auto deg = compute_degrees(net);
    const Vector y = supra_adjacency_op(net).apply(Vector::Ones(net.size()));
    EXPECT_LT((y - deg.supra_degrees).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SupraAdjacency, ZeroOmegaIsBlockDiagonal) {
  std::mt19937_64 rng(2);
  const auto base = random_network(rng, {.max_layers = 3});
  const MultiplexNetwork net(base.nodes(), base.layers(), base.coupling(), 0.0);
  const Vector x = Vector::Random(net.size());
  const Vector y = supra_adjacency_op(net).apply(x);
  const Index n = net.nodes();
  for (Index l = 0; l < net.num_layers(); ++l)
    EXPECT_LT((y.segment(l * n, n) - net.layer(l) * x.segment(l * n, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SupraLaplacian, TinyExample) {
  const auto net = tiny_two_layer();
  const auto deg = compute_degrees(net);
  Matrix dense(4, 4);
  dense << 2, -1, -1, 0,  //
      -1, 2, 0, -1,       //
      -1, 0, 1, 0,        //
      0, -1, 0, 1;
  const Vector x = (Vector(4) << 1, -1, 0, 0).finished();
  EXPECT_EQ(supra_laplacian_op(net, deg).apply(x), dense * x);
  EXPECT_EQ(supra_laplacian_op(net, deg).to_dense(), dense);
}

TEST(SupraLaplacian, NullVectorAndPositiveSemidefinite) {
  std::mt19937_64 rng(3);
  const auto net = random_network(rng);
  const auto deg = compute_degrees(net);
  const auto op = supra_laplacian_op(net, deg);
  EXPECT_LT(op.apply(Vector::Ones(net.size())).cwiseAbs().maxCoeff(), 1e-12);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 1000; ++i) {
    Vector x(net.size());
    for (auto& v : x) v = normal(rng);
    EXPECT_GE(x.dot(op.apply(x)), -1e-12 * x.squaredNorm());
  }
}

TEST(BalanceK, HandExample) {
  const auto net = make_network(2, {{{0, 1, 1}}}, 0.0);
  const auto deg = compute_degrees(net);
  const auto op = balance_K_op(deg, {1.0});
  EXPECT_EQ(op.to_dense(), Matrix::Ones(2, 2));
  EXPECT_EQ(op.apply((Vector(2) << 1, 0).finished()), Vector::Ones(2));
}

TEST(BalanceK, NullSpaceAndDegreeEigenvector) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = random_network(rng);
    const auto deg = compute_degrees(net);
    const auto gamma = random_gamma(rng, net.num_layers());
    const auto op = balance_K_op(deg, gamma);
    const Index n = net.nodes();

    Vector x = Vector::Random(net.size());
    for (Index l = 0; l < net.num_layers(); ++l) {
      const Vector& d = deg.intra_degrees[l];
      if (d.squaredNorm() > 0) x.segment(l * n, n) -= d * (d.dot(x.segment(l * n, n)) / d.squaredNorm());
    }
    EXPECT_LT(op.apply(x).cwiseAbs().maxCoeff(), 1e-12);

    Vector stacked(net.size());
    for (Index l = 0; l < net.num_layers(); ++l) stacked.segment(l * n, n) = deg.intra_degrees[l];
    const Vector y = op.apply(stacked);
    for (Index l = 0; l < net.num_layers(); ++l) {
      const Vector& d = deg.intra_degrees[l];
      if (deg.empty_layer(l)) {
        EXPECT_EQ(y.segment(l * n, n).cwiseAbs().maxCoeff(), 0.0);
        continue;
      }
      const double lambda = gamma[l] / (deg.layer_strengths[l] / 2.0) * d.squaredNorm();
      EXPECT_LT((y.segment(l * n, n) - lambda * d).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, lambda));
    }
  }
}

TEST(BalanceK, RankAtMostNumberOfLayers) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = random_network(rng);
    const auto deg = compute_degrees(net);
    const Matrix k = balance_K_op(deg, random_gamma(rng, net.num_layers())).to_dense();
    const auto sv = Eigen::JacobiSVD<Matrix>(k).singularValues();
    const double cutoff = 1e-10 * std::max(sv(0), 1e-300);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff;
    EXPECT_LE(rank, net.num_layers());
  }
}

TEST(Modularity, OnesAtUnitResolutionLeaveOnlyCoupling) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = random_network(rng);
    const auto deg = compute_degrees(net);
    const Vector y = modularity_M_op(net, deg, std::vector<double>(net.num_layers(), 1.0)).apply(Vector::Ones(net.size()));
    const Vector coupling_rows = net.omega() * net.coupling().rowwise().sum();
    const Index n = net.nodes();
    for (Index l = 0; l < net.num_layers(); ++l) {
      // Empty layers have no null model, so A^(l) 1 = 0 remains.
      EXPECT_LT((y.segment(l * n, n).array() - coupling_rows(l)).abs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Modularity, TwoTrianglesDense) {
  const auto net = two_triangles();
  const auto deg = compute_degrees(net);
  const Matrix a(net.layer(0));
  const Vector d = a.rowwise().sum();
  const Matrix expected = a - d * d.transpose() / d.sum();
  EXPECT_LT((modularity_M_op(net, deg, {1.0}).to_dense() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operators, DenseReconstructionMatchesDefinitions) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto net = random_network(rng);
    const auto deg = compute_degrees(net);
    const auto gamma = random_gamma(rng, net.num_layers());
    const DenseModel dm = dense_model(net, gamma);
    EXPECT_LT(rel_error(supra_adjacency_op(net).to_dense(), dm.adjacency), 1e-12);
    EXPECT_LT(rel_error(supra_laplacian_op(net, deg).to_dense(), dm.laplacian), 1e-12);
    EXPECT_LT(rel_error(balance_K_op(deg, gamma).to_dense(), dm.k), 1e-12);
    EXPECT_LT(rel_error(modularity_M_op(net, deg, gamma).to_dense(), dm.m), 1e-12);
    const auto shifted = shifted_neg_LK_op(net, deg, gamma);
    const Matrix expected = shifted.shift * Matrix::Identity(net.size(), net.size()) - dm.laplacian - dm.k;
    EXPECT_LT(rel_error(shifted.op.to_dense(), expected), 1e-12);
  }
}

TEST(Operators, LinearAndSymmetric) {
  std::mt19937_64 rng(8);
  const auto net = random_network(rng);
  const auto deg = compute_degrees(net);
  const auto gamma = random_gamma(rng, net.num_layers());
  const std::vector<LinearOperator> ops{supra_adjacency_op(net), supra_laplacian_op(net, deg), balance_K_op(deg, gamma),
                                        modularity_M_op(net, deg, gamma), shifted_neg_LK_op(net, deg, gamma).op};
  for (const auto& op : ops) {
    const Vector x = Vector::Random(op.dim());
    const Vector y = Vector::Random(op.dim());
    const double scale = 1.0 + op.apply(x).norm() + op.apply(y).norm();
    EXPECT_NEAR(x.dot(op.apply(y)), y.dot(op.apply(x)), 1e-12 * scale) << to_string(op.kind());
    const Vector lin = op.apply(Vector(2.0 * x - 3.0 * y));
    EXPECT_LT((lin - 2.0 * op.apply(x) + 3.0 * op.apply(y)).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_TRUE(op.symmetric());
  }
  EXPECT_THROW(ops[0].apply(Vector::Zero(net.size() + 1)), std::invalid_argument);
}

TEST(Shifted, SpectrumInsideZeroSigma) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_network(rng);
    const auto deg = compute_degrees(net);
    const auto shifted = shifted_neg_LK_op(net, deg, random_gamma(rng, net.num_layers()));
    const Vector ev = dense_eigen(shifted.op.to_dense()).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-10 * shifted.shift);
    EXPECT_LE(ev.maxCoeff(), shifted.shift * (1 + 1e-12));
  }
}

TEST(Shifted, PureLaplacianTopEigenvalueIsSigma) {
  const auto net = make_network(3, {{{0, 1, 1}, {1, 2, 1}}}, 0.0);
  const auto deg = compute_degrees(net);
  const auto shifted = shifted_neg_LK_op(net, deg, {});
  const Vector ev = dense_eigen(shifted.op.to_dense()).eigenvalues();
  EXPECT_NEAR(ev.maxCoeff(), shifted.shift, 1e-12);
  // P3: L has eigenvalues {0, 1, 3}.
  Vector recovered = (shifted.shift - ev.array()).matrix();
  std::sort(recovered.begin(), recovered.end());
  EXPECT_NEAR(recovered(0), 0.0, 1e-10);
  EXPECT_NEAR(recovered(1), 1.0, 1e-10);
  EXPECT_NEAR(recovered(2), 3.0, 1e-10);
}
