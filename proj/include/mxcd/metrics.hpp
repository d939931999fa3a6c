#pragma once

#include "mxcd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mxcd {

/// Q = tr(U^T M U) / 2mu, evaluated with an already-built modularity operator.
inline double multiplex_modularity(const Partition& p, const LinearOperator& modularity, double total_strength) {
  if (!(total_strength > 0.0)) throw std::domain_error("modularity undefined: total strength is zero");
  if (p.size() != modularity.dim()) throw std::invalid_argument("partition size does not match network");
  const Matrix mu = modularity.apply_block(p.onehot());
  double trace = 0.0;
  for (Index i = 0; i < p.size(); ++i) trace += mu(i, p[i]);
  return trace / total_strength;
}

/// Multiplex modularity (trace form) through the matrix-free M operator.
inline double multiplex_modularity(const Partition& p, const MultiplexNetwork& net, const DegreeData& deg,
                                   const std::vector<double>& gamma) {
  if (!(deg.total_strength > 0.0)) throw std::domain_error("modularity undefined: total strength is zero");
  return multiplex_modularity(p, modularity_M_op(net, deg, gamma), deg.total_strength);
}

/// Multiplex modularity from the pairwise definition: same-community intra
/// edges, minus the per-layer Chung-Lu null model, plus same-community
/// inter-layer couplings. Kept as an independent check of the trace form.
inline double multiplex_modularity_sumform(const Partition& p, const MultiplexNetwork& net, const DegreeData& deg,
                                           const std::vector<double>& gamma) {
  if (!(deg.total_strength > 0.0)) throw std::domain_error("modularity undefined: total strength is zero");
  if (p.size() != net.size()) throw std::invalid_argument("partition size does not match network");
  const auto w = null_model_weights(deg, gamma);
  const Index n = net.nodes();
  const Index num = net.num_layers();
  double total = 0.0;
  for (Index l = 0; l < num; ++l) {
    const SparseMatrix& a = net.layer(l);
    double within = 0.0;
    for (Index j = 0; j < a.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(a, j); it; ++it)
        if (p[l * n + it.row()] == p[l * n + j]) within += it.value();
    // sum_{i,j in S_r} d_i d_j = vol(S_r)^2
    double null_model = 0.0;
    if (w[static_cast<std::size_t>(l)] != 0.0) {
      std::vector<double> vol(static_cast<std::size_t>(p.num_communities()), 0.0);
      const Vector& d = deg.intra_degrees[static_cast<std::size_t>(l)];
      for (Index i = 0; i < n; ++i) vol[static_cast<std::size_t>(p[l * n + i])] += d(i);
      for (double v : vol) null_model += v * v;
      null_model *= w[static_cast<std::size_t>(l)];
    }
    total += within - null_model;
  }
  for (Index k = 0; k < num; ++k)
    for (Index l = 0; l < num; ++l) {
      const double c = net.omega() * net.coupling()(k, l);
      if (c == 0.0) continue;
      for (Index j = 0; j < n; ++j)
        if (p[k * n + j] == p[l * n + j]) total += c;
    }
  return total / deg.total_strength;
}

struct BalancedTV {
  double tv{0.0};  // sum_r Cut(S_r, S_r^C) over the supra-adjacency
  double balance{0.0};  // sum_l gamma^(l) / 2m^(l) * ||d^(l)^T U^(l)||^2
};

/// Balanced multiplex total variation. For any partition,
/// Q = 1 - (tv + balance) / 2mu.
inline BalancedTV balanced_tv_objective(const Partition& p, const MultiplexNetwork& net, const DegreeData& deg,
                                        const std::vector<double>& gamma) {
  if (p.size() != net.size()) throw std::invalid_argument("partition size does not match network");
  const auto w = null_model_weights(deg, gamma);
  const Index n = net.nodes();
  const Index num = net.num_layers();
  BalancedTV out;
  for (Index l = 0; l < num; ++l) {
    const SparseMatrix& a = net.layer(l);
    for (Index j = 0; j < a.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(a, j); it; ++it)
        if (p[l * n + it.row()] != p[l * n + j]) out.tv += it.value();
  }
  for (Index k = 0; k < num; ++k)
    for (Index l = 0; l < num; ++l) {
      const double c = net.omega() * net.coupling()(k, l);
      if (c == 0.0) continue;
      for (Index j = 0; j < n; ++j)
        if (p[k * n + j] != p[l * n + j]) out.tv += c;
    }
  const Matrix u = p.onehot();
  for (Index l = 0; l < num; ++l) {
    if (w[static_cast<std::size_t>(l)] == 0.0) continue;
    const Vector u_vol = u.middleRows(l * n, n).transpose() * deg.intra_degrees[static_cast<std::size_t>(l)];
    out.balance += w[static_cast<std::size_t>(l)] * u_vol.squaredNorm();
  }
  return out;
}

namespace detail {

// Sums in sorted order so the result does not depend on label order.
inline double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

inline double entropy(const std::vector<Index>& sizes, double total) {
  std::vector<double> terms;
  for (Index s : sizes)
    if (s > 0) {
      const double q = static_cast<double>(s) / total;
      terms.push_back(-q * std::log(q));
    }
  return sorted_sum(std::move(terms));
}

}  // namespace detail

/// Normalized mutual information, I(a; b) / sqrt(H(a) H(b)). Two constant
/// labelings give 1; one constant labeling against a non-constant one gives 0.
inline double nmi(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: labelings differ in length");
  if (a.size() == 0) throw std::invalid_argument("nmi: empty labelings");
  const double total = static_cast<double>(a.size());
  std::map<std::pair<Index, Index>, Index> joint;
  for (Index i = 0; i < a.size(); ++i) ++joint[{a[i], b[i]}];
  const auto sa = a.community_sizes();
  const auto sb = b.community_sizes();
  const double ha = detail::entropy(sa, total);
  const double hb = detail::entropy(sb, total);
  if (ha == 0.0 || hb == 0.0) return (ha == 0.0 && hb == 0.0) ? 1.0 : 0.0;
  std::vector<double> terms;
  for (const auto& [key, count] : joint) {
    const double pxy = static_cast<double>(count) / total;
    const double px = static_cast<double>(sa[static_cast<std::size_t>(key.first)]) / total;
    const double py = static_cast<double>(sb[static_cast<std::size_t>(key.second)]) / total;
    terms.push_back(pxy * std::log(pxy / (px * py)));
  }
  const double mi = detail::sorted_sum(std::move(terms));
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

struct MatchedAccuracy {
  double accuracy{0.0};
  std::map<Index, Index> matching;  // detected community -> truth community
};

/// Greedy matching: detected communities in descending size (ties: smaller
/// label first) each take the unused truth community with the largest overlap
/// (ties: smaller label). Detected communities left without a truth community
/// count as entirely wrong.
inline MatchedAccuracy matched_accuracy(const Partition& detected, const Partition& truth) {
  if (detected.size() != truth.size()) throw std::invalid_argument("accuracy: labelings differ in length");
  if (detected.size() == 0) throw std::invalid_argument("accuracy: empty labelings");
  const auto dsizes = detected.community_sizes();
  const auto tsizes = truth.community_sizes();
  std::map<std::pair<Index, Index>, Index> overlap;
  for (Index i = 0; i < detected.size(); ++i) ++overlap[{detected[i], truth[i]}];

  std::vector<Index> order;
  for (Index c = 0; c < detected.num_communities(); ++c)
    if (dsizes[static_cast<std::size_t>(c)] > 0) order.push_back(c);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return dsizes[static_cast<std::size_t>(x)] > dsizes[static_cast<std::size_t>(y)];
  });

  std::vector<bool> used(static_cast<std::size_t>(truth.num_communities()), false);
  MatchedAccuracy out;
  Index correct = 0;
  for (Index c : order) {
    Index best = -1, best_overlap = -1;
    for (Index t = 0; t < truth.num_communities(); ++t) {
      if (used[static_cast<std::size_t>(t)] || tsizes[static_cast<std::size_t>(t)] == 0) continue;
      auto it = overlap.find({c, t});
      const Index ov = it == overlap.end() ? 0 : it->second;
      if (ov > best_overlap) {
        best = t;
        best_overlap = ov;
      }
    }
    if (best < 0) continue;
    used[static_cast<std::size_t>(best)] = true;
    out.matching[c] = best;
    correct += best_overlap;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(detected.size());
  return out;
}

struct EvalReport {
  double modularity{0.0};
  std::optional<double> accuracy;
  std::optional<double> nmi;
  Index communities{0};
  std::map<Index, Index> matching;
};

inline EvalReport evaluate(const Partition& p, const MultiplexNetwork& net, const DegreeData& deg,
                           const std::vector<double>& gamma, const std::optional<Partition>& truth = std::nullopt) {
  EvalReport r;
  r.modularity = multiplex_modularity(p, net, deg, gamma);
  r.communities = p.nonempty_communities();
  if (truth) {
    auto acc = matched_accuracy(p, *truth);
    r.accuracy = acc.accuracy;
    r.matching = std::move(acc.matching);
    r.nmi = nmi(p, *truth);
  }
  return r;
}

}  // namespace mxcd
