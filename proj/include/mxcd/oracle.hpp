#pragma once

#include "mxcd/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mxcd {

struct OracleResult {
  double q_max{0.0};
  Partition argmax;
};

/// Exact maximum of multiplex modularity over all assignments of the nL pairs
/// to at most n_c communities, by exhaustive enumeration. Label permutations
/// are pruned: pair 0 gets label 0 and labels first appear in increasing order.
/// Refuses instances with n_c^nL > 1e7.
inline OracleResult oracle_max_modularity(const MultiplexNetwork& net, const DegreeData& deg,
                                          const std::vector<double>& gamma, Index num_communities) {
  if (num_communities < 1) throw std::invalid_argument("oracle needs n_c >= 1");
  if (!(deg.total_strength > 0.0)) throw std::domain_error("modularity undefined: total strength is zero");
  const Index size = net.size();
  if (size * std::log10(static_cast<double>(num_communities)) > 7.0 + 1e-12)
    throw std::length_error("instance too large for exhaustive search (n_c^nL > 1e7)");

  const Matrix m = modularity_M_op(net, deg, gamma).to_dense();
  std::vector<Index> labels(static_cast<std::size_t>(size), 0);
  std::vector<Index> best(labels);
  double best_score = -std::numeric_limits<double>::infinity();

  // score = sum_{p,q same label} M(p,q), accumulated as pairs are assigned.
  auto search = [&](auto&& self, Index pos, Index used, double score) -> void {
    if (pos == size) {
      if (score > best_score) {
        best_score = score;
        best = labels;
      }
      return;
    }
    const Index limit = std::min(used + 1, num_communities);
    for (Index c = 0; c < limit; ++c) {
      double delta = m(pos, pos);
      for (Index q = 0; q < pos; ++q)
        if (labels[static_cast<std::size_t>(q)] == c) delta += 2.0 * m(pos, q);
      labels[static_cast<std::size_t>(pos)] = c;
      self(self, pos + 1, std::max(used, c + 1), score + delta);
    }
  };
  search(search, 0, 0, 0.0);

  Partition argmax(std::move(best), num_communities);
  return {multiplex_modularity(argmax, net, deg, gamma), std::move(argmax)};
}

}  // namespace mxcd
