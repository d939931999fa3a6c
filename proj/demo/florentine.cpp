// Detects communities in the Florentine families multiplex with both methods
// and prints the best partition found by each.

#include "mxcd/mxcd.hpp"

#include <iostream>

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : MXCD_DATA_DIR "/florentine.mpx";
  const auto net = mxcd::load_network(path, std::nullopt, 1.0);
  const auto deg = mxcd::compute_degrees(net);

  mxcd::DetectConfig cfg;
  cfg.gamma.assign(static_cast<std::size_t>(net.num_layers()), 0.6);
  cfg.num_communities = 3;
  cfg.n_runs = 50;
  cfg.seed = 1;

  for (auto [method, k] : {std::pair{mxcd::Method::mpbtv, 4}, std::pair{mxcd::Method::dgfm3, 7}}) {
    cfg.method = method;
    cfg.k = k;
    const auto result = mxcd::detect(net, deg, cfg);
    std::cout << mxcd::to_string(method) << ": Q = " << result.best.modularity << " ("
              << result.best.partition.nonempty_communities() << " communities, "
              << result.offline_seconds << " s offline)\n";
    for (mxcd::Index l = 0; l < net.num_layers(); ++l) {
      std::cout << "  layer " << l + 1 << ":";
      for (mxcd::Index j = 0; j < net.nodes(); ++j) std::cout << ' ' << result.best.partition[net.pair_index(j, l)] + 1;
      std::cout << '\n';
    }
  }
}
