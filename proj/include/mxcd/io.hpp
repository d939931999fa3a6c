#pragma once

#include "mxcd/network.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mxcd {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

inline long long parse_int(const std::string& s, const std::string& path, std::size_t line) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(path, line, "expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw ParseError(path, line, "expected an integer, got '" + s + "'");
  return v;
}

inline double parse_real(const std::string& s, const std::string& path, std::size_t line) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(path, line, "expected a number, got '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v))
    throw ParseError(path, line, "expected a finite number, got '" + s + "'");
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Shortest decimal text that round-trips a double.
inline std::string format_real(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

}  // namespace detail

/// Reads the multiplex edge-list format:
///
///   #multiplex n=<n> L=<L>
///   layer  u  v  [weight]
///
/// Ids are 1-based. Each edge is undirected; repeated edges are summed. Without
/// a coupling file every layer is coupled to every other (11^T - I).
inline MultiplexNetwork load_network(const std::string& path,
                                     const std::optional<std::string>& coupling_path, double omega) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t lineno = 0;
  Index n = -1, num_layers = -1;
  std::vector<std::vector<Edge>> edges;

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    auto fields = detail::split_fields(line);
    if (fields[0] == "#multiplex") {
      if (n >= 0) throw ParseError(path, lineno, "duplicate #multiplex header");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto& f = fields[i];
        if (f.rfind("n=", 0) == 0)
          n = detail::parse_int(f.substr(2), path, lineno);
        else if (f.rfind("L=", 0) == 0)
          num_layers = detail::parse_int(f.substr(2), path, lineno);
        else
          throw ParseError(path, lineno, "unknown header field '" + f + "'");
      }
      if (n < 1 || num_layers < 1) throw ParseError(path, lineno, "header needs n>=1 and L>=1");
      edges.resize(static_cast<std::size_t>(num_layers));
      continue;
    }
    if (fields[0][0] == '#') continue;
    if (n < 0) throw ParseError(path, lineno, "edge line before #multiplex header");
    if (fields.size() < 3 || fields.size() > 4)
      throw ParseError(path, lineno, "expected 'layer u v [weight]'");
    const long long l = detail::parse_int(fields[0], path, lineno);
    const long long u = detail::parse_int(fields[1], path, lineno);
    const long long v = detail::parse_int(fields[2], path, lineno);
    const double w = fields.size() == 4 ? detail::parse_real(fields[3], path, lineno) : 1.0;
    if (l < 1 || l > num_layers) throw ParseError(path, lineno, "layer id out of range");
    if (u < 1 || u > n || v < 1 || v > n) throw ParseError(path, lineno, "node id out of range");
    if (w < 0.0) throw ParseError(path, lineno, "negative edge weight");
    edges[static_cast<std::size_t>(l - 1)].push_back({static_cast<Index>(u - 1), static_cast<Index>(v - 1), w});
  }
  if (n < 0) throw ParseError(path, lineno, "missing #multiplex header");

  std::vector<SparseMatrix> layers;
  for (const auto& e : edges) layers.push_back(symmetric_layer(n, e));

  Matrix coupling = MultiplexNetwork::all_to_all_coupling(num_layers);
  if (coupling_path) {
    coupling.setZero();
    auto cin = detail::open_input(*coupling_path);
    lineno = 0;
    while (std::getline(cin, line)) {
      ++lineno;
      if (detail::is_blank(line)) continue;
      auto fields = detail::split_fields(line);
      if (fields[0][0] == '#') continue;
      if (fields.size() < 2 || fields.size() > 3)
        throw ParseError(*coupling_path, lineno, "expected 'k l [weight]'");
      const long long k = detail::parse_int(fields[0], *coupling_path, lineno);
      const long long l = detail::parse_int(fields[1], *coupling_path, lineno);
      const double w = fields.size() == 3 ? detail::parse_real(fields[2], *coupling_path, lineno) : 1.0;
      if (k < 1 || k > num_layers || l < 1 || l > num_layers)
        throw ParseError(*coupling_path, lineno, "layer id out of range");
      if (k == l) throw ParseError(*coupling_path, lineno, "self-referential coupling entry");
      if (w < 0.0) throw ParseError(*coupling_path, lineno, "negative coupling weight");
      coupling(k - 1, l - 1) += w;
      coupling(l - 1, k - 1) = coupling(k - 1, l - 1);
    }
  }
  return MultiplexNetwork(n, std::move(layers), std::move(coupling), omega);
}

/// Canonical network file: header, then one line per stored pair u <= v,
/// sorted by (layer, u, v).
inline void save_network(const MultiplexNetwork& net, const std::string& path) {
  auto out = detail::open_output(path);
  out << "#multiplex n=" << net.nodes() << " L=" << net.num_layers() << "\n";
  for (Index l = 0; l < net.num_layers(); ++l) {
    const SparseMatrix& a = net.layer(l);
    // Column-major storage of a symmetric matrix: column = u, row = v >= u.
    for (Index u = 0; u < a.outerSize(); ++u)
      for (SparseMatrix::InnerIterator it(a, u); it; ++it)
        if (it.row() >= u)
          out << (l + 1) << '\t' << (u + 1) << '\t' << (it.row() + 1) << '\t'
              << detail::format_real(it.value()) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void save_coupling(const MultiplexNetwork& net, const std::string& path) {
  auto out = detail::open_output(path);
  for (Index k = 0; k < net.num_layers(); ++k)
    for (Index l = k + 1; l < net.num_layers(); ++l)
      if (net.coupling()(k, l) != 0.0)
        out << (k + 1) << '\t' << (l + 1) << '\t' << detail::format_real(net.coupling()(k, l)) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Ground-truth labels, either "node label" (replicated over all layers) or
/// "node layer label" (per node-layer pair); the format is taken from the
/// column count of the first data line. Label strings are renumbered in order
/// of first appearance in the file.
inline Partition load_labels(const std::string& path, const MultiplexNetwork& net) {
  auto in = detail::open_input(path);
  const Index n = net.nodes();
  const Index num_layers = net.num_layers();
  std::vector<Index> labels(static_cast<std::size_t>(net.size()), -1);
  std::unordered_map<std::string, Index> ids;
  std::size_t columns = 0;
  std::string line;
  std::size_t lineno = 0;

  auto assign = [&](Index row, Index id) {
    auto& slot = labels[static_cast<std::size_t>(row)];
    if (slot >= 0 && slot != id) throw ParseError(path, lineno, "conflicting duplicate label");
    slot = id;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    auto fields = detail::split_fields(line);
    if (fields[0][0] == '#') continue;
    if (columns == 0) {
      columns = fields.size();
      if (columns != 2 && columns != 3)
        throw ParseError(path, lineno, "expected 'node label' or 'node layer label'");
    } else if (fields.size() != columns) {
      throw ParseError(path, lineno, "inconsistent column count");
    }
    const long long node = detail::parse_int(fields[0], path, lineno);
    if (node < 1 || node > n) throw ParseError(path, lineno, "node id out of range");
    const std::string& name = fields.back();
    auto [it, inserted] = ids.try_emplace(name, static_cast<Index>(ids.size()));
    const Index id = it->second;
    if (columns == 2) {
      for (Index l = 0; l < num_layers; ++l) assign(net.pair_index(node - 1, l), id);
    } else {
      const long long layer = detail::parse_int(fields[1], path, lineno);
      if (layer < 1 || layer > num_layers) throw ParseError(path, lineno, "layer id out of range");
      assign(net.pair_index(node - 1, layer - 1), id);
    }
  }
  for (Index i = 0; i < net.size(); ++i)
    if (labels[static_cast<std::size_t>(i)] < 0)
      throw std::runtime_error(path + ": no label for node " + std::to_string(i % n + 1) +
                               " in layer " + std::to_string(i / n + 1));
  return Partition(std::move(labels), static_cast<Index>(ids.size()));
}

/// Writes "node layer community" (1-based) for every pair, sorted by (layer, node).
inline void save_partition(const Partition& p, Index nodes, const std::string& path) {
  if (nodes < 1 || p.size() % nodes != 0) throw std::invalid_argument("partition size is not a multiple of n");
  auto out = detail::open_output(path);
  for (Index i = 0; i < p.size(); ++i)
    out << (i % nodes + 1) << '\t' << (i / nodes + 1) << '\t' << (p[i] + 1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Reads a partition written by save_partition. Community numbers are kept
/// as-is (n_c = largest community number), so save/load is an identity.
inline Partition load_partition(const std::string& path, Index nodes, Index num_layers) {
  auto in = detail::open_input(path);
  std::vector<Index> labels(static_cast<std::size_t>(nodes * num_layers), -1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    auto fields = detail::split_fields(line);
    if (fields[0][0] == '#') continue;
    if (fields.size() != 3) throw ParseError(path, lineno, "expected 'node layer community'");
    const long long node = detail::parse_int(fields[0], path, lineno);
    const long long layer = detail::parse_int(fields[1], path, lineno);
    const long long c = detail::parse_int(fields[2], path, lineno);
    if (node < 1 || node > nodes) throw ParseError(path, lineno, "node id out of range");
    if (layer < 1 || layer > num_layers) throw ParseError(path, lineno, "layer id out of range");
    if (c < 1) throw ParseError(path, lineno, "community ids start at 1");
    auto& slot = labels[static_cast<std::size_t>((layer - 1) * nodes + node - 1)];
    if (slot >= 0 && slot != c - 1) throw ParseError(path, lineno, "conflicting duplicate entry");
    slot = static_cast<Index>(c - 1);
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0)
      throw std::runtime_error(path + ": partition does not cover every node-layer pair");
  return Partition::from_labels(std::move(labels));
}

}  // namespace mxcd
