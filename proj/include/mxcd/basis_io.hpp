#pragma once

#include "mxcd/io.hpp"
#include "mxcd/lanczos.hpp"

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxcd {

// What a cached basis was computed for. A cache is only reused when all of
// these match the current invocation.
struct BasisKey {
  Method method{Method::mpbtv};
  std::vector<double> gamma;
  double omega{0.0};
  Index size{0};
  double total_strength{0.0};
};

// Text cache of a spectral basis, written with round-trip precision so a
// reloaded basis reproduces the original bit for bit:
//
//   #basis method=<m> nL=<n> k=<k> shift=<s> omega=<w> two_mu=<t> gamma=<g1,g2,..>
//   eigenvalues <k values>
//   residuals   <k values>
//   <nL rows of k eigenvector entries>
inline void save_basis(const SpectralBasis& basis, const BasisKey& key, const std::string& path) {
  auto out = detail::open_output(path);
  out << "#basis method=" << to_string(key.method) << " nL=" << basis.dim() << " k=" << basis.size()
      << " shift=" << detail::format_real(basis.shift) << " omega=" << detail::format_real(key.omega)
      << " two_mu=" << detail::format_real(key.total_strength) << " gamma=";
  for (std::size_t i = 0; i < key.gamma.size(); ++i) out << (i ? "," : "") << detail::format_real(key.gamma[i]);
  out << "\neigenvalues";
  for (Index i = 0; i < basis.size(); ++i) out << '\t' << detail::format_real(basis.eigenvalues(i));
  out << "\nresiduals";
  for (Index i = 0; i < basis.size(); ++i) out << '\t' << detail::format_real(basis.residuals(i));
  out << '\n';
  for (Index r = 0; r < basis.dim(); ++r) {
    for (Index c = 0; c < basis.size(); ++c) out << (c ? "\t" : "") << detail::format_real(basis.eigenvectors(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Loads a cached basis and checks it against `expected`. Throws when the
/// cache belongs to a different network, method, or parameter set.
inline SpectralBasis load_basis(const std::string& path, const BasisKey& expected) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(path, lineno, "empty basis file");
  auto header = detail::split_fields(line);
  if (header.empty() || header[0] != "#basis") throw ParseError(path, lineno, "missing #basis header");

  Index size = -1, k = -1;
  double shift = 0.0, omega = -1.0, two_mu = -1.0;
  std::vector<double> gamma;
  std::string method;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto eq = header[i].find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "malformed header field");
    const std::string name = header[i].substr(0, eq);
    const std::string value = header[i].substr(eq + 1);
    if (name == "method") method = value;
    else if (name == "nL") size = detail::parse_int(value, path, lineno);
    else if (name == "k") k = detail::parse_int(value, path, lineno);
    else if (name == "shift") shift = detail::parse_real(value, path, lineno);
    else if (name == "omega") omega = detail::parse_real(value, path, lineno);
    else if (name == "two_mu") two_mu = detail::parse_real(value, path, lineno);
    else if (name == "gamma") {
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) gamma.push_back(detail::parse_real(tok, path, lineno));
    } else {
      throw ParseError(path, lineno, "unknown header field '" + name + "'");
    }
  }
  if (size < 1 || k < 1) throw ParseError(path, lineno, "header needs nL and k");
  if (parse_method(method) != expected.method || size != expected.size || omega != expected.omega ||
      two_mu != expected.total_strength || gamma != expected.gamma)
    throw std::runtime_error(path + ": cached basis was computed for different inputs");

  SpectralBasis basis;
  basis.shift = shift;
  basis.operator_kind =
      expected.method == Method::mpbtv ? OperatorKind::neg_L_plus_K_shifted : OperatorKind::modularity_M;
  auto read_row = [&](const std::string& tag, Vector& dst) {
    ++lineno;
    if (!std::getline(in, line)) throw ParseError(path, lineno, "missing " + tag + " line");
    auto f = detail::split_fields(line);
    if (f.size() != static_cast<std::size_t>(k) + 1 || f[0] != tag) throw ParseError(path, lineno, "bad " + tag + " line");
    dst.resize(k);
    for (Index i = 0; i < k; ++i) dst(i) = detail::parse_real(f[static_cast<std::size_t>(i) + 1], path, lineno);
  };
  read_row("eigenvalues", basis.eigenvalues);
  read_row("residuals", basis.residuals);
  basis.eigenvectors.resize(size, k);
  for (Index r = 0; r < size; ++r) {
    ++lineno;
    if (!std::getline(in, line)) throw ParseError(path, lineno, "truncated eigenvector block");
    auto f = detail::split_fields(line);
    if (f.size() != static_cast<std::size_t>(k)) throw ParseError(path, lineno, "wrong number of columns");
    for (Index c = 0; c < k; ++c) basis.eigenvectors(r, c) = detail::parse_real(f[static_cast<std::size_t>(c)], path, lineno);
  }
  return basis;
}

}  // namespace mxcd
