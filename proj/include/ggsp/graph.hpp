// Sensor graph construction and its spectral basis: k-NN graph from 2D
// coordinates, combinatorial Laplacian shift operator, graph Fourier basis.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ggsp/errors.hpp"

namespace ggsp {

using Point2 = std::array<double, 2>;

/// Undirected, loop-free sensor graph. Edges stored once as (u,v) with u < v.
struct SpatialGraph {
  std::vector<Point2> coords;
  std::vector<std::pair<int, int>> edges;
  int n_vertices = 0;

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(n_vertices), 0);
    for (const auto& [u, v] : edges) {
      ++deg[static_cast<std::size_t>(u)];
      ++deg[static_cast<std::size_t>(v)];
    }
    return deg;
  }
};

/// Orthonormal eigenbasis of a graph shift operator, eigenvalues
/// nondecreasing (graph-frequency order). Column sign fixed so the first
/// entry with magnitude > 1e-12 is positive.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns phi_1..phi_N

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/**
 * Connect each point to its k nearest Euclidean neighbors and symmetrize by
 * union. Distance ties break toward the lower vertex index, so construction
 * is deterministic.
 *
 * Throws DegenerateInput on duplicate coordinates. k >= N is clamped to N-1;
 * when `warnings` is given, a note is appended.
 */
inline SpatialGraph build_knn_graph(const std::vector<Point2>& coords, int k,
                                    std::vector<std::string>* warnings = nullptr) {
  const int n = static_cast<int>(coords.size());
  if (n < 2) throw DegenerateInput("build_knn_graph: need at least 2 points");
  if (k < 1) throw DegenerateInput("build_knn_graph: k must be >= 1");

  {
    auto sorted = coords;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DegenerateInput("build_knn_graph: duplicate coordinates");
  }

  if (k >= n) {
    if (warnings)
      warnings->push_back("build_knn_graph: k=" + std::to_string(k) +
                          " clamped to N-1=" + std::to_string(n - 1));
    k = n - 1;
  }

  std::vector<std::pair<int, int>> edges;
  std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = coords[i][0] - coords[j][0];
      const double dy = coords[i][1] - coords[j][1];
      cand[m++] = {dx * dx + dy * dy, j};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int q = 0; q < k; ++q) {
      const int j = cand[static_cast<std::size_t>(q)].second;
      edges.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  return SpatialGraph{coords, std::move(edges), n};
}

/// Combinatorial Laplacian L = D - A with unweighted adjacency.
inline Eigen::MatrixXd laplacian(const SpatialGraph& g) {
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n_vertices, g.n_vertices);
  for (const auto& [u, v] : g.edges) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  return lap;
}

/**
 * Eigendecompose a symmetric shift operator. Eigenvalues come back sorted
 * nondecreasing; each eigenvector is flipped, if needed, so its first entry
 * with magnitude > 1e-12 is positive.
 *
 * Throws InvalidOperator when the input is asymmetric beyond 1e-10.
 */
inline SpectralBasis eigendecompose(const Eigen::MatrixXd& shift) {
  if (shift.rows() != shift.cols())
    throw InvalidOperator("eigendecompose: matrix not square");
  const double asym = (shift - shift.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw InvalidOperator("eigendecompose: matrix asymmetric by " + std::to_string(asym));

  const Eigen::MatrixXd sym = 0.5 * (shift + shift.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecompose: eigensolver failed to converge");

  SpectralBasis basis{solver.eigenvalues(), solver.eigenvectors()};
  for (int c = 0; c < basis.eigenvectors.cols(); ++c) {
    for (int r = 0; r < basis.eigenvectors.rows(); ++r) {
      const double val = basis.eigenvectors(r, c);
      if (std::abs(val) > 1e-12) {
        if (val < 0.0) basis.eigenvectors.col(c) = -basis.eigenvectors.col(c);
        break;
      }
    }
  }
  return basis;
}

// --- edge-list / coordinate file formats ---------------------------------
// Edge list: first line "N", then one "u v" pair per line, 0-indexed.
// Coordinates: CSV with header vertex_id,x,y.

inline void write_edge_list(const SpatialGraph& g, std::ostream& out) {
  out << g.n_vertices << "\n";
  for (const auto& [u, v] : g.edges) out << u << " " << v << "\n";
}

inline std::vector<std::pair<int, int>> read_edge_list(std::istream& in, int& n_out) {
  std::string line;
  if (!std::getline(in, line)) throw IOError("edge list: missing vertex-count line");
  try {
    n_out = std::stoi(line);
  } catch (const std::exception&) {
    throw IOError("edge list: bad vertex-count line '" + line + "'");
  }
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int u = -1, v = -1;
    if (!(row >> u >> v)) throw IOError("edge list: bad edge line '" + line + "'");
    if (u < 0 || v < 0 || u >= n_out || v >= n_out || u == v)
      throw IOError("edge list: invalid edge " + line);
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

inline void write_coords_csv(const SpatialGraph& g, std::ostream& out) {
  out << "vertex_id,x,y\n";
  char buf[96];
  for (int i = 0; i < g.n_vertices; ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", i, g.coords[static_cast<std::size_t>(i)][0],
                  g.coords[static_cast<std::size_t>(i)][1]);
    out << buf;
  }
}

inline std::vector<Point2> read_coords_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IOError("coords csv: empty file");
  std::vector<Point2> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int id = 0;
    double x = 0.0, y = 0.0;
    if (!(row >> id >> x >> y)) throw IOError("coords csv: bad row '" + line + "'");
    if (id != static_cast<int>(pts.size()))
      throw IOError("coords csv: vertex ids must be consecutive from 0");
    pts.push_back({x, y});
  }
  return pts;
}

}  // namespace ggsp
