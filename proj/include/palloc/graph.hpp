#pragma once

// Weighted undirected communication graphs and the Laplacian quantities the
// coordination law depends on.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "palloc/error.hpp"

namespace palloc {

/// Weighted undirected graph stored as a dense symmetric adjacency matrix.
class Graph {
 public:
  /// A single isolated node.
  Graph() : Graph(Eigen::MatrixXd::Zero(1, 1)) {}

  /// Validates symmetry, zero diagonal and nonnegativity.
  explicit Graph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    if (weights_.rows() < 1 || weights_.rows() != weights_.cols()) {
      throw Error(ErrorKind::invalid_graph, "adjacency matrix must be square with n >= 1");
    }
    const Eigen::Index n = weights_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights_(i, i) != 0.0) throw Error(ErrorKind::invalid_graph, "nonzero diagonal weight");
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = weights_(i, j);
        if (!std::isfinite(w) || w < 0.0) {
          throw Error(ErrorKind::invalid_graph, "weights must be finite and nonnegative");
        }
        if (w != weights_(j, i)) throw Error(ErrorKind::invalid_graph, "weights not symmetric");
      }
    }
    build_neighbors();
  }

  /// Edges use 0-based node indices. Missing weights default to 1.
  static Graph from_edges(int n, std::span<const std::pair<int, int>> edges,
                          std::span<const double> weights = {}) {
    if (n < 1) throw Error(ErrorKind::invalid_graph, "node count must be >= 1");
    if (!weights.empty() && weights.size() != edges.size()) {
      throw Error(ErrorKind::invalid_graph, "weights length differs from edge count");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
        throw Error(ErrorKind::invalid_graph,
                    "bad edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      const double w = weights.empty() ? 1.0 : weights[e];
      a(i, j) = w;
      a(j, i) = w;
    }
    return Graph(std::move(a));
  }

  int size() const noexcept { return static_cast<int>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }

  /// Indices j with a_ij > 0.
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(static_cast<std::size_t>(i)); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.weights_.rows() == b.weights_.rows() && a.weights_ == b.weights_;
  }

 private:
  void build_neighbors() {
    neighbors_.assign(static_cast<std::size_t>(size()), {});
    for (int i = 0; i < size(); ++i) {
      for (int j = 0; j < size(); ++j) {
        if (weights_(i, j) > 0.0) neighbors_[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }

  Eigen::MatrixXd weights_;
  std::vector<std::vector<int>> neighbors_;
};

/// The communication graph of the four-agent case studies: edges 1-2, 2-3, 2-4, 3-4.
inline Graph four_agent_graph() {
  const std::array<std::pair<int, int>, 4> edges{{{0, 1}, {1, 2}, {1, 3}, {2, 3}}};
  return Graph::from_edges(4, edges);
}

struct LaplacianInfo {
  Eigen::MatrixXd L;
  /// Ascending.
  Eigen::VectorXd eigenvalues;
  /// Smallest eigenvalue above 1e-9 * max|lambda|; absent when every eigenvalue is zero.
  std::optional<double> c;
};

inline Eigen::MatrixXd laplacian_matrix(const Graph& g) {
  const Eigen::MatrixXd& a = g.weights();
  Eigen::MatrixXd L = -a;
  for (int i = 0; i < g.size(); ++i) L(i, i) = a.row(i).sum();
  return L;
}

inline LaplacianInfo laplacian(const Graph& g) {
  LaplacianInfo info;
  info.L = laplacian_matrix(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.L, Eigen::EigenvaluesOnly);
  info.eigenvalues = es.eigenvalues();  // already ascending
  const double scale = info.eigenvalues.cwiseAbs().maxCoeff();
  const double threshold = 1e-9 * scale;
  for (Eigen::Index k = 0; k < info.eigenvalues.size(); ++k) {
    if (scale > 0.0 && info.eigenvalues(k) > threshold) {
      info.c = info.eigenvalues(k);
      break;
    }
  }
  return info;
}

/// Breadth-first search over positive-weight edges.
inline bool is_connected(const Graph& g) {
  const int n = g.size();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j : g.neighbors(i)) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

/// r = 1/sqrt(n) * 1 and an orthonormal completion R of the complement of r.
struct ConsensusBasis {
  Eigen::VectorXd r;
  Eigen::MatrixXd R;
};

inline ConsensusBasis consensus_basis(int n) {
  if (n < 2) throw Error(ErrorKind::invalid_dimension, "consensus basis needs n >= 2");
  ConsensusBasis basis;
  basis.r = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  basis.R.resize(n, n - 1);

  // Gram-Schmidt (two passes) over e_1..e_n against r; one unit vector
  // always collapses onto the span and is skipped.
  std::vector<Eigen::VectorXd> accepted{basis.r};
  int col = 0;
  for (int k = 0; k < n && col < n - 1; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : accepted) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    v /= norm;
    accepted.push_back(v);
    basis.R.col(col++) = v;
  }
  return basis;
}

}  // namespace palloc
