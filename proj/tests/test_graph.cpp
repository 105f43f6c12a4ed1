#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "palloc/graph.hpp"

using palloc::Graph;

TEST(Graph, FourAgentLaplacian) {
  const auto info = palloc::laplacian(palloc::four_agent_graph());
  Eigen::MatrixXd expected(4, 4);
  expected << 1, -1, 0, 0, -1, 3, -1, -1, 0, -1, 2, -1, 0, -1, -1, 2;
  EXPECT_EQ(info.L, expected);
  ASSERT_TRUE(info.c.has_value());
  EXPECT_GT(*info.c, 0.0);
  for (Eigen::Index k = 1; k < info.eigenvalues.size(); ++k) {
    EXPECT_LE(info.eigenvalues(k - 1), info.eigenvalues(k));
  }
}

TEST(Graph, FourAgentEigenvectorWithEigenvalueThree) {
  const auto L = palloc::laplacian_matrix(palloc::four_agent_graph());
  Eigen::Vector4d v(0, 0, 1, -1);
  EXPECT_LT((L * v - 3.0 * v).norm(), 1e-14);
}

TEST(Graph, SingleNodeHasNoPositiveEigenvalue) {
  const auto info = palloc::laplacian(Graph{});
  EXPECT_EQ(info.L, Eigen::MatrixXd::Zero(1, 1));
  EXPECT_FALSE(info.c.has_value());
  EXPECT_TRUE(palloc::is_connected(Graph{}));
}

TEST(Graph, Connectivity) {
  EXPECT_TRUE(palloc::is_connected(palloc::four_agent_graph()));
  EXPECT_FALSE(palloc::is_connected(Graph(Eigen::MatrixXd::Zero(2, 2))));
  Eigen::MatrixXd k4 = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  EXPECT_TRUE(palloc::is_connected(Graph(k4)));
}

TEST(Graph, RejectsInvalidWeights) {
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(Graph{asym}, palloc::Error);
  Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(Graph{diag}, palloc::Error);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(2, 2);
  neg(0, 1) = neg(1, 0) = -1.0;
  EXPECT_THROW(Graph{neg}, palloc::Error);
  const std::vector<std::pair<int, int>> loop{{0, 0}};
  EXPECT_THROW(Graph::from_edges(2, loop), palloc::Error);
}

TEST(Graph, EdgeListWeightsDefaultToOne) {
  const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}};
  const Graph g = Graph::from_edges(3, edges);
  EXPECT_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.weight(2, 1), 1.0);
  EXPECT_EQ(g.weight(0, 2), 0.0);
  const std::vector<double> w{0.5, 2.0};
  const Graph h = Graph::from_edges(3, edges, w);
  EXPECT_EQ(h.weight(1, 0), 0.5);
  EXPECT_EQ(h.neighbors(1), (std::vector<int>{0, 2}));
}

namespace {

Graph random_graph(std::mt19937_64& rng, int n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < density) a(i, j) = a(j, i) = 0.1 + 2.0 * u(rng);
    }
  }
  return Graph(a);
}

}  // namespace

TEST(Graph, RandomGraphProperties) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_real_distribution<double> density(0.1, 0.9);
  int connected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = random_graph(rng, size(rng), density(rng));
    const auto info = palloc::laplacian(g);
    const int n = g.size();

    EXPECT_LT((info.L - info.L.transpose()).norm(), 1e-15);
    // Row sums vanish up to rounding of the degree sums.
    const double lmax = info.L.cwiseAbs().maxCoeff();
    EXPECT_LE((info.L * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-14 * std::max(lmax, 1.0));
    EXPECT_GE(info.eigenvalues.minCoeff(), -1e-10);

    const double scale = info.eigenvalues.cwiseAbs().maxCoeff();
    int zeros = 0;
    for (Eigen::Index k = 0; k < n; ++k) zeros += std::abs(info.eigenvalues(k)) <= 1e-9 * std::max(scale, 1.0);
    const bool conn = palloc::is_connected(g);
    EXPECT_EQ(conn, zeros == 1) << "trial " << trial;
    if (conn && n > 1) {
      ++connected;
      ASSERT_TRUE(info.c.has_value());
      EXPECT_GT(*info.c, 0.0);
    }
  }
  EXPECT_GT(connected, 20);
}

TEST(ConsensusBasis, TwoNodes) {
  const auto b = palloc::consensus_basis(2);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(b.r(0), s, 1e-15);
  EXPECT_NEAR(b.r(1), s, 1e-15);
  EXPECT_NEAR(std::abs(b.R(0, 0)), s, 1e-15);
  EXPECT_NEAR(b.R(0, 0), -b.R(1, 0), 1e-15);
}

TEST(ConsensusBasis, Identities) {
  for (int n : {2, 3, 4, 7}) {
    const auto b = palloc::consensus_basis(n);
    EXPECT_LT((b.R.transpose() * b.R - Eigen::MatrixXd::Identity(n - 1, n - 1)).norm(), 1e-12);
    EXPECT_LT((b.R.transpose() * b.r).norm(), 1e-12);
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    EXPECT_LT((b.R * b.R.transpose() - proj).norm(), 1e-12);
  }
}

TEST(ConsensusBasis, RejectsSingleNode) {
  try {
    palloc::consensus_basis(1);
    FAIL();
  } catch (const palloc::Error& e) {
    EXPECT_EQ(e.kind(), palloc::ErrorKind::invalid_dimension);
  }
}
