#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "kronred/network.hpp"
#include "test_util.hpp"

using namespace kronred;

namespace {

bool mentions(const std::vector<std::string>& issues, const char* needle) {
  return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("validate accepts the mixed resistor/inductor chain") {
  CHECK(validate(testutil::mixed_resistor_inductor_chain()).empty());
}

TEST_CASE("validate reports short-circuit and open-circuit edges") {
  auto net = testutil::mixed_resistor_inductor_chain();
  net.p[1].setZero();
  const auto issues = validate(net);
  CHECK(mentions(issues, "short-circuit edge 2"));

  auto net2 = testutil::mixed_resistor_inductor_chain();
  net2.q[0].setZero();
  CHECK(mentions(validate(net2), "open-circuit edge 1"));
}

TEST_CASE("validate reports negative coefficients") {
  auto net = testutil::mixed_resistor_inductor_chain();
  net.p[0][1] = -1.0;
  CHECK(mentions(validate(net), "negative coefficient"));
}

TEST_CASE("validate reports disconnected graphs and empty coefficients") {
  GeneralizedNetwork net{
      DirectedGraph(4, {{1, 2}, {3, 4}}), VertexPartition(4, {1, 3}), 0,
      {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0)},
      {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0)}};
  CHECK(mentions(validate(net), "disconnected"));
}

TEST_CASE("validate reports coefficient length mismatches") {
  auto net = testutil::mixed_resistor_inductor_chain();
  net.p[0] = Eigen::VectorXd::Constant(3, 1.0);
  CHECK(mentions(validate(net), "length 3"));

  auto net2 = testutil::mixed_resistor_inductor_chain();
  net2.q.pop_back();
  CHECK(mentions(validate(net2), "do not match edge count"));
}

TEST_CASE("rank1_check rejects an orthogonal pair") {
  std::vector<Eigen::VectorXd> vectors(2, Eigen::VectorXd(2));
  vectors[0] << 1, 0;
  vectors[1] << 0, 1;
  CHECK_FALSE(rank1_check(vectors, 1e-9).has_value());
  // Gram eigendecomposition oracle: both singular values are 1.
  Eigen::MatrixXd stacked(2, 2);
  stacked << 1, 0, 0, 1;
  const auto [s1, s2] = testutil::gram2_singular_values(stacked);
  CHECK(s1 == doctest::Approx(1.0));
  CHECK(s2 == doctest::Approx(1.0));
  CHECK(analyze_rank1(vectors, 1e-9).singular_ratio ==
        doctest::Approx(s2 / s1));
}

TEST_CASE("rank1_check recovers basis and scales for a collinear family") {
  std::vector<Eigen::VectorXd> vectors(3, Eigen::VectorXd(2));
  vectors[0] << 1, 2;
  vectors[1] << 2, 4;
  vectors[2] << 0.5, 1;

  // Oracle: the 2x2 Gram eigendecomposition puts the whole spectrum on the
  // first singular value.
  Eigen::MatrixXd stacked(2, 3);
  stacked << 1, 2, 0.5, 2, 4, 1;
  const auto [s1, s2] = testutil::gram2_singular_values(stacked);
  CHECK(s2 / s1 <= 1e-12);

  const auto result = rank1_check(vectors, 1e-9);
  REQUIRE(result.has_value());
  CHECK(result->basis[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(result->basis[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result->scales[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(result->scales[1] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(result->scales[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a singleton family is always rank 1") {
  std::vector<Eigen::VectorXd> vectors(1, Eigen::VectorXd(2));
  vectors[0] << 3, 0;
  const auto result = rank1_check(vectors, 1e-9);
  REQUIRE(result.has_value());
  CHECK(result->basis[0] == doctest::Approx(1.0));
  CHECK(result->basis[1] == doctest::Approx(0.0));
  CHECK(result->scales[0] == doctest::Approx(3.0));
}

TEST_CASE("rank1_check rejects a 1% ratio perturbation at rtol 1e-9") {
  std::vector<Eigen::VectorXd> vectors(2, Eigen::VectorXd(2));
  vectors[0] << 1, 2;
  vectors[1] << 2.02, 4;  // ratio off by 1% on the first entry
  CHECK_FALSE(rank1_check(vectors, 1e-9).has_value());
  CHECK(analyze_rank1(vectors, 1e-9).singular_ratio > 1e-4);
}

TEST_CASE("homogeneous form of an RL chain") {
  const auto net = testutil::rl_network(
      testutil::path_through_3(), testutil::path_boundary_12(),
      Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 4));
  const auto form = homogeneous_form(net);
  CHECK(form.p_tilde[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(form.p_tilde[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(form.lambda[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(form.lambda[1] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(form.q_tilde[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(form.q_tilde[1] == doctest::Approx(0.0));
  CHECK(form.gamma[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(form.gamma[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(form.edge_weight[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(form.edge_weight[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("the inductor/capacitor chain is not reducible on either side") {
  const auto net = testutil::mixed_inductor_capacitor_chain();
  CHECK_THROWS_AS(homogeneous_form(net), NotReducibleError);
  try {
    homogeneous_form(net);
  } catch (const NotReducibleError& err) {
    CHECK(err.side() == NotReducibleError::Side::Current);
    CHECK(err.singular_ratio() == doctest::Approx(1.0));
  }
  CHECK_FALSE(rank1_check(net.q, 1e-9).has_value());
}

TEST_CASE("homogeneous form of a purely resistive chain") {
  const auto net = testutil::resistor_network(testutil::path_through_3(),
                                              testutil::path_boundary_12(),
                                              Eigen::Vector2d(2, 3));
  const auto form = homogeneous_form(net);
  CHECK(form.p_tilde[0] == doctest::Approx(1.0));
  CHECK(form.lambda[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(form.lambda[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(form.gamma[0] == doctest::Approx(1.0).epsilon(1e-12));
  // Edge weights are the conductances.
  CHECK(form.edge_weight[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(form.edge_weight[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("element encodings") {
  const double r = 2.0;
  SUBCASE("resistor at nu = 0") {
    const auto [p, q] = element(ElementKind::Resistor, {r}, 0);
    CHECK(p[0] == r);
    CHECK(q[0] == 1.0);
  }
  SUBCASE("series RL") {
    const auto [p, q] = element(ElementKind::SeriesRL, {1.0, 0.5}, 1);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.5);
    CHECK(q[0] == 1.0);
    CHECK(q[1] == 0.0);
  }
  SUBCASE("capacitor: I = c dV/dt") {
    const auto [p, q] = element(ElementKind::Capacitor, {3.0}, 1);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
    CHECK(q[0] == 0.0);
    CHECK(q[1] == 3.0);
  }
  SUBCASE("inductor: l dI/dt = V") {
    const auto [p, q] = element(ElementKind::Inductor, {2.0}, 1);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 2.0);
    CHECK(q[0] == 1.0);
  }
  SUBCASE("series RLC, relation differentiated once") {
    const auto [p, q] = element(ElementKind::SeriesRLC, {2.0, 3.0, 0.5}, 2);
    CHECK(p[0] == doctest::Approx(2.0));  // 1/c
    CHECK(p[1] == 2.0);                   // r
    CHECK(p[2] == 3.0);                   // l
    CHECK(q[0] == 0.0);
    CHECK(q[1] == 1.0);
    CHECK(q[2] == 0.0);
  }
  SUBCASE("padding to larger nu") {
    const auto [p, q] = element(ElementKind::Resistor, {r}, 2);
    CHECK(p.size() == 3);
    CHECK(p[1] == 0.0);
    CHECK(p[2] == 0.0);
  }
  SUBCASE("nu too small") {
    CHECK_THROWS_AS(element(ElementKind::Capacitor, {1.0}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(element(ElementKind::SeriesRLC, {1.0, 1.0, 1.0}, 1),
                    std::invalid_argument);
  }
  SUBCASE("values must be positive and complete") {
    CHECK_THROWS_AS(element(ElementKind::Resistor, {0.0}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(element(ElementKind::SeriesRL, {1.0}, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("is_homogeneous matches the ratio condition for RL networks") {
  CHECK(is_homogeneous(testutil::rl_network(
      testutil::path_through_3(), testutil::path_boundary_12(),
      Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 4))));
  CHECK_FALSE(is_homogeneous(testutil::rl_network(
      testutil::path_through_3(), testutil::path_boundary_12(),
      Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 5))));
}

TEST_CASE("purely resistive networks are always homogeneous") {
  testutil::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto graph = testutil::random_connected_graph(rng, 10, 20);
    const auto part = testutil::random_partition(rng, graph.vertex_count());
    const Eigen::VectorXd r =
        testutil::random_log_uniform(rng, graph.edge_count(), 1e-2, 1e2);
    CHECK(is_homogeneous(testutil::resistor_network(graph, part, r)));
  }
}

TEST_CASE("scaling an edge relation leaves the edge weights unchanged") {
  testutil::Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const auto graph = testutil::random_connected_graph(rng, 10, 20);
    const auto part = testutil::random_partition(rng, graph.vertex_count());
    const Eigen::VectorXd r =
        testutil::random_log_uniform(rng, graph.edge_count(), 0.1, 10.0);
    auto net = testutil::rl_network(graph, part, r, 2.0 * r);
    const auto before = homogeneous_form(net);

    const Eigen::VectorXd c =
        testutil::random_log_uniform(rng, graph.edge_count(), 0.1, 10.0);
    for (int k = 0; k < graph.edge_count(); ++k) {
      net.p[k] *= c[k];
      net.q[k] *= c[k];
    }
    const auto after = homogeneous_form(net);
    CHECK((after.edge_weight - before.edge_weight).cwiseAbs().maxCoeff() <=
          1e-9 * before.edge_weight.maxCoeff());
  }
}

TEST_CASE("rank1_check is order-invariant") {
  testutil::Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> count(1, 8);
    const int n = count(rng);
    Eigen::VectorXd basis(3);
    basis << 0.3, 1.0, 0.2;
    std::vector<Eigen::VectorXd> vectors;
    const Eigen::VectorXd scales =
        testutil::random_log_uniform(rng, n, 0.1, 10.0);
    for (int k = 0; k < n; ++k) {
      vectors.push_back(scales[k] * basis);
    }
    const auto direct = rank1_check(vectors, 1e-9);
    REQUIRE(direct.has_value());

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::VectorXd> permuted;
    for (int idx : order) {
      permuted.push_back(vectors[static_cast<std::size_t>(idx)]);
    }
    const auto shuffled = rank1_check(permuted, 1e-9);
    REQUIRE(shuffled.has_value());
    CHECK((shuffled->basis - direct->basis).cwiseAbs().maxCoeff() <= 1e-12);
    for (int k = 0; k < n; ++k) {
      CHECK(shuffled->scales[k] ==
            doctest::Approx(direct->scales[order[static_cast<std::size_t>(k)]])
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("homogeneous form reconstructs the original coefficients") {
  testutil::Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto graph = testutil::random_connected_graph(rng, 10, 20);
    const auto part = testutil::random_partition(rng, graph.vertex_count());
    const Eigen::VectorXd r =
        testutil::random_log_uniform(rng, graph.edge_count(), 0.1, 10.0);
    const auto net = testutil::rl_network(graph, part, r, 0.7 * r);
    const auto form = homogeneous_form(net);
    for (int k = 0; k < graph.edge_count(); ++k) {
      const Eigen::VectorXd p_rebuilt = form.lambda[k] * form.p_tilde;
      const Eigen::VectorXd q_rebuilt = form.gamma[k] * form.q_tilde;
      CHECK((p_rebuilt - net.p[k]).cwiseAbs().maxCoeff() <=
            1e-9 * net.p[k].cwiseAbs().maxCoeff());
      CHECK((q_rebuilt - net.q[k]).cwiseAbs().maxCoeff() <=
            1e-9 * net.q[k].cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("element outputs satisfy the coefficient invariants") {
  testutil::Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd values = testutil::random_log_uniform(rng, 3, 1e-2, 1e2);
    const std::vector<double> v{values[0], values[1], values[2]};
    for (const auto kind :
         {ElementKind::Resistor, ElementKind::Inductor, ElementKind::Capacitor,
          ElementKind::SeriesRL, ElementKind::SeriesRLC}) {
      const std::size_t count = kind == ElementKind::SeriesRLC  ? 3
                                : kind == ElementKind::SeriesRL ? 2
                                                                : 1;
      const auto [p, q] =
          element(kind, std::span<const double>(v.data(), count), 3);
      CHECK(p.size() == 4);
      CHECK(q.size() == 4);
      CHECK(p.minCoeff() >= 0.0);
      CHECK(q.minCoeff() >= 0.0);
      CHECK(p.maxCoeff() > 0.0);
      CHECK(q.maxCoeff() > 0.0);
    }
  }
}
