#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kronred/reduction.hpp"
#include "test_util.hpp"

using namespace kronred;

TEST_CASE("schur complement of the unit path matches naive elimination") {
  const Eigen::MatrixXd l = weighted_laplacian(
      build_incidence(testutil::path_through_3()), Eigen::Vector2d(1, 1));
  const Eigen::MatrixXd s = schur_complement(l, testutil::path_boundary_12());

  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;  // series conductance of two unit edges
  CHECK((s - expected).cwiseAbs().maxCoeff() <= 1e-14);

  const Eigen::MatrixXd oracle =
      testutil::schur_by_elimination(l, {2}, {0, 1});
  CHECK((s - oracle).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("schur complement with no internal vertices is the identity map") {
  const Eigen::MatrixXd l = weighted_laplacian(
      build_incidence(testutil::path_through_3()), Eigen::Vector2d(2, 5));
  const Eigen::MatrixXd s = schur_complement(l, VertexPartition(3, {1, 2, 3}));
  CHECK((s - l).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("schur complement of the unit star matches the star-mesh oracle") {
  const Eigen::MatrixXd l = weighted_laplacian(
      build_incidence(testutil::star_graph()), Eigen::Vector3d(1, 1, 1));
  const Eigen::MatrixXd s = schur_complement(l, testutil::star_boundary());
  REQUIRE(s.rows() == 3);

  const double mesh_r = testutil::star_mesh_resistance(1, 1, 1, 1);
  CHECK(mesh_r == doctest::Approx(3.0));
  for (int i = 0; i < 3; ++i) {
    CHECK(s(i, i) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) {
      if (i != j) {
        CHECK(s(i, j) == doctest::Approx(-1.0 / mesh_r).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("laplacian_to_graph reads edges off the off-diagonal") {
  SUBCASE("half-conductance edge") {
    Eigen::MatrixXd l(2, 2);
    l << 0.5, -0.5, -0.5, 0.5;
    const auto [graph, weights] = laplacian_to_graph(l);
    REQUIRE(graph.edge_count() == 1);
    CHECK(graph.edges()[0] == Edge{1, 2});
    CHECK(weights[0] == doctest::Approx(0.5));
  }
  SUBCASE("unit edge") {
    Eigen::MatrixXd l(2, 2);
    l << 1, -1, -1, 1;
    const auto [graph, weights] = laplacian_to_graph(l);
    REQUIRE(graph.edge_count() == 1);
    CHECK(weights[0] == doctest::Approx(1.0));
  }
  SUBCASE("star schur output becomes the mesh triangle") {
    const Eigen::MatrixXd l = weighted_laplacian(
        build_incidence(testutil::star_graph()), Eigen::Vector3d(1, 1, 1));
    const auto [graph, weights] =
        laplacian_to_graph(schur_complement(l, testutil::star_boundary()));
    REQUIRE(graph.edge_count() == 3);
    CHECK(graph.edges()[0] == Edge{1, 2});
    CHECK(graph.edges()[1] == Edge{1, 3});
    CHECK(graph.edges()[2] == Edge{2, 3});
    for (int k = 0; k < 3; ++k) {
      CHECK(weights[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }
  SUBCASE("positive off-diagonal entries are rejected") {
    Eigen::MatrixXd l(2, 2);
    l << 1, 0.5, 0.5, 1;
    CHECK_THROWS_AS(laplacian_to_graph(l), std::invalid_argument);
  }
  SUBCASE("asymmetry is rejected") {
    Eigen::MatrixXd l(2, 2);
    l << 1, -0.5, -1, 1;
    CHECK_THROWS_AS(laplacian_to_graph(l), std::invalid_argument);
  }
}

TEST_CASE("kron_reduce collapses a homogeneous RL chain to series values") {
  const auto net = testutil::rl_network(
      testutil::path_through_3(), testutil::path_boundary_12(),
      Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 4));
  const auto reduced = kron_reduce(net);

  REQUIRE(reduced.network.graph.edge_count() == 1);
  REQUIRE(reduced.network.graph.vertex_count() == 2);
  CHECK(reduced.boundary_ids == std::vector<int>{1, 2});
  CHECK(reduced.network.nu == 1);

  // Series impedance oracle: r = r1 + r2, l = l1 + l2 read off the reduced
  // relation p_hat I + ... = q_hat0 V, i.e. (p_hat / q_hat0).
  const Eigen::VectorXd& p_hat = reduced.network.p[0];
  const Eigen::VectorXd& q_hat = reduced.network.q[0];
  CHECK(p_hat[0] / q_hat[0] == doctest::Approx(1.0 + 2.0).epsilon(1e-12));
  CHECK(p_hat[1] / q_hat[0] == doctest::Approx(2.0 + 4.0).epsilon(1e-12));

  // With the max-normalized basis (0.5, 1) the reduced weight is 1/6.
  CHECK(reduced.form.p_tilde[1] == doctest::Approx(1.0));
  CHECK(reduced.gamma_hat[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK((p_hat - reduced.form.p_tilde).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q_hat - reduced.gamma_hat[0] * reduced.form.q_tilde)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(reduced.reconstruction_residual <= 1e-10);
}

TEST_CASE("kron_reduce turns the unit-resistor star into the mesh") {
  const auto net =
      testutil::resistor_network(testutil::star_graph(),
                                 testutil::star_boundary(),
                                 Eigen::Vector3d(1, 1, 1));
  const auto reduced = kron_reduce(net);
  REQUIRE(reduced.network.graph.vertex_count() == 3);
  REQUIRE(reduced.network.graph.edge_count() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(reduced.gamma_hat[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // Conductance 1/3 means each mesh branch is a 3-ohm resistor.
    CHECK(reduced.network.p[k][0] / reduced.network.q[k][0] ==
          doctest::Approx(3.0).epsilon(1e-12));
  }
  CHECK(reduced.reconstruction_residual <= 1e-12);
}

TEST_CASE("kron_reduce rejects the rank-2 chains") {
  CHECK_THROWS_AS(kron_reduce(testutil::mixed_resistor_inductor_chain()),
                  NotReducibleError);
  CHECK_THROWS_AS(kron_reduce(testutil::mixed_inductor_capacitor_chain()),
                  NotReducibleError);
  try {
    kron_reduce(testutil::mixed_resistor_inductor_chain());
  } catch (const NotReducibleError& err) {
    CHECK(err.side() == NotReducibleError::Side::Current);
    CHECK(std::string(err.what()).find("rank >= 2") != std::string::npos);
  }
}

TEST_CASE("kron_reduce without internal vertices is idempotent") {
  const auto net = testutil::rl_network(
      DirectedGraph(3, {{1, 2}, {2, 3}, {3, 1}}), VertexPartition(3, {1, 2, 3}),
      Eigen::Vector3d(1, 2, 4), Eigen::Vector3d(0.5, 1, 2));
  const auto once = kron_reduce(net);
  CHECK(once.network.graph.vertex_count() == 3);
  CHECK(once.network.graph.edge_count() == 3);
  const auto twice = kron_reduce(once.network);
  CHECK(twice.network.graph.edges() == once.network.graph.edges());
  CHECK((twice.gamma_hat - once.gamma_hat).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((twice.schur - once.schur).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("parallel edges merge into one reduced edge with summed weight") {
  const auto net = testutil::resistor_network(
      DirectedGraph(2, {{1, 2}, {2, 1}}), VertexPartition(2, {1, 2}),
      Eigen::Vector2d(2, 4));  // conductances 1/2 and 1/4
  const auto reduced = kron_reduce(net);
  REQUIRE(reduced.network.graph.edge_count() == 1);
  CHECK(reduced.gamma_hat[0] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("injection map is the conductance divider") {
  SUBCASE("unit conductances split equally") {
    const auto net = testutil::resistor_network(testutil::path_through_3(),
                                                testutil::path_boundary_12(),
                                                Eigen::Vector2d(1, 1));
    const Eigen::MatrixXd f = injection_map(net);
    REQUIRE(f.rows() == 2);
    REQUIRE(f.cols() == 1);
    CHECK(f(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("conductances 1 and 3 divide 1:3") {
    // Resistors 1 and 1/3 give edge weights (1, 3).
    const auto net = testutil::resistor_network(testutil::path_through_3(),
                                                testutil::path_boundary_12(),
                                                Eigen::Vector2d(1.0, 1.0 / 3.0));
    const Eigen::MatrixXd f = injection_map(net);
    CHECK(f(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(f(1, 0) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("columns sum to one: injected current exits through the boundary") {
    testutil::Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
      const auto graph = testutil::random_connected_graph(rng, 12, 30);
      const auto part = testutil::random_partition(rng, graph.vertex_count());
      if (part.internal().empty()) {
        continue;
      }
      const Eigen::VectorXd r =
          testutil::random_log_uniform(rng, graph.edge_count(), 0.1, 10.0);
      const Eigen::MatrixXd f =
          injection_map(testutil::resistor_network(graph, part, r));
      CHECK((f.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("requires an internal vertex") {
    const auto net = testutil::resistor_network(
        DirectedGraph(2, {{1, 2}}), VertexPartition(2, {1, 2}),
        Eigen::VectorXd::Constant(1, 1.0));
    CHECK_THROWS_AS(injection_map(net), std::invalid_argument);
  }
}

TEST_CASE("random reductions satisfy the laplacian closure invariants") {
  testutil::Rng rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    const auto graph = testutil::random_connected_graph(rng);
    const auto part = testutil::random_partition(rng, graph.vertex_count());
    const Eigen::VectorXd w =
        testutil::random_log_uniform(rng, graph.edge_count(), 1e-2, 1e2);
    const Eigen::MatrixXd l = weighted_laplacian(build_incidence(graph), w);
    const Eigen::MatrixXd s = schur_complement(l, part);
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());

    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-11 * scale);
    CHECK(s.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-11 * scale);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.cols(); ++j) {
        if (i != j) {
          CHECK(s(i, j) <= 1e-11 * scale);
        }
      }
    }
    CHECK((s * Eigen::VectorXd::Ones(s.cols())).cwiseAbs().maxCoeff() <=
          1e-11 * scale);

    // Round trip through the reconstructed graph.
    if (s.rows() > 1) {
      const auto [rgraph, rweights] = laplacian_to_graph(s);
      const Eigen::MatrixXd rebuilt =
          rgraph.edge_count() > 0
              ? weighted_laplacian(build_incidence(rgraph), rweights)
              : Eigen::MatrixXd::Zero(s.rows(), s.cols());
      CHECK((rebuilt - s).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(rgraph.is_connected());
    }
  }
}

TEST_CASE("sequential single-vertex elimination matches block elimination") {
  testutil::Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const auto graph = testutil::random_connected_graph(rng, 12, 30);
    const auto part = testutil::random_partition(rng, graph.vertex_count());
    const Eigen::VectorXd w =
        testutil::random_log_uniform(rng, graph.edge_count(), 1e-1, 1e1);
    const Eigen::MatrixXd l = weighted_laplacian(build_incidence(graph), w);
    const Eigen::MatrixXd block = schur_complement(l, part);

    // One internal vertex at a time, always the highest remaining id so the
    // boundary indices stay put.
    Eigen::MatrixXd current = l;
    std::vector<int> internal = part.internal();
    std::vector<int> remaining_boundary = part.boundary();
    while (!internal.empty()) {
      const int victim = internal.back();
      internal.pop_back();
      std::vector<int> keep;
      for (int v = 1; v <= static_cast<int>(current.rows()); ++v) {
        if (v != victim) {
          keep.push_back(v);
        }
      }
      const VertexPartition step(static_cast<int>(current.rows()), keep);
      current = schur_complement(current, step);
    }
    (void)remaining_boundary;
    CHECK((current - block).cwiseAbs().maxCoeff() <=
          1e-9 * std::max(1.0, block.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("kron_reduce satisfies the reduced-laplacian identity") {
  testutil::Rng rng(67);
  int successes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto graph = testutil::random_connected_graph(rng);
    const auto part = testutil::random_partition(rng, graph.vertex_count());
    const Eigen::VectorXd r =
        testutil::random_log_uniform(rng, graph.edge_count(), 1e-2, 1e2);
    const auto reduced =
        kron_reduce(testutil::resistor_network(graph, part, r));
    CHECK(reduced.reconstruction_residual <= 1e-10);
    CHECK(reduced.network.graph.is_connected());
    CHECK(validate(reduced.network).empty());
    ++successes;
  }
  CHECK(successes == 100);
}
