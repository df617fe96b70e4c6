#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "oracles.hpp"
#include "topology.hpp"

using namespace spinweb;

namespace {

QuantumNetwork triangle() { return oracle::graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
QuantumNetwork path3() { return oracle::graph(3, {{0, 1}, {1, 2}}); }
QuantumNetwork cycle5() { return oracle::graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}); }
QuantumNetwork star(std::uint32_t leaves) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t i = 1; i <= leaves; ++i) e.push_back({0, i});
  return oracle::graph(leaves + 1, e);
}
QuantumNetwork complete(std::uint32_t n) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) e.push_back({i, j});
  return oracle::graph(n, e);
}

// Erdos-Renyi graph restricted to its largest component.
QuantumNetwork random_graph(std::uint32_t n, double p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (coin(gen)) e.push_back({i, j});
  return largest_connected_component(oracle::graph(n, e));
}

// Discrete power law P(k) ~ k^-gamma for k >= k_min by inversion of the
// tabulated CDF.
std::vector<std::size_t> power_law_degrees(std::size_t n, double gamma, std::size_t k_min, std::uint64_t seed) {
  std::vector<double> cdf;
  double z = 0;
  for (std::size_t k = k_min; k < 200000; ++k) z += std::pow(static_cast<double>(k), -gamma), cdf.push_back(z);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, z);
  std::vector<std::size_t> out(n);
  for (auto& k : out) k = k_min + static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u(gen)) - cdf.begin());
  return out;
}

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("degree distributions") {
    CHECK(degree_distribution(Graph(triangle())).counts == std::map<std::size_t, std::size_t>{{2, 3}});
    auto s = degree_distribution(Graph(star(5)));
    CHECK(s.counts == std::map<std::size_t, std::size_t>{{1, 5}, {5, 1}});
    CHECK(s.probability(1) == doctest::Approx(5.0 / 6.0));
    CHECK(s.mean_degree() == doctest::Approx(10.0 / 6.0));
  }

  TEST_CASE("handshake lemma") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto net = random_graph(200, 0.02, seed);
      Graph g(net);
      std::size_t sum = 0;
      for (std::size_t i = 0; i < g.node_count(); ++i) sum += g.degree(i);
      CHECK(sum == 2 * net.edge_count());
    }
  }

  TEST_CASE("analytic shortest paths") {
    CHECK(average_shortest_path(Graph(triangle()))->mean == 1.0);
    CHECK(average_shortest_path(Graph(path3()))->mean == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(average_shortest_path(Graph(cycle5()))->mean == 1.5);
    CHECK_FALSE(average_shortest_path(Graph(oracle::graph(1, {}))).has_value());
    CHECK_THROWS_AS(average_shortest_path(Graph(oracle::graph(4, {{0, 1}, {2, 3}}))), ContractError);
  }

  TEST_CASE("exact shortest paths equal Floyd-Warshall") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto net = random_graph(120, 0.03, seed);
      auto r = average_shortest_path(Graph(net), {PathLengthOptions::Mode::Exact, 0, 0, 2});
      CHECK(r->mean == doctest::Approx(oracle::floyd_mean_distance(net.node_count, net.edges)).epsilon(1e-12));
      CHECK_FALSE(r->sampled);
    }
  }

  TEST_CASE("sampling every source reproduces the exact mean") {
    auto net = random_graph(300, 0.01, 9);
    Graph g(net);
    auto exact = average_shortest_path(g, {PathLengthOptions::Mode::Exact, 0, 0, 1});
    auto all = average_shortest_path(g, {PathLengthOptions::Mode::Sampled, net.node_count, 5, 3});
    CHECK(all->mean == exact->mean);
    CHECK(all->sampled);
  }

  TEST_CASE("sampled means bracket the exact mean") {
    auto net = random_graph(400, 0.008, 2);
    Graph g(net);
    const double exact = average_shortest_path(g, {PathLengthOptions::Mode::Exact, 0, 0, 1})->mean;
    int inside = 0;
    const int trials = 100;
    for (int seed = 0; seed < trials; ++seed) {
      auto r = average_shortest_path(g, {PathLengthOptions::Mode::Sampled, 40, static_cast<std::uint64_t>(seed), 1});
      inside += std::abs(r->mean - exact) <= 3 * r->standard_error;
    }
    CHECK(inside >= 95);
  }

  TEST_CASE("path results do not depend on the thread count") {
    auto net = random_graph(300, 0.01, 4);
    Graph g(net);
    auto a = average_shortest_path(g, {PathLengthOptions::Mode::Sampled, 50, 7, 1});
    auto b = average_shortest_path(g, {PathLengthOptions::Mode::Sampled, 50, 7, 4});
    CHECK(a->mean == b->mean);
    CHECK(a->standard_error == b->standard_error);
  }

  TEST_CASE("assortativity") {
    CHECK(*assortativity(Graph(star(3))) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(*assortativity(Graph(star(7))) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_FALSE(assortativity(Graph(complete(5))).has_value());
    CHECK_FALSE(assortativity(Graph(triangle())).has_value());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto r = assortativity(Graph(random_graph(150, 0.03, seed)));
      REQUIRE(r.has_value());
      CHECK((*r >= -1.0 && *r <= 1.0));
    }
  }

  TEST_CASE("nearest-neighbour degree") {
    CHECK(knn_curve(Graph(triangle())) == Curve{{2, 2, 3}});
    CHECK(knn_curve(Graph(star(5))) == Curve{{1, 5, 5}, {5, 1, 1}});
  }

  TEST_CASE("clustering fixtures") {
    CHECK(*global_clustering(Graph(triangle())) == 1.0);
    CHECK(*global_clustering(Graph(star(4))) == 0.0);
    CHECK_FALSE(global_clustering(Graph(oracle::graph(2, {{0, 1}}))).has_value());
    for (auto c : local_clustering(Graph(triangle()))) CHECK(*c == 1.0);
    auto p = local_clustering(Graph(path3()));
    CHECK_FALSE(p[0].has_value());
    CHECK(*p[1] == 0.0);
    for (std::uint32_t m : {6u, 9u, 12u}) {
      Graph tri(oracle::triangular_lattice(m));
      CHECK(*global_clustering(tri) == doctest::Approx(0.4).epsilon(1e-12));
      CHECK(degree_distribution(tri).counts == std::map<std::size_t, std::size_t>{{6, m * m}});
    }
  }

  TEST_CASE("triangle counts equal the trace formula") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      auto net = random_graph(250, 0.05, seed);
      auto t = triangles_per_node(Graph(net));
      std::uint64_t sum = 0;
      for (auto x : t) sum += x;
      CHECK(static_cast<double>(sum) / 3.0 == oracle::trace_triangles(net.node_count, net.edges));
      for (auto c : local_clustering(Graph(net)))
        if (c) CHECK((*c >= 0.0 && *c <= 1.0));
    }
  }

  TEST_CASE("log binning") {
    Curve c{{1, 1, 1}, {2, 2, 1}, {3, 4, 3}, {4, 8, 1}};
    auto b = log_bin(c, 2.0);
    REQUIRE(b.size() == 3);
    CHECK(b[0].k == doctest::Approx(std::sqrt(2.0)));
    CHECK(b[1].value == doctest::Approx((2.0 + 12.0) / 4.0));
    CHECK(b[1].count == 4);
    CHECK(b[2].k == doctest::Approx(std::pow(2.0, 2.5)));
    Curve line;
    for (int k = 1; k <= 64; ++k) line.push_back({double(k), 3.0 / k, 10});
    CHECK(*log_log_slope(line) == doctest::Approx(-1.0));
  }

  TEST_CASE("local clustering slope recovers an imposed power") {
    Curve c;
    for (int k = 2; k <= 100; ++k) c.push_back({double(k), 0.8 / k, 10});
    CHECK(*local_clustering_slope(c) == doctest::Approx(-1.0).epsilon(0.02));
    Curve sparse{{2, 0.5, 1}, {3, 0.2, 1}};
    CHECK_FALSE(local_clustering_slope(sparse).has_value());
  }

  TEST_CASE("power-law fit recovers gamma = 2.5") {
    auto degrees = power_law_degrees(100000, 2.5, 2, 11);
    auto fit = fit_degree_exponent(degree_distribution_of(degrees));
    REQUIRE(fit.ok());
    CHECK(fit.gamma == doctest::Approx(2.5).epsilon(0.1 / 2.5));
    CHECK(fit.error > 0.0);
    CHECK(fit.k_min >= 1);
  }

  TEST_CASE("power-law fit is consistent with its own error bars") {
    int within = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      auto degrees = power_law_degrees(3000, 2.4, 1, 100 + t);
      auto dist = degree_distribution_of(degrees);
      auto fit = fit_degree_exponent(dist);
      REQUIRE(fit.ok());
      within += std::abs(fit.gamma - 2.4) <= 2 * fit.error;
    }
    CHECK(within >= 180);
  }

  TEST_CASE("degenerate and small distributions are unfittable") {
    auto fit = fit_degree_exponent(degree_distribution_of(std::vector<std::size_t>(500, 6)));
    CHECK_FALSE(fit.ok());
    CHECK_FALSE(fit.reason.empty());
    auto few = fit_degree_exponent(degree_distribution_of({1, 2, 3, 4, 5}));
    CHECK_FALSE(few.ok());
  }

  TEST_CASE("Hurwitz zeta") {
    CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
    CHECK(hurwitz_zeta(2.0, 2.0) == doctest::Approx(M_PI * M_PI / 6.0 - 1.0).epsilon(1e-12));
  }

  TEST_CASE("triangle report and JSON markers") {
    auto r = topology_report(triangle());
    CHECK(r.nodes == 3);
    CHECK(r.edges == 3);
    CHECK(r.path->mean == 1.0);
    CHECK(*r.clustering == 1.0);
    CHECK_FALSE(r.assortativity.has_value());
    std::stringstream s;
    write_report_json(s, r);
    auto j = nlohmann::json::parse(s.str());
    CHECK(j["report_version"] == 1);
    CHECK(j["assortativity"] == "undefined");
    CHECK(j["clustering"]["global"] == 1.0);
    CHECK(j["shortest_path"]["mean"] == 1.0);
    CHECK_THROWS_AS(topology_report(oracle::graph(4, {{0, 1}, {2, 3}})), ContractError);
  }

  TEST_CASE("periodic triangular grid report") {
    auto r = topology_report(oracle::triangular_lattice(20));
    CHECK(*r.clustering == doctest::Approx(0.4));
    CHECK_FALSE(r.assortativity.has_value());
    CHECK(r.degrees.counts.begin()->first == 6);
  }

  TEST_CASE("curve CSV") {
    std::stringstream s;
    write_curve_csv(s, Curve{{1, 0.5, 2}, {2, 0.25, 1}});
    CHECK(s.str() == "k,value,count\n1,0.5,2\n2,0.25,1\n");
  }
}
