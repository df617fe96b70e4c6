#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "clusters.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "network.hpp"
#include "oracles.hpp"
#include "placement.hpp"
#include "sdrg.hpp"

using namespace spinweb;

namespace {

NodeLayout manual_layout(const LatticeSpec& spec, std::vector<Disk> disks) {
  NodeLayout layout;
  layout.spec = spec;
  layout.kind = PackingKind::Hexagonal;
  layout.disks = std::move(disks);
  layout.site_to_node.assign(spec.sites(), kNoNode);
  for (std::size_t id = 0; id < layout.disks.size(); ++id)
    for (auto s : discretize_disk(layout.disks[id], spec)) layout.site_to_node[s] = static_cast<std::int32_t>(id);
  layout.coverage = static_cast<double>(layout.covered_sites()) / spec.sites();
  layout.complete = true;
  return layout;
}

// Singletons everywhere except the given groups.
ClusterDecomposition manual_clusters(const LatticeSpec& spec, const std::vector<std::vector<SiteIndex>>& groups) {
  ClusterDecomposition d;
  d.spec = spec;
  d.labels.resize(spec.sites());
  for (SiteIndex s = 0; s < spec.sites(); ++s) d.labels[s] = s;
  for (const auto& g : groups)
    for (auto s : g) d.labels[s] = g.front();
  canonicalize_labels(d.labels);
  return d;
}

std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edge_map(const QuantumNetwork& net) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> m;
  for (const auto& e : net.edges) m[{e.u, e.v}] = e.w;
  return m;
}

struct Fixture {
  LatticeSpec spec = LatticeSpec::make(16);
  NodeLayout layout = manual_layout(spec, {{4, 4, 2}, {10, 4, 2}, {4, 10, 2}});
  SiteIndex a = spec.site(4, 4), a2 = spec.site(5, 4), b = spec.site(10, 4), b2 = spec.site(10, 5),
            c = spec.site(4, 10), out = spec.site(13, 13), out2 = spec.site(12, 12);
};

std::vector<ClusterDecomposition> oracle_decompositions(int L) {
  std::vector<ClusterDecomposition> out;
  const auto spec = LatticeSpec::make(L);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    out.push_back(run_sdrg(sample_disorder(spec, DisorderModel::fixed_h(DisorderModel::kThetaCritical), seed)));
    out.push_back(percolation_clusters(sample_disorder(spec, DisorderModel::diluted(0.4 + 0.01 * seed), seed)));
  }
  return out;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE_FIXTURE(Fixture, "a cluster inside exactly two nodes links them under both rules") {
    auto d = manual_clusters(spec, {{a, b}});
    for (auto rule : {LinkRule::NodeExclusive, LinkRule::PairContained}) {
      auto net = build_network(d, layout, rule);
      CHECK(net.node_count == 3);
      REQUIRE(net.edges.size() == 1);
      CHECK(net.edges[0] == Edge{0, 1, 1});
    }
  }

  TEST_CASE_FIXTURE(Fixture, "outside sites only matter under the strict rule") {
    auto d = manual_clusters(spec, {{a, b, out}});
    CHECK(build_network(d, layout, LinkRule::NodeExclusive).edges.size() == 1);
    CHECK(build_network(d, layout, LinkRule::PairContained).edges.empty());
  }

  TEST_CASE_FIXTURE(Fixture, "a cluster touching three nodes links nothing") {
    auto d = manual_clusters(spec, {{a, b, c}});
    CHECK(build_network(d, layout, LinkRule::NodeExclusive).edges.empty());
    CHECK(build_network(d, layout, LinkRule::PairContained).edges.empty());
  }

  TEST_CASE_FIXTURE(Fixture, "parallel clusters add up to the weight") {
    auto d = manual_clusters(spec, {{a, b}, {a2, b2, out}, {c, out2}});
    auto net = build_network(d, layout, LinkRule::NodeExclusive);
    REQUIRE(net.edges.size() == 1);
    CHECK(net.edges[0].w == 2);
    CHECK(build_network(d, layout, LinkRule::PairContained).edges[0].w == 1);
  }

  TEST_CASE_FIXTURE(Fixture, "mismatched lattices are a contract violation") {
    auto d = manual_clusters(LatticeSpec::make(8), {});
    CHECK_THROWS_AS(build_network(d, layout, LinkRule::NodeExclusive), ContractError);
  }

  TEST_CASE("builder equals the brute-force reference on L = 32") {
    const auto spec = LatticeSpec::make(32);
    PackingParams p;
    std::vector<NodeLayout> layouts{pack_spiral(spec, 1, p), pack_spiral(spec, 2, p), pack_hexagonal(spec, 0.3, 8.0)};
    std::size_t linked = 0;
    for (const auto& d : oracle_decompositions(32))
      for (const auto& layout : layouts)
        for (auto rule : {LinkRule::NodeExclusive, LinkRule::PairContained}) {
          auto net = build_network(d, layout, rule);
          validate_network(net);
          CHECK(edge_map(net) == oracle::brute_links(d, layout, rule));
          CHECK(net.node_count == layout.node_count());
          linked += net.edges.size();
        }
    CHECK(linked > 0);
  }

  TEST_CASE("strict edges are a sub-multiset and degrees respect the area law") {
    const auto spec = LatticeSpec::make(32);
    PackingParams p;
    auto layout = pack_spiral(spec, 4, p);
    for (const auto& d : oracle_decompositions(32)) {
      auto relaxed = edge_map(build_network(d, layout, LinkRule::NodeExclusive));
      for (auto [pair, w] : edge_map(build_network(d, layout, LinkRule::PairContained)))
        CHECK(w <= relaxed[pair]);
      std::vector<std::size_t> wdeg(layout.node_count());
      for (auto [pair, w] : relaxed) wdeg[pair.first] += w, wdeg[pair.second] += w;
      for (std::size_t id = 0; id < layout.node_count(); ++id) {
        std::vector<SiteIndex> region;
        for (SiteIndex s = 0; s < spec.sites(); ++s)
          if (layout.site_to_node[s] == static_cast<std::int32_t>(id)) region.push_back(s);
        CHECK(wdeg[id] <= entanglement_entropy(d, region));
      }
    }
  }

  TEST_CASE("entanglement entropy counts boundary clusters") {
    const auto spec = LatticeSpec::make(8);
    auto d = manual_clusters(spec, {{0, 1}});
    std::vector<SiteIndex> all(spec.sites());
    for (SiteIndex s = 0; s < spec.sites(); ++s) all[s] = s;
    CHECK(entanglement_entropy(d, all) == 0);
    std::vector<SiteIndex> one{0};
    CHECK(entanglement_entropy(d, one) == 1);
    std::vector<SiteIndex> dup{0, 0, 1};
    CHECK(entanglement_entropy(d, dup) == 0);
    std::vector<SiteIndex> off{64};
    CHECK_THROWS_AS(entanglement_entropy(d, off), ContractError);
  }

  TEST_CASE("entanglement entropy equals a brute-force double scan") {
    std::mt19937_64 gen(5);
    const auto ds = oracle_decompositions(32);
    for (int t = 0; t < 100; ++t) {
      const auto& d = ds[t % ds.size()];
      std::vector<bool> inside(d.labels.size());
      std::vector<SiteIndex> region;
      const double fraction = std::uniform_real_distribution<double>(0.01, 0.9)(gen);
      for (SiteIndex s = 0; s < inside.size(); ++s)
        if (std::bernoulli_distribution(fraction)(gen)) inside[s] = true, region.push_back(s);
      CHECK(entanglement_entropy(d, region) == oracle::brute_entropy(d, inside));
    }
  }

  TEST_CASE("largest connected component") {
    auto connected = oracle::graph(4, {{0, 1}, {1, 2}, {2, 3}});
    auto same = largest_connected_component(connected);
    CHECK(same.edges == connected.edges);
    CHECK(same.node_count == 4);

    auto split = oracle::graph(9, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 6}, {6, 7}});
    auto lcc = largest_connected_component(split);
    CHECK(lcc.node_count == 5);
    CHECK(lcc.edges.size() == 4);
    CHECK(lcc.original_id(0) == 3);
    CHECK(lcc.original_id(4) == 7);

    auto tie = oracle::graph(6, {{4, 5}, {1, 2}});
    CHECK(largest_connected_component(tie).original_id(0) == 1);
    CHECK(largest_connected_component(QuantumNetwork{}).node_count == 0);
  }

  TEST_CASE("component labels equal breadth-first labelling on L = 64 outputs") {
    const auto spec = LatticeSpec::make(64);
    PackingParams p;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto d = percolation_clusters(sample_disorder(spec, DisorderModel::diluted(0.45), seed));
      auto layout = pack_spiral(spec, seed, p);
      auto net = build_network(d, layout, LinkRule::NodeExclusive);
      const auto comp = oracle::bfs_components(net.node_count, net.edges);
      CHECK(component_labels(net) == comp);
      std::map<std::uint32_t, std::size_t> size;
      for (auto c : comp) ++size[c];
      std::size_t best = 0;
      std::uint32_t root = 0;
      for (auto [c, n] : size)
        if (n > best) best = n, root = c;
      auto lcc = largest_connected_component(net);
      CHECK(lcc.node_count == best);
      for (std::size_t i = 0; i < lcc.node_count; ++i) CHECK(comp[lcc.original_id(i)] == root);
    }
  }

  TEST_CASE("edge lists round trip bit-exactly") {
    auto net = oracle::graph(5, {{0, 1}, {1, 2}, {3, 4}});
    net.edges[1].w = 3;
    net.instance_seed = 12;
    net.layout_seed = 99;
    auto lcc = largest_connected_component(net);
    for (const auto& g : {net, lcc}) {
      std::stringstream s;
      write_edgelist(s, g);
      const std::string first = s.str();
      CHECK(first.rfind("# spinweb v1\n", 0) == 0);
      auto back = read_edgelist(s);
      CHECK(back.edges == g.edges);
      CHECK(back.node_count == g.node_count);
      CHECK(back.original_ids == g.original_ids);
      std::stringstream again;
      write_edgelist(again, back);
      CHECK(again.str() == first);
    }
  }

  TEST_CASE("malformed edge lists report the line") {
    std::stringstream s("# spinweb v1\nnodes=3 rule=node-exclusive\n0 1 1\n1 x 1\n");
    try {
      read_edgelist(s);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    std::stringstream loop("# spinweb v1\nnodes=3 rule=node-exclusive\n1 1 1\n");
    CHECK_THROWS_AS(read_edgelist(loop), ParseError);
  }

  TEST_CASE("importing plain edge lists") {
    std::stringstream path("1 2\n2 3");
    auto g = import_edgelist(path);
    CHECK(g.net.node_count == 3);
    CHECK(g.net.edges == std::vector<Edge>{{0, 1, 1}, {1, 2, 1}});

    std::stringstream dup("# comment\n\n1 2\n2 1\n3 3\n");
    auto h = import_edgelist(dup);
    CHECK(h.net.edges.size() == 1);
    CHECK(h.duplicate_edges == 1);
    CHECK(h.self_loops == 1);

    std::stringstream labels("10 9\n9 100\n");
    auto n = import_edgelist(labels);
    CHECK(n.labels == std::vector<std::string>{"9", "10", "100"});

    std::stringstream bad("1 2\n3\n");
    try {
      import_edgelist(bad);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("export, import and export again is a fixed point") {
    const auto spec = LatticeSpec::make(64);
    PackingParams p;
    auto d = percolation_clusters(sample_disorder(spec, DisorderModel::diluted(0.45), 3));
    auto lcc = largest_connected_component(build_network(d, pack_spiral(spec, 3, p), LinkRule::NodeExclusive));
    REQUIRE(lcc.edges.size() > 3);
    std::stringstream s;
    write_edgelist(s, lcc);
    auto imported = import_edgelist(s);
    CHECK(imported.net.node_count == lcc.node_count);
    std::vector<Edge> unweighted = lcc.edges;
    for (auto& e : unweighted) e.w = 1;
    CHECK(imported.net.edges == unweighted);
    std::stringstream first, second;
    write_edgelist(first, imported.net);
    auto again = import_edgelist(first);
    write_edgelist(second, again.net);
    std::stringstream first_copy;
    write_edgelist(first_copy, imported.net);
    CHECK(second.str() == first_copy.str());
  }
}
