#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clusters.hpp"
#include "placement.hpp"

namespace spinweb {

enum class LinkRule : std::uint8_t { NodeExclusive, PairContained };

std::string rule_name(LinkRule r);
LinkRule parse_rule(const std::string& name);

struct Edge {
  std::uint32_t u = 0;  // u < v
  std::uint32_t v = 0;
  std::uint32_t w = 1;  // number of shared clusters

  bool operator==(const Edge&) const = default;
};

// Undirected weighted graph over nodes 0..node_count-1. Edges are sorted by
// (u, v) with u < v and carry no duplicates.
struct QuantumNetwork {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  LinkRule rule = LinkRule::NodeExclusive;
  std::uint64_t instance_seed = 0;
  std::uint64_t layout_seed = 0;
  // Layout (or imported) id of every node; empty means identity.
  std::vector<std::uint32_t> original_ids;

  std::size_t edge_count() const noexcept { return edges.size(); }
  std::uint32_t original_id(std::size_t i) const {
    return original_ids.empty() ? static_cast<std::uint32_t>(i) : original_ids[i];
  }
};

// Throws ContractError on invalid edges (self-loops, unsorted, out of range,
// zero weight).
void validate_network(const QuantumNetwork& net);

// One edge per pair of nodes that share clusters; a cluster links A and B
// iff the nodes it touches are exactly {A, B}, and under PairContained it
// must also have no site outside every node. Weight = number of such
// clusters. Every layout node is kept, linked or not.
QuantumNetwork build_network(const ClusterDecomposition& decomp, const NodeLayout& layout, LinkRule rule);

// Induced subgraph on the component with the most nodes (ties: the one
// holding the smallest node id), re-indexed densely in id order.
QuantumNetwork largest_connected_component(const QuantumNetwork& net);

// Component id (its smallest node) of every node.
std::vector<std::uint32_t> component_labels(const QuantumNetwork& net);

// Number of clusters with sites both inside and outside the region.
std::size_t entanglement_entropy(const ClusterDecomposition& decomp, std::span<const SiteIndex> region);

void write_edgelist(std::ostream& out, const QuantumNetwork& net);
QuantumNetwork read_edgelist(std::istream& in);

struct ImportedGraph {
  QuantumNetwork net;
  std::vector<std::string> labels;  // label of every dense node id
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

// Whitespace-separated "u v" lines (a third column is ignored); blank lines
// and lines starting with '#' are skipped, as is the header of a spinweb edge
// list. Labels are ordered numerically when all are non-negative integers,
// lexicographically otherwise. All weights are 1.
ImportedGraph import_edgelist(std::istream& in);
ImportedGraph import_edgelist(const std::filesystem::path& path);

}  // namespace spinweb
