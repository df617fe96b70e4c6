#include "network.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "errors.hpp"
#include "text_io.hpp"

namespace spinweb {

std::string rule_name(LinkRule r) { return r == LinkRule::NodeExclusive ? "node-exclusive" : "pair-contained"; }

LinkRule parse_rule(const std::string& name) {
  if (name == "node-exclusive") return LinkRule::NodeExclusive;
  if (name == "pair-contained") return LinkRule::PairContained;
  throw ParameterError("unknown link rule '" + name + "' (node-exclusive, pair-contained)");
}

void validate_network(const QuantumNetwork& net) {
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    const Edge& e = net.edges[i];
    if (e.u >= e.v) throw ContractError("edge " + std::to_string(i) + " is a self-loop or not ordered u < v");
    if (e.v >= net.node_count) throw ContractError("edge " + std::to_string(i) + " references a missing node");
    if (e.w == 0) throw ContractError("edge " + std::to_string(i) + " has zero weight");
    if (i > 0 && !(std::pair{net.edges[i - 1].u, net.edges[i - 1].v} < std::pair{e.u, e.v}))
      throw ContractError("edges are not sorted and unique at " + std::to_string(i));
  }
  if (!net.original_ids.empty() && net.original_ids.size() != net.node_count)
    throw ContractError("original id table has the wrong size");
}

namespace {

std::vector<Edge> collapse(std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
  std::sort(pairs.begin(), pairs.end());
  std::vector<Edge> edges;
  for (const auto& [u, v] : pairs) {
    if (!edges.empty() && edges.back().u == u && edges.back().v == v)
      ++edges.back().w;
    else
      edges.push_back({u, v, 1});
  }
  return edges;
}

}  // namespace

QuantumNetwork build_network(const ClusterDecomposition& decomp, const NodeLayout& layout, LinkRule rule) {
  if (!(decomp.spec == layout.spec))
    throw ContractError("decomposition (L=" + std::to_string(decomp.spec.L) + ") and layout (L=" +
                        std::to_string(layout.spec.L) + ") use different lattices");
  const std::size_t n = decomp.spec.sites();
  if (decomp.labels.size() != n || layout.site_to_node.size() != n)
    throw ContractError("decomposition or layout does not cover the lattice");

  constexpr std::int32_t kMany = -2;
  // First and second node touched by each cluster (kMany once a third
  // appears) and whether it has a site outside every node.
  std::vector<std::int32_t> first(n, kNoNode), second(n, kNoNode);
  std::vector<std::uint8_t> outside(n, 0);
  const auto sizes = decomp.sizes_by_label();
  for (std::size_t s = 0; s < n; ++s) {
    const SiteIndex c = decomp.labels[s];
    if (sizes[c] < 2) continue;
    const std::int32_t node = layout.site_to_node[s];
    if (node == kNoNode) {
      outside[c] = 1;
    } else if (first[c] == kNoNode || first[c] == node) {
      first[c] = node;
    } else if (second[c] == kNoNode || second[c] == node) {
      second[c] = node;
    } else {
      second[c] = kMany;
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t c = 0; c < n; ++c) {
    if (first[c] == kNoNode || second[c] < 0) continue;
    if (rule == LinkRule::PairContained && outside[c]) continue;
    const auto a = static_cast<std::uint32_t>(first[c]), b = static_cast<std::uint32_t>(second[c]);
    pairs.emplace_back(std::min(a, b), std::max(a, b));
  }
  QuantumNetwork net;
  net.node_count = layout.node_count();
  net.edges = collapse(pairs);
  net.rule = rule;
  net.instance_seed = decomp.seed;
  net.layout_seed = layout.seed;
  return net;
}

std::vector<std::uint32_t> component_labels(const QuantumNetwork& net) {
  std::vector<std::uint32_t> parent(net.node_count);
  std::iota(parent.begin(), parent.end(), 0u);
  const auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : net.edges) {
    const auto a = find(e.u), b = find(e.v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  for (std::uint32_t i = 0; i < net.node_count; ++i) parent[i] = find(i);
  return parent;
}

QuantumNetwork largest_connected_component(const QuantumNetwork& net) {
  QuantumNetwork out;
  out.rule = net.rule;
  out.instance_seed = net.instance_seed;
  out.layout_seed = net.layout_seed;
  if (net.node_count == 0) return out;

  const auto comp = component_labels(net);
  std::vector<std::uint32_t> size(net.node_count, 0);
  for (auto c : comp) ++size[c];
  std::uint32_t best = 0;
  for (std::uint32_t c = 0; c < net.node_count; ++c)
    if (size[c] > size[best]) best = c;

  std::vector<std::uint32_t> dense(net.node_count, 0);
  for (std::uint32_t i = 0; i < net.node_count; ++i)
    if (comp[i] == best) {
      dense[i] = static_cast<std::uint32_t>(out.original_ids.size());
      out.original_ids.push_back(net.original_id(i));
    }
  out.node_count = out.original_ids.size();
  for (const Edge& e : net.edges)
    if (comp[e.u] == best) out.edges.push_back({dense[e.u], dense[e.v], e.w});
  return out;
}

std::size_t entanglement_entropy(const ClusterDecomposition& decomp, std::span<const SiteIndex> region) {
  const auto sizes = decomp.sizes_by_label();
  std::map<SiteIndex, std::uint32_t> inside;
  std::set<SiteIndex> seen;
  for (SiteIndex s : region) {
    if (s >= decomp.labels.size()) throw ContractError("region site " + std::to_string(s) + " is off the lattice");
    if (seen.insert(s).second) ++inside[decomp.labels[s]];
  }
  std::size_t count = 0;
  for (const auto& [c, k] : inside)
    if (k < sizes[c]) ++count;
  return count;
}

void write_edgelist(std::ostream& out, const QuantumNetwork& net) {
  out << "# spinweb v1\n";
  out << "nodes=" << net.node_count << " rule=" << rule_name(net.rule) << '\n';
  out << "# provenance instance_seed=" << net.instance_seed << " layout_seed=" << net.layout_seed << '\n';
  if (!net.original_ids.empty()) {
    out << "# ids";
    for (auto id : net.original_ids) out << ' ' << id;
    out << '\n';
  }
  std::string line;
  for (const Edge& e : net.edges) {
    line = std::to_string(e.u);
    line += ' ';
    line += std::to_string(e.v);
    line += ' ';
    line += std::to_string(e.w);
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("failed writing edge list");
}

QuantumNetwork read_edgelist(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!text::next_line(in, line, line_no) || text::trim(line) != "# spinweb v1")
    throw ParseError("expected '# spinweb v1'", line_no ? line_no : 1);
  if (!text::next_line(in, line, line_no)) throw ParseError("missing 'nodes=<n> rule=<rule>' line", line_no + 1);
  auto tok = text::split(line);
  if (tok.size() != 2 || !tok[0].starts_with("nodes=") || !tok[1].starts_with("rule="))
    throw ParseError("expected 'nodes=<n> rule=<rule>'", line_no);
  QuantumNetwork net;
  net.node_count = text::parse_u64(tok[0].substr(6), line_no);
  try {
    net.rule = parse_rule(std::string(tok[1].substr(5)));
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), line_no);
  }
  while (text::next_line(in, line, line_no)) {
    tok = text::split(line);
    if (tok.empty()) continue;
    if (tok[0] == "#") {
      if (tok.size() >= 2 && tok[1] == "provenance") {
        for (std::size_t i = 2; i < tok.size(); ++i) {
          if (tok[i].starts_with("instance_seed=")) net.instance_seed = text::parse_u64(tok[i].substr(14), line_no);
          else if (tok[i].starts_with("layout_seed=")) net.layout_seed = text::parse_u64(tok[i].substr(12), line_no);
          else throw ParseError("unknown provenance key", line_no);
        }
      } else if (tok.size() >= 2 && tok[1] == "ids") {
        for (std::size_t i = 2; i < tok.size(); ++i)
          net.original_ids.push_back(static_cast<std::uint32_t>(text::parse_u64(tok[i], line_no)));
      }
      continue;
    }
    if (tok.size() != 3) throw ParseError("expected 'u v w'", line_no);
    const Edge e{static_cast<std::uint32_t>(text::parse_u64(tok[0], line_no)),
                 static_cast<std::uint32_t>(text::parse_u64(tok[1], line_no)),
                 static_cast<std::uint32_t>(text::parse_u64(tok[2], line_no))};
    if (e.u >= e.v) throw ParseError("edge must satisfy u < v", line_no);
    if (e.v >= net.node_count) throw ParseError("edge references a missing node", line_no);
    if (e.w == 0) throw ParseError("edge weight must be positive", line_no);
    if (!net.edges.empty() && !(std::pair{net.edges.back().u, net.edges.back().v} < std::pair{e.u, e.v}))
      throw ParseError("edges must be sorted by (u, v) without repeats", line_no);
    net.edges.push_back(e);
  }
  try {
    validate_network(net);
  } catch (const ContractError& err) {
    throw ParseError(err.what(), line_no);
  }
  return net;
}

namespace {

bool is_unsigned(const std::string& s) {
  return !s.empty() && s.size() < 20 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

ImportedGraph import_edgelist(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<std::string, std::string>> raw;
  bool spinweb_header = false;
  while (text::next_line(in, line, line_no)) {
    const auto t = text::trim(line);
    if (line_no == 1 && t == "# spinweb v1") spinweb_header = true;
    if (t.empty() || t.starts_with("#")) continue;
    if (spinweb_header && line_no == 2 && t.starts_with("nodes=")) continue;
    const auto tok = text::split(t);
    if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'u v'", line_no);
    raw.emplace_back(std::string(tok[0]), std::string(tok[1]));
  }

  std::vector<std::string> labels;
  for (const auto& [a, b] : raw) {
    labels.push_back(a);
    labels.push_back(b);
  }
  const bool numeric = std::all_of(labels.begin(), labels.end(), is_unsigned);
  const auto less = [numeric](const std::string& a, const std::string& b) {
    if (numeric) return std::stoull(a) < std::stoull(b);
    return a < b;
  };
  std::sort(labels.begin(), labels.end(), less);
  labels.erase(std::unique(labels.begin(), labels.end(),
                           [&](const std::string& a, const std::string& b) { return !less(a, b) && !less(b, a); }),
               labels.end());
  const auto id_of = [&](const std::string& s) {
    return static_cast<std::uint32_t>(std::lower_bound(labels.begin(), labels.end(), s, less) - labels.begin());
  };

  ImportedGraph g;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& [a, b] : raw) {
    const auto u = id_of(a), v = id_of(b);
    if (u == v) {
      ++g.self_loops;
      continue;
    }
    pairs.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0 && pairs[i] == pairs[i - 1]) {
      ++g.duplicate_edges;
      continue;
    }
    g.net.edges.push_back({pairs[i].first, pairs[i].second, 1});
  }
  g.net.node_count = labels.size();
  g.labels = std::move(labels);
  return g;
}

ImportedGraph import_edgelist(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return import_edgelist(in);
}

}  // namespace spinweb
