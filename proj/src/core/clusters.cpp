#include "clusters.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "errors.hpp"
#include "text_io.hpp"

namespace spinweb {

std::size_t ClusterDecomposition::cluster_count() const {
  std::size_t count = 0;
  for (std::size_t s = 0; s < labels.size(); ++s)
    if (labels[s] == s) ++count;
  return count;
}

std::vector<std::uint32_t> ClusterDecomposition::sizes_by_label() const {
  std::vector<std::uint32_t> sizes(labels.size(), 0);
  for (SiteIndex l : labels) ++sizes[l];
  return sizes;
}

void canonicalize_labels(std::vector<SiteIndex>& labels) {
  constexpr SiteIndex kUnset = std::numeric_limits<SiteIndex>::max();
  std::vector<SiteIndex> first(labels.size(), kUnset);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (labels[s] >= labels.size()) throw ContractError("group id out of range");
    if (first[labels[s]] == kUnset) first[labels[s]] = static_cast<SiteIndex>(s);
  }
  for (SiteIndex& l : labels) l = first[l];
}

void validate_decomposition(const ClusterDecomposition& d) {
  if (d.labels.size() != d.spec.sites())
    throw ContractError("decomposition has " + std::to_string(d.labels.size()) + " labels for " +
                        std::to_string(d.spec.sites()) + " sites");
  for (std::size_t s = 0; s < d.labels.size(); ++s) {
    const SiteIndex l = d.labels[s];
    if (l > s || d.labels[l] != l) throw ContractError("labels are not canonical at site " + std::to_string(s));
  }
}

std::map<std::size_t, std::size_t> cluster_size_histogram(const ClusterDecomposition& d) {
  std::map<std::size_t, std::size_t> hist;
  const auto sizes = d.sizes_by_label();
  for (std::uint32_t sz : sizes)
    if (sz > 0) ++hist[sz];
  return hist;
}

void write_decomposition(std::ostream& out, const ClusterDecomposition& d) {
  out << lattice_header(d.spec, d.seed, d.model) << '\n';
  std::string line;
  for (SiteIndex s = 0; s < d.labels.size(); ++s) {
    line.clear();
    line += std::to_string(d.spec.x_of(s));
    line += ' ';
    line += std::to_string(d.spec.y_of(s));
    line += ' ';
    line += std::to_string(d.labels[s]);
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("failed writing cluster decomposition");
}

ClusterDecomposition read_decomposition(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!text::next_line(in, line, line_no)) throw ParseError("empty decomposition file", 1);
  const LatticeHeader h = parse_lattice_header(line, line_no);
  ClusterDecomposition d;
  d.spec = h.spec;
  d.model = h.model;
  d.seed = h.seed;
  d.labels.resize(d.spec.sites());
  for (SiteIndex s = 0; s < d.spec.sites(); ++s) {
    if (!text::next_line(in, line, line_no)) throw ParseError("truncated decomposition", line_no + 1);
    auto tok = text::split(line);
    if (tok.size() != 3) throw ParseError("expected 'x y cluster_id'", line_no);
    const auto x = text::parse_i64(tok[0], line_no);
    const auto y = text::parse_i64(tok[1], line_no);
    if (x < 0 || y < 0 || x >= d.spec.L || y >= d.spec.L ||
        d.spec.site(static_cast<int>(x), static_cast<int>(y)) != s)
      throw ParseError("sites out of order", line_no);
    const auto id = text::parse_u64(tok[2], line_no);
    if (id >= d.spec.sites()) throw ParseError("cluster id out of range", line_no);
    d.labels[s] = static_cast<SiteIndex>(id);
  }
  try {
    validate_decomposition(d);
  } catch (const ContractError& e) {
    throw ParseError(e.what(), line_no);
  }
  return d;
}

}  // namespace spinweb
