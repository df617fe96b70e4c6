#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "lattice.hpp"

namespace spinweb {

// Partition of all lattice sites into ground-state clusters. Labels are
// canonical: every site carries the smallest site index of its cluster, so
// two decompositions describe the same partition iff their label arrays are
// equal.
struct ClusterDecomposition {
  LatticeSpec spec;
  DisorderModel model;
  std::uint64_t seed = 0;
  std::vector<SiteIndex> labels;

  std::size_t cluster_count() const;

  // Indexed by label; zero for indices that are not cluster labels.
  std::vector<std::uint32_t> sizes_by_label() const;
};

// Rewrites arbitrary group ids (any value < labels.size()) into canonical
// min-site labels.
void canonicalize_labels(std::vector<SiteIndex>& labels);

// Throws ContractError unless labels has one canonical entry per site.
void validate_decomposition(const ClusterDecomposition& d);

// cluster size -> number of clusters of that size
std::map<std::size_t, std::size_t> cluster_size_histogram(const ClusterDecomposition& d);

void write_decomposition(std::ostream& out, const ClusterDecomposition& d);
ClusterDecomposition read_decomposition(std::istream& in);

}  // namespace spinweb
