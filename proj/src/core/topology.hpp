#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "network.hpp"

namespace spinweb {

// Simple unweighted view of a network in compressed sparse rows. Neighbor
// lists are sorted.
class Graph {
 public:
  explicit Graph(const QuantumNetwork& net);

  std::size_t node_count() const noexcept { return offset_.size() - 1; }
  std::size_t edge_count() const noexcept { return adj_.size() / 2; }
  std::size_t degree(std::size_t i) const { return offset_[i + 1] - offset_[i]; }
  const std::uint32_t* begin(std::size_t i) const { return adj_.data() + offset_[i]; }
  const std::uint32_t* end(std::size_t i) const { return adj_.data() + offset_[i + 1]; }

 private:
  std::vector<std::size_t> offset_;
  std::vector<std::uint32_t> adj_;
};

// One point of a curve over degree: the value at k (or at the geometric
// center of a bin) and how many nodes it averages.
struct CurvePoint {
  double k = 0.0;
  double value = 0.0;
  std::size_t count = 0;

  bool operator==(const CurvePoint&) const = default;
};
using Curve = std::vector<CurvePoint>;

inline constexpr double kDefaultBinRatio = 2.0;

// Bins [b^i, b^(i+1)) over integer k >= 1 labelled by the geometric center
// b^(i + 1/2); values are count-weighted means of the points inside.
Curve log_bin(const Curve& per_degree, double ratio = kDefaultBinRatio);

// Least-squares slope of ln value against ln k over points with at least
// min_count nodes and a positive value; nullopt with fewer than two.
std::optional<double> log_log_slope(const Curve& curve, std::size_t min_count = 1);

struct DegreeDistribution {
  std::map<std::size_t, std::size_t> counts;
  std::size_t nodes = 0;

  double probability(std::size_t k) const;
  double mean_degree() const;
  // P(k) for every present k; count = nodes with degree k.
  Curve curve() const;
  // Bin mass divided by the number of integers in the bin.
  Curve log_binned(double ratio = kDefaultBinRatio) const;
};

DegreeDistribution degree_distribution(const Graph& g);
DegreeDistribution degree_distribution_of(const std::vector<std::size_t>& degrees);

struct PowerLawFit {
  enum class Status : std::uint8_t { Ok, Unfittable };

  Status status = Status::Unfittable;
  std::string reason;
  double gamma = 0.0;
  double error = 0.0;  // from the Fisher information
  std::size_t k_min = 0;
  std::size_t tail = 0;  // samples with k >= k_min
  double ks = 0.0;
  std::optional<double> binned_slope;  // -slope of log-binned P(k), diagnostic

  bool ok() const noexcept { return status == Status::Ok; }
};

inline constexpr std::size_t kMinTailPoints = 50;

// Discrete power law P(k) = k^-gamma / zeta(gamma, k_min) fitted by maximum
// likelihood; k_min minimizes the KS distance over candidates whose tail has
// at least kMinTailPoints samples.
PowerLawFit fit_degree_exponent(const DegreeDistribution& dist, std::size_t min_tail = kMinTailPoints);

// ML exponent for a fixed k_min (the tail must hold two distinct values).
double fit_exponent_fixed_kmin(const DegreeDistribution& dist, std::size_t k_min);

// Hurwitz zeta sum_{k >= q} k^-s, s > 1.
double hurwitz_zeta(double s, double q);

struct PathLengthOptions {
  enum class Mode : std::uint8_t { Auto, Exact, Sampled };

  static constexpr std::size_t kAutoThreshold = 20000;

  Mode mode = Mode::Auto;
  std::size_t sources = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct PathLengthResult {
  double mean = 0.0;
  double standard_error = 0.0;  // across sources; 0 in exact mode
  bool sampled = false;
  std::size_t sources = 0;
  std::uint64_t seed = 0;
};

// Hop-count mean over ordered pairs. Throws ContractError if the graph is
// disconnected; nullopt for fewer than two nodes.
std::optional<PathLengthResult> average_shortest_path(const Graph& g, const PathLengthOptions& opt = {});

// Distances from one source; -1 for unreachable nodes.
std::vector<std::int32_t> bfs_distances(const Graph& g, std::uint32_t source);

// Pearson correlation of the degrees at the two ends of every edge;
// nullopt without edges or with zero variance.
std::optional<double> assortativity(const Graph& g);

// Mean neighbor degree averaged over the nodes of each degree k >= 1.
Curve knn_curve(const Graph& g);

// Triangles through every node.
std::vector<std::uint64_t> triangles_per_node(const Graph& g);

// 6 T / sum_i k_i (k_i - 1); nullopt when the denominator vanishes.
std::optional<double> global_clustering(const Graph& g);

// 2 t_i / (k_i (k_i - 1)) for nodes with k_i >= 2, nullopt otherwise.
std::vector<std::optional<double>> local_clustering(const Graph& g);

// Per-degree mean of C_local over nodes with k >= 2.
Curve local_clustering_curve(const Graph& g);

inline constexpr std::size_t kMinNodesPerBin = 5;

// Slope of ln C_local against ln k over log bins holding at least
// kMinNodesPerBin nodes.
std::optional<double> local_clustering_slope(const Curve& per_degree, double ratio = kDefaultBinRatio);

struct TopologyOptions {
  PathLengthOptions path;
  double bin_ratio = kDefaultBinRatio;
  std::size_t min_tail = kMinTailPoints;
};

struct TopologyReport {
  static constexpr int kVersion = 1;

  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::uint64_t total_weight = 0;
  DegreeDistribution degrees;
  PowerLawFit fit;
  std::optional<PathLengthResult> path;
  std::optional<double> assortativity;
  Curve knn;
  std::optional<double> clustering;
  Curve local_clustering;
  std::optional<double> local_slope;
  std::map<std::string, std::string> config;
};

// Requires a connected network (pass the LCC).
TopologyReport topology_report(const QuantumNetwork& net, const TopologyOptions& opt = {});

void write_report_json(std::ostream& out, const TopologyReport& report, double bin_ratio = kDefaultBinRatio);
void write_curve_csv(std::ostream& out, const Curve& curve);

}  // namespace spinweb
