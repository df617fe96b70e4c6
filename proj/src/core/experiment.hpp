#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "network.hpp"
#include "placement.hpp"
#include "text_io.hpp"
#include "topology.hpp"

namespace spinweb {

enum class SaveLevel : std::uint8_t { None, Networks, All };

// Flat key = value configuration. The control parameter of the chosen
// variant (theta or p) may be a comma-separated grid, which makes a sweep.
struct ExperimentConfig {
  int L = 128;
  Variant variant = Variant::FixedH;
  std::vector<double> theta = {DisorderModel::kThetaCritical};
  std::vector<double> p = {0.5};
  PackingKind packing = PackingKind::Spiral;
  PackingParams packing_params;
  double pitch = 0.0;  // hexagonal; 0 matches the spiral node count
  LinkRule rule = LinkRule::NodeExclusive;
  std::size_t samples = 16;
  std::uint64_t seed = 1;
  PathLengthOptions::Mode path_mode = PathLengthOptions::Mode::Auto;
  std::size_t path_sources = 1000;
  double bin_ratio = kDefaultBinRatio;
  std::size_t min_tail = kMinTailPoints;
  SaveLevel save = SaveLevel::Networks;
  // Neither affects results, so neither enters the hash.
  unsigned threads = 0;  // 0 = all hardware threads
  std::filesystem::path output = "spinweb-out";

  struct KeyInfo {
    const char* key;
    const char* help;
    bool hashed;
  };
  static const std::vector<KeyInfo>& keys();

  // Throws ParameterError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  // Throws ParameterError when any module would reject the parameters.
  void validate() const;

  const std::vector<double>& grid() const { return variant == Variant::Diluted ? p : theta; }
  std::string grid_name() const { return variant == Variant::Diluted ? "p" : "theta"; }
  bool is_sweep() const { return grid().size() > 1; }
  DisorderModel model_at(double value) const;
  LatticeSpec spec() const { return LatticeSpec::make(L); }
  unsigned worker_count() const;

  // Every hashed key as "key = value", one per line, in table order.
  std::string canonical_text() const;
  std::uint64_t hash() const { return text::fnv1a64(canonical_text()); }
};

// '#' starts a comment; blank lines are skipped. Syntax errors throw
// ParseError, bad keys or values ParameterError (both with line numbers).
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct SampleSeeds {
  std::uint64_t sample = 0;
  std::uint64_t instance = 0;
  std::uint64_t layout = 0;
  std::uint64_t paths = 0;
};
SampleSeeds sample_seeds(std::uint64_t master, std::size_t grid_index, std::size_t sample_index);

struct SampleResult {
  std::size_t grid_index = 0;
  std::size_t sample_index = 0;
  SampleSeeds seeds;
  double value = 0.0;  // grid value
  std::size_t layout_nodes = 0;
  double coverage = 0.0;
  std::size_t network_links = 0;
  std::size_t lcc_nodes = 0;
  std::size_t lcc_links = 0;
  std::optional<TopologyReport> report;

  // Filled only when artifacts are kept.
  std::optional<QuantumNetwork> lcc;
  std::optional<ClusterDecomposition> decomposition;
  std::optional<NodeLayout> layout;
};

struct Statistic {
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation / sqrt(n); 0 for n = 1
  std::size_t n = 0;
};
Statistic summarize(const std::vector<double>& values);

struct EnsembleAggregate {
  Statistic lcc_links, lcc_nodes, mean_degree, path_length, assortativity, clustering, local_slope, gamma;
  Curve degree;           // P(k) averaged over samples (absent k counts as 0)
  DegreeDistribution pooled_degrees;
  PowerLawFit pooled_fit;
  Curve knn;              // pooled over all nodes of all samples
  Curve local_clustering;
  std::optional<double> pooled_local_slope;
};

struct EnsembleResult {
  std::vector<SampleResult> samples;
  EnsembleAggregate aggregate;
  double pitch = 0.0;  // hexagonal pitch actually used
};

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  std::vector<Statistic> links;
  std::vector<Statistic> nodes;
  std::vector<SampleResult> samples;  // ordered by (grid index, sample index)
};

struct RunOptions {
  bool analyze = true;  // topology report per sample
  bool keep_artifacts = false;
  std::function<void(const std::string&)> progress;
};

// One sample of the full pipeline for grid point `grid_index`.
SampleResult run_sample(const ExperimentConfig& cfg, std::size_t grid_index, std::size_t sample_index,
                        double pitch, const RunOptions& opt);

// Hexagonal pitch for the config: the configured one, or the pitch whose
// node count matches the spiral layout of sample 0.
double resolve_pitch(const ExperimentConfig& cfg, std::size_t grid_index);

EnsembleAggregate aggregate_samples(const std::vector<SampleResult>& samples, const ExperimentConfig& cfg);

// Scalar config (or one grid point): every sample, then the aggregate.
EnsembleResult run_ensemble(const ExperimentConfig& cfg, std::size_t grid_index = 0, const RunOptions& opt = {});

// LCC link count per grid value, mean and SEM over samples.
SweepResult sweep_parameter(const ExperimentConfig& cfg, const RunOptions& opt = {});

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_samples_csv(std::ostream& out, const std::vector<SampleResult>& samples);
void write_aggregate_json(std::ostream& out, const EnsembleResult& result, const ExperimentConfig& cfg);

// Writes every artifact under cfg.output plus manifest.json listing each
// file with its size, content hash and the config hash. Returns the paths
// written, relative to the output directory.
std::vector<std::string> export_ensemble(const EnsembleResult& result, const ExperimentConfig& cfg);
std::vector<std::string> export_sweep(const SweepResult& result, const ExperimentConfig& cfg);

// Manifest of the files already present in a directory (recursively,
// excluding the manifest itself), sorted by path.
void write_manifest(const std::filesystem::path& dir, std::uint64_t config_hash, const std::string& config_text);

}  // namespace spinweb
