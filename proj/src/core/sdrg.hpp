#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "clusters.hpp"
#include "lattice.hpp"

namespace spinweb {

struct SdrgStats {
  std::size_t bond_decimations = 0;
  std::size_t site_decimations = 0;
  std::size_t heap_pushes = 0;
  std::size_t heap_compactions = 0;
  std::size_t max_degree = 0;
  std::size_t generated_bonds = 0;
  std::size_t pruned_bonds = 0;
  // Degree of each cluster at the moment it was removed by a field
  // decimation. A heavy tail here flags pathological instances.
  std::map<std::size_t, std::size_t> decimated_degree_histogram;
};

struct SdrgOptions {
  // Check on every step that the energy scale never increases and that
  // generated terms stay below the decimated one; throws ContractError.
  bool verify_monotone = false;
  // Skip generated bonds that are provably irrelevant (see decimate_site).
  // Disabling it gives the plain all-pairs rule; results are identical.
  bool prune_dominated = true;
};

// Renormalization state of a random transverse-field Ising model on an
// arbitrary graph. Terms are stored as natural logarithms so that long
// chains of products never underflow. Clusters are named by their smallest
// original vertex.
//
// Decimation rules (maximum rule for parallel bonds):
//   bond (a, b):  merge a, b;  h' = h_a h_b / J_ab;  J'_k = max(J_ak, J_bk)
//   field i:      remove i;    J_jk <- max(J_jk, J_ji J_ik / h_i)
class RgState {
 public:
  struct BondInit {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double strength = 0.0;
  };

  // A live term of the Hamiltonian. Fields have a == b; bonds have a < b.
  struct Term {
    double log_strength = 0.0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;

    bool is_field() const noexcept { return a == b; }
    double strength() const;
  };

  // Strengths are linear (not logarithmic) and must be positive; parallel
  // bonds are merged by the maximum rule. Zero-strength bonds are dropped.
  RgState(std::span<const double> fields, std::span<const BondInit> bonds);
  explicit RgState(const DisorderInstance& inst);

  std::size_t vertex_count() const noexcept { return log_field_.size(); }
  std::size_t live_count() const noexcept { return live_; }

  bool alive(std::uint32_t c) const { return alive_.at(c) != 0; }
  double field(std::uint32_t c) const;
  std::optional<double> bond(std::uint32_t a, std::uint32_t b) const;
  std::uint32_t moment(std::uint32_t c) const { return moment_.at(c); }
  std::size_t degree(std::uint32_t c) const { return adj_.at(c).size(); }

  // The globally largest live term. Ties go to bonds before fields, then
  // among fields to the one with fewer bonds, then to the lexicographically
  // smallest (a, b).
  std::optional<Term> peek_max();

  // Preconditions: J_ab >= h_a, h_b (bond) / h_i >= every incident J (field),
  // and the term is the current global maximum (not checked here).
  void decimate_bond(std::uint32_t a, std::uint32_t b);
  void decimate_site(std::uint32_t i);

  // Decimates the current maximum; false once no live term remains.
  bool step();
  // Decimates until the partition is final. May stop with live clusters
  // left once no further merge is possible; labels() is then already final.
  void run();

  // Cluster of every original vertex: the final cluster for removed ones,
  // the live cluster otherwise. Canonical (smallest member).
  std::vector<SiteIndex> labels();

  const SdrgStats& stats() const noexcept { return stats_; }
  void set_options(const SdrgOptions& opt) noexcept { options_ = opt; }

 private:
#pragma pack(push, 4)
  struct Neighbor {
    std::uint32_t id;
    double log_strength;
  };
#pragma pack(pop)

  struct HeapEntry {
    Term term;
    std::uint32_t owner;
    std::uint32_t version;
    std::uint32_t degree;
  };

  struct HeapLess {
    bool operator()(const HeapEntry& x, const HeapEntry& y) const noexcept;
  };

  void add_bond(std::uint32_t a, std::uint32_t b, double log_strength);
  void init_heap();
  void refresh(std::uint32_t c);
  Term best_term(std::uint32_t c) const;
  void push(const HeapEntry& e);
  void compact_heap();
  bool entry_valid(const HeapEntry& e) const noexcept;
  std::uint32_t find_cluster(std::uint32_t v);
  void check_generated(double log_value, double omega) const;
  void generate_couplings(const std::vector<Neighbor>& nb, double omega);
  void sweep_dominated(std::uint32_t c);
  bool merges_exhausted() const;
  static constexpr std::size_t kSweepMinDegree = 8;
  // Margin on every domination inequality so that rounding in later
  // products can never turn a certified bond into a relevant one.
  static double slack(double log_value) noexcept { return 1e-9 * (1.0 + (log_value < 0 ? -log_value : log_value)); }

  // Couplings of a few live witness clusters to every cluster, with O(1)
  // lookup; used to certify that a bond is dominated.
  class WitnessTable {
   public:
    static constexpr std::size_t kMax = 8;
    explicit WitnessTable(RgState& rg) : rg_(rg) {}
    ~WitnessTable();
    WitnessTable(const WitnessTable&) = delete;
    WitnessTable& operator=(const WitnessTable&) = delete;

    std::size_t size() const noexcept { return ids_.size(); }
    void add(std::uint32_t w);
    bool dominates(std::uint32_t j, std::uint32_t k, double log_value) const;

   private:
    RgState& rg_;
    std::vector<std::uint32_t> ids_;
    std::vector<std::array<double, kMax>> rows_;
    std::vector<std::uint32_t> touched_;
  };

  std::vector<double> log_field_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<std::uint32_t> moment_;
  std::vector<std::uint32_t> version_;
  std::vector<std::uint32_t> merged_into_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::int32_t> scratch_pos_;
  std::vector<std::int32_t> witness_row_;
  std::vector<std::uint32_t> sweep_at_;
  std::vector<HeapEntry> heap_;
  std::size_t live_ = 0;
  double last_omega_;
  SdrgOptions options_;
  SdrgStats stats_;
};

// Strong-disorder RG ground state of a FixedH or BoxH instance. Throws
// ContractError for Diluted instances (use percolation_clusters).
ClusterDecomposition run_sdrg(const DisorderInstance& inst, SdrgStats* stats = nullptr,
                              const SdrgOptions& options = {});

}  // namespace spinweb
