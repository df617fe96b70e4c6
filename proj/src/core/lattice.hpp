#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spinweb {

struct ClusterDecomposition;

using SiteIndex = std::uint32_t;

enum class BondDir : std::uint8_t { X = 0, Y = 1 };

// L x L square lattice with periodic boundaries. Site (x, y) has index
// y * L + x and owns its +x and +y bonds, so bond 2 * site + dir.
struct LatticeSpec {
  int L = 0;

  static LatticeSpec make(int L);

  std::size_t sites() const noexcept { return static_cast<std::size_t>(L) * L; }
  std::size_t bonds() const noexcept { return 2 * sites(); }

  SiteIndex site(int x, int y) const noexcept {
    return static_cast<SiteIndex>(y) * static_cast<SiteIndex>(L) + static_cast<SiteIndex>(x);
  }
  int x_of(SiteIndex s) const noexcept { return static_cast<int>(s % static_cast<SiteIndex>(L)); }
  int y_of(SiteIndex s) const noexcept { return static_cast<int>(s / static_cast<SiteIndex>(L)); }

  // Far endpoint of the bond owned by `s` in direction `dir`.
  SiteIndex bond_target(SiteIndex s, BondDir dir) const noexcept {
    const int x = x_of(s), y = y_of(s);
    return dir == BondDir::X ? site((x + 1) % L, y) : site(x, (y + 1) % L);
  }

  static std::size_t bond_index(SiteIndex s, BondDir dir) noexcept {
    return 2 * static_cast<std::size_t>(s) + static_cast<std::size_t>(dir);
  }

  bool operator==(const LatticeSpec&) const = default;
};

enum class Variant : std::uint8_t { FixedH, BoxH, Diluted };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct DisorderModel {
  static constexpr double kThetaCritical = -0.17034;

  Variant variant = Variant::FixedH;
  double theta = kThetaCritical;  // ln h; FixedH and BoxH
  double p = 0.5;                 // bond presence probability; Diluted

  static DisorderModel fixed_h(double theta) { return {Variant::FixedH, theta, 0.0}; }
  static DisorderModel box_h(double theta) { return {Variant::BoxH, theta, 0.0}; }
  static DisorderModel diluted(double p) { return {Variant::Diluted, 0.0, p}; }

  // Throws ParameterError for a non-finite theta or p outside [0, 1].
  void validate() const;

  // "theta=<value>" or "p=<value>", shortest round-trip formatting.
  std::string params() const;

  bool operator==(const DisorderModel&) const = default;
};

// One sampled realization. bonds[2*s + dir] is J for the bond owned by s;
// for Diluted it is a presence flag in {0, 1}. fields[s] is h_s (unused and
// set to 1 for Diluted).
struct DisorderInstance {
  LatticeSpec spec;
  DisorderModel model;
  std::uint64_t seed = 0;
  std::vector<double> bonds;
  std::vector<double> fields;
};

DisorderInstance sample_disorder(const LatticeSpec& spec, const DisorderModel& model,
                                 std::uint64_t seed);

// Header used by instance and decomposition files: "L seed variant params".
std::string lattice_header(const LatticeSpec& spec, std::uint64_t seed, const DisorderModel& model);

struct LatticeHeader {
  LatticeSpec spec;
  std::uint64_t seed = 0;
  DisorderModel model;
};
LatticeHeader parse_lattice_header(const std::string& line, std::size_t line_no);

// Bond-percolation clusters of a Diluted instance (union-find over present
// bonds). Throws ContractError for FixedH/BoxH, which need run_sdrg.
ClusterDecomposition percolation_clusters(const DisorderInstance& inst);

void write_instance(std::ostream& out, const DisorderInstance& inst);
DisorderInstance read_instance(std::istream& in);

}  // namespace spinweb
