#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "rng.hpp"

namespace spinweb {

// Circle on the L x L torus; center coordinates in [0, L).
struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;

  bool operator==(const Disk&) const = default;
};

enum class PackingKind : std::uint8_t { Spiral, Hexagonal };

std::string packing_name(PackingKind k);
PackingKind parse_packing(const std::string& name);

struct PackingParams {
  static constexpr double kHexDensity = 0.9068996821171089;  // pi / (2 sqrt 3)

  double gamma = 2.67;
  double r_min = 2.0;
  double r_max = 0.0;  // 0 selects L / 8
  double coverage = 0.3;
  double gap = 1.0;
  int failure_budget = 1000;

  double resolved_r_max(const LatticeSpec& spec) const { return r_max > 0.0 ? r_max : spec.L / 8.0; }
  // Throws ParameterError.
  void validate(const LatticeSpec& spec) const;
};

inline constexpr std::int32_t kNoNode = -1;

struct NodeLayout {
  LatticeSpec spec;
  std::uint64_t seed = 0;
  PackingKind kind = PackingKind::Spiral;
  PackingParams params;
  double pitch = 0.0;  // hexagonal only, after adjustment to the torus
  std::size_t failures = 0;  // spiral: consecutive failures at the end

  std::vector<Disk> disks;
  // Node id of every site, or kNoNode.
  std::vector<std::int32_t> site_to_node;
  double coverage = 0.0;
  bool complete = false;
  std::vector<std::string> warnings;

  std::size_t node_count() const noexcept { return disks.size(); }
  std::size_t covered_sites() const;
  // Radius used to turn a disk into lattice sites.
  double discretization_radius(const Disk& d) const;
};

// Truncated power law: r_min * u^(-1/(gamma-1)), redrawn while r > r_max.
double sample_radius(Rng& rng, double gamma, double r_min, double r_max);
// Inverse-CDF step for a given u in (0, 1], without truncation.
double radius_from_uniform(double u, double gamma, double r_min);

// Sites whose torus distance to the center is at most disk.r.
std::vector<SiteIndex> discretize_disk(const Disk& disk, const LatticeSpec& spec);

// Squared torus distance between two points.
double torus_distance2(double ax, double ay, double bx, double by, double L);

// Outward spiral of tangent disks (centre distance r1 + r2 + gap), each
// region discretized at r - gap / 2.
NodeLayout pack_spiral(const LatticeSpec& spec, std::uint64_t seed, const PackingParams& params);

// Equal disks on a triangular lattice wrapped onto the torus. Regions are
// discretized at the full radius; the pitch already keeps them apart.
NodeLayout pack_hexagonal(const LatticeSpec& spec, double coverage, double pitch);

// Region radius giving the requested coverage for a triangular lattice of
// the given pitch.
double hex_node_radius(double pitch, double coverage);
// Pitch whose triangular lattice has about `nodes` sites on the torus.
double hex_pitch_for_nodes(const LatticeSpec& spec, std::size_t nodes);

// Throws ContractError if two disks overlap or two regions share a site.
void validate_layout(const NodeLayout& layout);

void write_layout(std::ostream& out, const NodeLayout& layout, bool with_site_map = false);
NodeLayout read_layout(std::istream& in);

}  // namespace spinweb
