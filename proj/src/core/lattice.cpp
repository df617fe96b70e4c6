#include "lattice.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "clusters.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "text_io.hpp"

namespace spinweb {

LatticeSpec LatticeSpec::make(int L) {
  if (L < 2) throw ParameterError("lattice size L must be at least 2, got " + std::to_string(L));
  if (L > 65535) throw ParameterError("lattice size L must be at most 65535");
  return LatticeSpec{L};
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::FixedH: return "fixed-h";
    case Variant::BoxH: return "box-h";
    case Variant::Diluted: return "diluted";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "fixed-h") return Variant::FixedH;
  if (name == "box-h") return Variant::BoxH;
  if (name == "diluted") return Variant::Diluted;
  throw ParameterError("unknown disorder variant '" + name + "' (fixed-h, box-h, diluted)");
}

void DisorderModel::validate() const {
  if (variant == Variant::Diluted) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("bond probability p must lie in [0, 1]");
  } else if (!std::isfinite(theta)) {
    throw ParameterError("control parameter theta must be finite");
  }
}

std::string DisorderModel::params() const {
  if (variant == Variant::Diluted) return "p=" + text::format_double(p);
  return "theta=" + text::format_double(theta);
}

DisorderInstance sample_disorder(const LatticeSpec& spec, const DisorderModel& model,
                                 std::uint64_t seed) {
  LatticeSpec::make(spec.L);
  model.validate();

  DisorderInstance inst;
  inst.spec = spec;
  inst.model = model;
  inst.seed = seed;
  inst.bonds.resize(spec.bonds());
  inst.fields.resize(spec.sites());

  Rng rng(seed);
  if (model.variant == Variant::Diluted) {
    for (double& j : inst.bonds) j = rng.uniform() < model.p ? 1.0 : 0.0;
    std::fill(inst.fields.begin(), inst.fields.end(), 1.0);
    return inst;
  }

  for (double& j : inst.bonds) j = rng.uniform_open_closed();
  const double h = std::exp(model.theta);
  if (model.variant == Variant::FixedH) {
    std::fill(inst.fields.begin(), inst.fields.end(), h);
  } else {
    for (double& f : inst.fields) f = h * rng.uniform_open_closed();
  }
  return inst;
}

namespace {

SiteIndex find_root(std::vector<SiteIndex>& parent, SiteIndex s) {
  while (parent[s] != s) {
    parent[s] = parent[parent[s]];
    s = parent[s];
  }
  return s;
}

}  // namespace

ClusterDecomposition percolation_clusters(const DisorderInstance& inst) {
  if (inst.model.variant != Variant::Diluted)
    throw ContractError("percolation_clusters requires a diluted instance; use run_sdrg for " +
                        variant_name(inst.model.variant));
  const LatticeSpec& spec = inst.spec;
  const std::size_t n = spec.sites();

  // Roots are always the smallest member, so find() yields canonical labels.
  std::vector<SiteIndex> parent(n);
  std::iota(parent.begin(), parent.end(), SiteIndex{0});
  for (SiteIndex s = 0; s < n; ++s) {
    for (BondDir dir : {BondDir::X, BondDir::Y}) {
      if (inst.bonds[LatticeSpec::bond_index(s, dir)] == 0.0) continue;
      SiteIndex a = find_root(parent, s);
      SiteIndex b = find_root(parent, spec.bond_target(s, dir));
      if (a == b) continue;
      if (a < b) parent[b] = a;
      else parent[a] = b;
    }
  }

  ClusterDecomposition d;
  d.spec = spec;
  d.model = inst.model;
  d.seed = inst.seed;
  d.labels.resize(n);
  for (SiteIndex s = 0; s < n; ++s) d.labels[s] = find_root(parent, s);
  return d;
}

std::string lattice_header(const LatticeSpec& spec, std::uint64_t seed, const DisorderModel& model) {
  return std::to_string(spec.L) + " " + std::to_string(seed) + " " + variant_name(model.variant) +
         " " + model.params();
}

LatticeHeader parse_lattice_header(const std::string& line, std::size_t line_no) {
  auto tok = text::split(line);
  if (tok.size() != 4) throw ParseError("expected header 'L seed variant params'", line_no);
  LatticeHeader h;
  const auto L = text::parse_i64(tok[0], line_no);
  if (L < 2 || L > 65535) throw ParseError("lattice size out of range", line_no);
  h.spec = LatticeSpec{static_cast<int>(L)};
  h.seed = text::parse_u64(tok[1], line_no);
  try {
    h.model.variant = parse_variant(std::string(tok[2]));
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), line_no);
  }
  const std::string_view param = tok[3];
  const auto eq = param.find('=');
  if (eq == std::string_view::npos) throw ParseError("expected theta=<v> or p=<v>", line_no);
  const auto key = param.substr(0, eq);
  const double value = text::parse_double(param.substr(eq + 1), line_no);
  if (h.model.variant == Variant::Diluted) {
    if (key != "p") throw ParseError("diluted header requires p=<v>", line_no);
    h.model.theta = 0.0;
    h.model.p = value;
  } else {
    if (key != "theta") throw ParseError("header requires theta=<v>", line_no);
    h.model.theta = value;
    h.model.p = 0.0;
  }
  return h;
}

void write_instance(std::ostream& out, const DisorderInstance& inst) {
  const LatticeSpec& spec = inst.spec;
  out << lattice_header(spec, inst.seed, inst.model) << '\n';
  for (SiteIndex s = 0; s < spec.sites(); ++s)
    out << spec.x_of(s) << ' ' << spec.y_of(s) << ' ' << text::format_double(inst.fields[s]) << '\n';
  for (SiteIndex s = 0; s < spec.sites(); ++s) {
    for (BondDir dir : {BondDir::X, BondDir::Y}) {
      out << spec.x_of(s) << ' ' << spec.y_of(s) << ' ' << (dir == BondDir::X ? 'x' : 'y') << ' '
          << text::format_double(inst.bonds[LatticeSpec::bond_index(s, dir)]) << '\n';
    }
  }
  if (!out) throw IoError("failed writing disorder instance");
}

DisorderInstance read_instance(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!text::next_line(in, line, line_no)) throw ParseError("empty instance file", 1);
  const LatticeHeader h = parse_lattice_header(line, line_no);
  DisorderInstance inst;
  inst.spec = h.spec;
  inst.model = h.model;
  inst.seed = h.seed;
  const LatticeSpec& spec = inst.spec;
  inst.fields.assign(spec.sites(), 0.0);
  inst.bonds.assign(spec.bonds(), 0.0);

  auto coord = [&](std::string_view tok) {
    const auto v = text::parse_i64(tok, line_no);
    if (v < 0 || v >= spec.L) throw ParseError("coordinate out of range", line_no);
    return static_cast<int>(v);
  };

  for (SiteIndex s = 0; s < spec.sites(); ++s) {
    if (!text::next_line(in, line, line_no)) throw ParseError("truncated site section", line_no + 1);
    auto tok = text::split(line);
    if (tok.size() != 3) throw ParseError("expected 'x y h'", line_no);
    if (spec.site(coord(tok[0]), coord(tok[1])) != s) throw ParseError("sites out of order", line_no);
    inst.fields[s] = text::parse_double(tok[2], line_no);
  }
  for (std::size_t b = 0; b < spec.bonds(); ++b) {
    if (!text::next_line(in, line, line_no)) throw ParseError("truncated bond section", line_no + 1);
    auto tok = text::split(line);
    if (tok.size() != 4 || (tok[2] != "x" && tok[2] != "y")) throw ParseError("expected 'x y dir J'", line_no);
    const SiteIndex s = spec.site(coord(tok[0]), coord(tok[1]));
    const BondDir dir = tok[2] == "x" ? BondDir::X : BondDir::Y;
    if (LatticeSpec::bond_index(s, dir) != b) throw ParseError("bonds out of order", line_no);
    inst.bonds[b] = text::parse_double(tok[3], line_no);
  }
  return inst;
}

}  // namespace spinweb
