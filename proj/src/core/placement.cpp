#include "placement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <utility>

#include "errors.hpp"
#include "text_io.hpp"

namespace spinweb {

std::string packing_name(PackingKind k) { return k == PackingKind::Spiral ? "spiral" : "hexagonal"; }

PackingKind parse_packing(const std::string& name) {
  if (name == "spiral") return PackingKind::Spiral;
  if (name == "hexagonal") return PackingKind::Hexagonal;
  throw ParameterError("unknown packing '" + name + "' (spiral, hexagonal)");
}

void PackingParams::validate(const LatticeSpec& spec) const {
  const double rmax = resolved_r_max(spec);
  if (!(gamma > 1.0)) throw ParameterError("radius exponent gamma must exceed 1");
  if (!(r_min >= 2.0)) throw ParameterError("minimum radius must be at least 2");
  if (!(r_min < rmax)) throw ParameterError("minimum radius must be below the maximum radius");
  if (!(coverage > 0.0 && coverage < kHexDensity))
    throw ParameterError("coverage target must lie in (0, pi/(2 sqrt 3))");
  if (!(gap >= 0.0 && gap < 2.0 * r_min)) throw ParameterError("gap must lie in [0, 2 r_min)");
  if (failure_budget < 1) throw ParameterError("failure budget must be positive");
}

std::size_t NodeLayout::covered_sites() const {
  return static_cast<std::size_t>(
      std::count_if(site_to_node.begin(), site_to_node.end(), [](std::int32_t n) { return n != kNoNode; }));
}

double NodeLayout::discretization_radius(const Disk& d) const {
  return kind == PackingKind::Spiral ? d.r - params.gap / 2.0 : d.r;
}

double radius_from_uniform(double u, double gamma, double r_min) {
  return r_min * std::pow(u, -1.0 / (gamma - 1.0));
}

double sample_radius(Rng& rng, double gamma, double r_min, double r_max) {
  if (!(gamma > 1.0)) throw ParameterError("radius exponent gamma must exceed 1");
  if (!(r_min >= 2.0 && r_min < r_max)) throw ParameterError("radii must satisfy 2 <= r_min < r_max");
  for (;;) {
    const double r = radius_from_uniform(rng.uniform_open_closed(), gamma, r_min);
    if (r <= r_max) return r;
  }
}

namespace {

double wrap_delta(double d, double L) {
  d = std::fabs(d);
  d = std::fmod(d, L);
  return std::min(d, L - d);
}

double wrap_coord(double x, double L) {
  x = std::fmod(x, L);
  if (x < 0) x += L;
  return x >= L ? 0.0 : x;
}

}  // namespace

double torus_distance2(double ax, double ay, double bx, double by, double L) {
  const double dx = wrap_delta(ax - bx, L), dy = wrap_delta(ay - by, L);
  return dx * dx + dy * dy;
}

std::vector<SiteIndex> discretize_disk(const Disk& disk, const LatticeSpec& spec) {
  const int L = spec.L;
  const double r2 = disk.r * disk.r;
  std::vector<SiteIndex> out;
  if (disk.r < 0) return out;
  if (2.0 * disk.r + 2.0 >= L) {
    for (int y = 0; y < L; ++y)
      for (int x = 0; x < L; ++x)
        if (torus_distance2(x, y, disk.cx, disk.cy, L) <= r2) out.push_back(spec.site(x, y));
    return out;
  }
  const int x0 = static_cast<int>(std::floor(disk.cx - disk.r)), x1 = static_cast<int>(std::ceil(disk.cx + disk.r));
  const int y0 = static_cast<int>(std::floor(disk.cy - disk.r)), y1 = static_cast<int>(std::ceil(disk.cy + disk.r));
  for (int y = y0; y <= y1; ++y) {
    const double dy = y - disk.cy;
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - disk.cx;
      if (dx * dx + dy * dy <= r2) out.push_back(spec.site(((x % L) + L) % L, ((y % L) + L) % L));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void paint(NodeLayout& layout, std::size_t id) {
  const Disk& d = layout.disks[id];
  const auto sites = discretize_disk({d.cx, d.cy, layout.discretization_radius(d)}, layout.spec);
  if (sites.empty()) throw ContractError("node " + std::to_string(id) + " covers no site");
  for (SiteIndex s : sites) {
    if (layout.site_to_node[s] != kNoNode)
      throw ContractError("nodes " + std::to_string(layout.site_to_node[s]) + " and " + std::to_string(id) +
                          " share site " + std::to_string(s));
    layout.site_to_node[s] = static_cast<std::int32_t>(id);
  }
}

void paint_all(NodeLayout& layout) {
  layout.site_to_node.assign(layout.spec.sites(), kNoNode);
  for (std::size_t i = 0; i < layout.disks.size(); ++i) paint(layout, i);
  layout.coverage = static_cast<double>(layout.covered_sites()) / static_cast<double>(layout.spec.sites());
}

// Uniform grid over the torus. A disk is filed under every cell met by the
// square of half-side r + gap/2 around it, so two disks closer than
// r1 + r2 + gap always share a cell.
class DiskGrid {
 public:
  DiskGrid(int L, double cell) : n_(std::max(1, static_cast<int>(L / cell))), w_(double(L) / n_), cells_(n_ * n_) {}

  template <class F>
  void for_cells(double cx, double cy, double half, F&& f) const {
    const auto range = [&](double c) {
      int lo = static_cast<int>(std::floor((c - half) / w_)), hi = static_cast<int>(std::floor((c + half) / w_));
      if (hi - lo + 1 >= n_) lo = 0, hi = n_ - 1;
      return std::pair{lo, hi};
    };
    const auto [x0, x1] = range(cx);
    const auto [y0, y1] = range(cy);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) f(((y % n_) + n_) % n_ * n_ + ((x % n_) + n_) % n_);
  }

  void insert(std::uint32_t id, const Disk& d, double gap) {
    for_cells(d.cx, d.cy, d.r + gap / 2.0, [&](int c) { cells_[c].push_back(id); });
  }

  const std::vector<std::uint32_t>& cell(int c) const { return cells_[c]; }

 private:
  int n_;
  double w_;
  std::vector<std::vector<std::uint32_t>> cells_;
};

class SpiralPacker {
 public:
  explicit SpiralPacker(NodeLayout& layout) : layout_(layout), L_(layout.spec.L), gap_(layout.params.gap), grid_(L_, 8.0) {
    for (int k = 0; k < 360; ++k) {
      const double a = k * std::numbers::pi / 180.0;
      dir_[k] = {std::cos(a), std::sin(a)};
    }
  }

  void add(const Disk& d) {
    const auto id = static_cast<std::uint32_t>(layout_.disks.size());
    layout_.disks.push_back(d);
    grid_.insert(id, d, gap_);
    stamp_.push_back(0);
    infeasible_from_.push_back(std::numeric_limits<double>::infinity());
    angle_limit_.emplace_back();
    angle_limit_.back().fill(std::numeric_limits<float>::infinity());
    active_.insert({center_distance(d.cx, d.cy) - d.r, id});
    paint(layout_, id);
  }

  // Feasible tangent position closest to the lattice center; ties go to the
  // smaller angle, then the older disk.
  bool place(double r, Disk& out) {
    const double r_min = layout_.params.r_min;
    struct Best {
      double dist = std::numeric_limits<double>::infinity();
      int angle = 0;
      std::uint32_t disk = 0;
      bool found = false;
    } best;
    std::vector<std::uint32_t> dead;
    for (const auto& [key, id] : active_) {
      if (best.found && key - r - gap_ > best.dist) break;
      if (r >= infeasible_from_[id]) continue;
      bool any = false;
      auto& limit = angle_limit_[id];
      for (int k = 0; k < 360; ++k) {
        if (r >= limit[k]) continue;
        double cx, cy;
        candidate(id, r, k, cx, cy);
        const double dist = center_distance(cx, cy);
        if (best.found && (dist > best.dist || (dist == best.dist && (k > best.angle || (k == best.angle && id > best.disk)))))
          continue;
        if (!feasible(cx, cy, r, id)) {
          block(limit[k], r);
          continue;
        }
        any = true;
        best = {dist, k, id, true};
      }
      if (!any && !best.found) {
        infeasible_from_[id] = std::min(infeasible_from_[id], r);
        if (r > r_min && !has_room(id, r_min)) infeasible_from_[id] = r_min;
        if (infeasible_from_[id] <= r_min) dead.push_back(id);
      }
    }
    for (std::uint32_t id : dead) {
      const Disk& d = layout_.disks[id];
      active_.erase({center_distance(d.cx, d.cy) - d.r, id});
    }
    if (!best.found) return false;
    candidate(best.disk, r, best.angle, out.cx, out.cy);
    out.r = r;
    return true;
  }

 private:
  double center_distance(double x, double y) const {
    return std::sqrt(torus_distance2(x, y, L_ / 2.0, L_ / 2.0, L_));
  }

  void candidate(std::uint32_t id, double r, int k, double& cx, double& cy) const {
    const Disk& d = layout_.disks[id];
    const double s = d.r + r + gap_;
    cx = wrap_coord(d.cx + s * dir_[k][0], L_);
    cy = wrap_coord(d.cy + s * dir_[k][1], L_);
  }

  bool feasible(double cx, double cy, double r, std::uint32_t parent) {
    ++epoch_;
    bool ok = true;
    grid_.for_cells(cx, cy, r + gap_ / 2.0, [&](int c) {
      if (!ok) return;
      for (std::uint32_t e : grid_.cell(c)) {
        if (stamp_[e] == epoch_) continue;
        stamp_[e] = epoch_;
        const Disk& d = layout_.disks[e];
        const double need = d.r + r + gap_ - (e == parent ? 1e-9 : 1e-12) * (1.0 + d.r + r);
        if (torus_distance2(cx, cy, d.cx, d.cy, L_) < need * need) {
          ok = false;
          return;
        }
      }
    });
    return ok;
  }

  bool has_room(std::uint32_t id, double r) {
    auto& limit = angle_limit_[id];
    for (int k = 0; k < 360; ++k) {
      if (r >= limit[k]) continue;
      double cx, cy;
      candidate(id, r, k, cx, cy);
      if (feasible(cx, cy, r, id)) return true;
      block(limit[k], r);
    }
    return false;
  }

  // Lowers a cached limit to r, rounding up so the float never claims more.
  static void block(float& limit, double r) {
    float f = static_cast<float>(r);
    if (f < r) f = std::nextafter(f, std::numeric_limits<float>::infinity());
    limit = std::min(limit, f);
  }

  NodeLayout& layout_;
  int L_;
  double gap_;
  DiskGrid grid_;
  std::array<std::array<double, 2>, 360> dir_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t epoch_ = 0;
  // Smallest radius known not to fit against each disk. Tangent disks at a
  // fixed angle are nested in r, and disks are only ever added, so this
  // stays valid.
  std::vector<double> infeasible_from_;
  // The same bound per disk and tangency angle.
  std::vector<std::array<float, 360>> angle_limit_;
  std::set<std::pair<double, std::uint32_t>> active_;
};

}  // namespace

NodeLayout pack_spiral(const LatticeSpec& spec, std::uint64_t seed, const PackingParams& params) {
  LatticeSpec::make(spec.L);
  params.validate(spec);
  NodeLayout layout;
  layout.spec = spec;
  layout.seed = seed;
  layout.kind = PackingKind::Spiral;
  layout.params = params;
  layout.params.r_max = params.resolved_r_max(spec);
  layout.site_to_node.assign(spec.sites(), kNoNode);

  Rng rng(seed);
  const double N = static_cast<double>(spec.sites());
  SpiralPacker packer(layout);
  packer.add({spec.L / 2.0, spec.L / 2.0, sample_radius(rng, params.gamma, params.r_min, layout.params.r_max)});
  std::size_t covered = layout.covered_sites();
  int failures = 0;
  while (covered / N < params.coverage && failures < params.failure_budget) {
    const double r = sample_radius(rng, params.gamma, params.r_min, layout.params.r_max);
    Disk d;
    if (!packer.place(r, d)) {
      ++failures;
      continue;
    }
    failures = 0;
    packer.add(d);
    covered += discretize_disk({d.cx, d.cy, layout.discretization_radius(d)}, spec).size();
  }
  layout.failures = static_cast<std::size_t>(failures);
  layout.coverage = covered / N;
  layout.complete = layout.coverage >= params.coverage;
  if (!layout.complete)
    layout.warnings.push_back("coverage target unreachable: stopped at " + text::format_double(layout.coverage) +
                              " after " + std::to_string(failures) + " consecutive failures");
  return layout;
}

double hex_node_radius(double pitch, double coverage) {
  return pitch * std::sqrt(coverage * std::numbers::sqrt3 / (2.0 * std::numbers::pi));
}

double hex_pitch_for_nodes(const LatticeSpec& spec, std::size_t nodes) {
  if (nodes == 0) throw ParameterError("node count must be positive");
  return spec.L * std::sqrt(2.0 / (std::numbers::sqrt3 * static_cast<double>(nodes)));
}

NodeLayout pack_hexagonal(const LatticeSpec& spec, double coverage, double pitch) {
  LatticeSpec::make(spec.L);
  if (!(coverage > 0.0 && coverage < PackingParams::kHexDensity))
    throw ParameterError("coverage target must lie in (0, pi/(2 sqrt 3))");
  if (!(pitch > 0.0 && pitch <= spec.L)) throw ParameterError("pitch must lie in (0, L]");

  const double L = spec.L;
  const int nx = std::max(1, static_cast<int>(std::lround(L / pitch)));
  int ny = static_cast<int>(std::lround(L / (pitch * std::numbers::sqrt3 / 2.0) / 2.0)) * 2;
  ny = std::max(ny, 2);
  const double px = L / nx, row = L / ny;
  const double r_u = std::sqrt(coverage * px * row / std::numbers::pi);
  if (r_u < 2.0) throw ParameterError("node radius " + text::format_double(r_u) + " is below 2 lattice units");
  const double diag = std::hypot(px / 2.0, row);
  if (!(std::min(px, diag) > 2.0 * r_u))
    throw ParameterError("pitch too small for disjoint nodes at this coverage");

  NodeLayout layout;
  layout.spec = spec;
  layout.kind = PackingKind::Hexagonal;
  layout.params.coverage = coverage;
  layout.params.r_min = layout.params.r_max = r_u;
  layout.params.gap = 0.0;
  layout.pitch = px;
  const double distortion = std::max(std::fabs(px / pitch - 1.0), std::fabs(row / (pitch * std::numbers::sqrt3 / 2.0) - 1.0));
  if (distortion > 0.01)
    layout.warnings.push_back("pitch " + text::format_double(pitch) + " adjusted to " + text::format_double(px) +
                              " x row height " + text::format_double(row) + " to fit the torus");
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      layout.disks.push_back({wrap_coord((i + 0.5 * (j % 2) + 0.25) * px, L), (j + 0.5) * row, r_u});
  paint_all(layout);
  layout.complete = true;
  return layout;
}

void validate_layout(const NodeLayout& layout) {
  const double L = layout.spec.L;
  const double gap = layout.kind == PackingKind::Spiral ? layout.params.gap : 0.0;
  for (std::size_t i = 0; i < layout.disks.size(); ++i)
    for (std::size_t j = i + 1; j < layout.disks.size(); ++j) {
      const Disk &a = layout.disks[i], &b = layout.disks[j];
      const double need = (a.r + b.r + gap) * (1.0 - 1e-9);
      if (torus_distance2(a.cx, a.cy, b.cx, b.cy, L) < need * need)
        throw ContractError("disks " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  NodeLayout copy = layout;
  paint_all(copy);
  if (copy.site_to_node != layout.site_to_node) throw ContractError("site map does not match the disks");
}

void write_layout(std::ostream& out, const NodeLayout& layout, bool with_site_map) {
  const auto& p = layout.params;
  out << layout.spec.L << ' ' << layout.seed << ' ' << text::format_double(p.gamma) << ' '
      << text::format_double(p.r_min) << ' ' << text::format_double(p.r_max) << ' '
      << text::format_double(p.coverage) << '\n';
  out << "# packing=" << packing_name(layout.kind) << " gap=" << text::format_double(p.gap)
      << " pitch=" << text::format_double(layout.pitch) << " budget=" << p.failure_budget
      << " nodes=" << layout.disks.size() << " achieved=" << text::format_double(layout.coverage)
      << " complete=" << (layout.complete ? 1 : 0) << " failures=" << layout.failures << '\n';
  for (std::size_t i = 0; i < layout.disks.size(); ++i) {
    const Disk& d = layout.disks[i];
    out << i << ' ' << text::format_double(d.cx) << ' ' << text::format_double(d.cy) << ' '
        << text::format_double(d.r) << '\n';
  }
  if (with_site_map) {
    out << "sitemap\n";
    std::string line;
    for (int y = 0; y < layout.spec.L; ++y) {
      line.clear();
      for (int x = 0; x < layout.spec.L; ++x) {
        if (x) line += ' ';
        line += std::to_string(layout.site_to_node[layout.spec.site(x, y)]);
      }
      line += '\n';
      out << line;
    }
  }
  if (!out) throw IoError("failed writing node layout");
}

NodeLayout read_layout(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!text::next_line(in, line, line_no)) throw ParseError("empty layout file", 1);
  auto tok = text::split(line);
  if (tok.size() != 6) throw ParseError("expected header 'L seed gamma r_min r_max coverage'", line_no);
  NodeLayout layout;
  const auto L = text::parse_i64(tok[0], line_no);
  if (L < 2 || L > 65535) throw ParseError("lattice size out of range", line_no);
  layout.spec = LatticeSpec{static_cast<int>(L)};
  layout.seed = text::parse_u64(tok[1], line_no);
  layout.params.gamma = text::parse_double(tok[2], line_no);
  layout.params.r_min = text::parse_double(tok[3], line_no);
  layout.params.r_max = text::parse_double(tok[4], line_no);
  layout.params.coverage = text::parse_double(tok[5], line_no);

  if (!text::next_line(in, line, line_no) || !line.starts_with("#")) throw ParseError("expected '# packing=...' line", line_no);
  std::map<std::string, std::string, std::less<>> kv;
  for (auto t : text::split(std::string_view(line).substr(1))) {
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value, got '" + std::string(t) + "'", line_no);
    kv.emplace(std::string(t.substr(0, eq)), std::string(t.substr(eq + 1)));
  }
  const auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(std::string("missing key '") + key + "'", line_no);
    return it->second;
  };
  try {
    layout.kind = parse_packing(get("packing"));
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), line_no);
  }
  layout.params.gap = text::parse_double(get("gap"), line_no);
  layout.pitch = text::parse_double(get("pitch"), line_no);
  layout.params.failure_budget = static_cast<int>(text::parse_i64(get("budget"), line_no));
  const auto nodes = text::parse_u64(get("nodes"), line_no);
  const double achieved = text::parse_double(get("achieved"), line_no);
  layout.complete = text::parse_u64(get("complete"), line_no) != 0;
  layout.failures = text::parse_u64(get("failures"), line_no);

  for (std::uint64_t i = 0; i < nodes; ++i) {
    if (!text::next_line(in, line, line_no)) throw ParseError("truncated disk list", line_no + 1);
    tok = text::split(line);
    if (tok.size() != 4) throw ParseError("expected 'id cx cy r'", line_no);
    if (text::parse_u64(tok[0], line_no) != i) throw ParseError("disk ids out of order", line_no);
    const Disk d{text::parse_double(tok[1], line_no), text::parse_double(tok[2], line_no),
                 text::parse_double(tok[3], line_no)};
    if (!(d.cx >= 0 && d.cx < L && d.cy >= 0 && d.cy < L && d.r > 0)) throw ParseError("disk outside the torus", line_no);
    layout.disks.push_back(d);
  }
  try {
    paint_all(layout);
  } catch (const ContractError& e) {
    throw ParseError(e.what(), line_no);
  }
  if (layout.coverage != achieved) throw ParseError("achieved coverage does not match the disks", line_no);

  if (text::next_line(in, line, line_no) && text::trim(line) == "sitemap") {
    for (int y = 0; y < layout.spec.L; ++y) {
      if (!text::next_line(in, line, line_no)) throw ParseError("truncated site map", line_no + 1);
      tok = text::split(line);
      if (tok.size() != static_cast<std::size_t>(L)) throw ParseError("site map row has wrong length", line_no);
      for (int x = 0; x < layout.spec.L; ++x)
        if (text::parse_i64(tok[x], line_no) != layout.site_to_node[layout.spec.site(x, y)])
          throw ParseError("site map disagrees with the disks", line_no);
    }
  }
  return layout;
}

}  // namespace spinweb
