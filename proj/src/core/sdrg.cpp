#include "sdrg.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace spinweb {

namespace {

using Term = RgState::Term;

// Strict total order on terms: larger magnitude first, then bonds before
// fields, then lexicographically smaller endpoints.
bool outranks(const Term& x, const Term& y) noexcept {
  if (x.log_strength != y.log_strength) return x.log_strength > y.log_strength;
  if (x.is_field() != y.is_field()) return !x.is_field();
  if (x.a != y.a) return x.a < y.a;
  return x.b < y.b;
}

bool same_term(const Term& x, const Term& y) noexcept {
  return x.log_strength == y.log_strength && x.a == y.a && x.b == y.b;
}

template <class Vec>
std::size_t index_of(const Vec& v, std::uint32_t id) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i].id == id) return i;
  return v.size();
}

template <class Vec>
void swap_remove(Vec& v, std::size_t i) {
  v[i] = v.back();
  v.pop_back();
}

}  // namespace

double RgState::Term::strength() const { return std::exp(log_strength); }

// Equal fields commute (the bonds left behind are the best paths through
// the removed clusters whatever the order), so among them the one with the
// fewest bonds goes first to keep fill-in low.
bool RgState::HeapLess::operator()(const HeapEntry& x, const HeapEntry& y) const noexcept {
  if (same_term(x.term, y.term)) return y.owner < x.owner;
  if (x.term.is_field() && y.term.is_field() && x.term.log_strength == y.term.log_strength &&
      x.degree != y.degree)
    return x.degree > y.degree;
  return outranks(y.term, x.term);
}

RgState::RgState(std::span<const double> fields, std::span<const BondInit> bonds)
    : last_omega_(std::numeric_limits<double>::infinity()) {
  const std::size_t n = fields.size();
  if (n >= std::numeric_limits<std::uint32_t>::max()) throw ParameterError("too many vertices");
  log_field_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(fields[i] > 0.0) || !std::isfinite(fields[i]))
      throw ParameterError("transverse fields must be positive and finite");
    log_field_[i] = std::log(fields[i]);
  }
  adj_.resize(n);
  for (const BondInit& b : bonds) {
    if (b.a >= n || b.b >= n) throw ParameterError("bond endpoint out of range");
    if (b.a == b.b) throw ParameterError("self-coupling bonds are not allowed");
    if (b.strength < 0.0 || !std::isfinite(b.strength))
      throw ParameterError("bond strengths must be non-negative and finite");
    if (b.strength == 0.0) continue;
    add_bond(b.a, b.b, std::log(b.strength));
  }
  init_heap();
}

RgState::RgState(const DisorderInstance& inst)
    : last_omega_(std::numeric_limits<double>::infinity()) {
  const LatticeSpec& spec = inst.spec;
  const std::size_t n = spec.sites();
  log_field_.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (!(inst.fields[s] > 0.0)) throw ContractError("transverse fields must be positive");
    log_field_[s] = std::log(inst.fields[s]);
  }
  adj_.resize(n);
  for (auto& a : adj_) a.reserve(4);
  for (SiteIndex s = 0; s < n; ++s) {
    for (BondDir dir : {BondDir::X, BondDir::Y}) {
      const double j = inst.bonds[LatticeSpec::bond_index(s, dir)];
      if (j <= 0.0) continue;
      add_bond(s, spec.bond_target(s, dir), std::log(j));
    }
  }
  init_heap();
}

void RgState::add_bond(std::uint32_t a, std::uint32_t b, double log_strength) {
  // Parallel bonds (e.g. on an L = 2 torus) merge by the maximum rule.
  const std::size_t ia = index_of(adj_[a], b);
  if (ia < adj_[a].size()) {
    const double merged = std::max(adj_[a][ia].log_strength, log_strength);
    adj_[a][ia].log_strength = merged;
    adj_[b][index_of(adj_[b], a)].log_strength = merged;
    return;
  }
  adj_[a].push_back({b, log_strength});
  adj_[b].push_back({a, log_strength});
}

void RgState::init_heap() {
  const std::size_t n = log_field_.size();
  moment_.assign(n, 1);
  version_.assign(n, 0);
  alive_.assign(n, 1);
  merged_into_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) merged_into_[i] = i;
  scratch_pos_.assign(n, -1);
  witness_row_.assign(n, -1);
  sweep_at_.assign(n, 0);
  live_ = n;
  heap_.reserve(n + n / 2 + 16);
  for (std::uint32_t c = 0; c < n; ++c) {
    stats_.max_degree = std::max(stats_.max_degree, adj_[c].size());
    heap_.push_back({best_term(c), c, version_[c]});
  }
  std::make_heap(heap_.begin(), heap_.end(), HeapLess{});
  stats_.heap_pushes = n;
}

double RgState::field(std::uint32_t c) const {
  if (!alive(c)) throw ContractError("cluster " + std::to_string(c) + " is not live");
  return std::exp(log_field_[c]);
}

std::optional<double> RgState::bond(std::uint32_t a, std::uint32_t b) const {
  if (!alive(a) || !alive(b)) return std::nullopt;
  const auto& la = adj_[a];
  const std::size_t i = index_of(la, b);
  if (i == la.size()) return std::nullopt;
  return std::exp(la[i].log_strength);
}

RgState::Term RgState::best_term(std::uint32_t c) const {
  Term best{log_field_[c], c, c};
  for (const Neighbor& nb : adj_[c]) {
    const Term t{nb.log_strength, std::min(c, nb.id), std::max(c, nb.id)};
    if (outranks(t, best)) best = t;
  }
  return best;
}

bool RgState::entry_valid(const HeapEntry& e) const noexcept {
  return alive_[e.owner] != 0 && version_[e.owner] == e.version;
}

void RgState::push(const HeapEntry& e) {
  heap_.push_back(e);
  std::push_heap(heap_.begin(), heap_.end(), HeapLess{});
  ++stats_.heap_pushes;
}

void RgState::refresh(std::uint32_t c) {
  ++version_[c];
  stats_.max_degree = std::max(stats_.max_degree, adj_[c].size());
  push({best_term(c), c, version_[c], static_cast<std::uint32_t>(adj_[c].size())});
}

void RgState::compact_heap() {
  std::erase_if(heap_, [this](const HeapEntry& e) { return !entry_valid(e); });
  std::make_heap(heap_.begin(), heap_.end(), HeapLess{});
  ++stats_.heap_compactions;
}

std::optional<RgState::Term> RgState::peek_max() {
  if (heap_.size() > 4 * live_ + 1024) compact_heap();
  while (!heap_.empty()) {
    const HeapEntry& top = heap_.front();
    if (entry_valid(top)) return top.term;
    std::pop_heap(heap_.begin(), heap_.end(), HeapLess{});
    heap_.pop_back();
  }
  return std::nullopt;
}

void RgState::check_generated(double log_value, double omega) const {
  if (options_.verify_monotone && log_value > omega)
    throw ContractError("generated term exceeds the decimated energy scale");
}

void RgState::decimate_bond(std::uint32_t a, std::uint32_t b) {
  if (a == b) throw ContractError("bond decimation needs two distinct clusters");
  if (a >= vertex_count() || b >= vertex_count() || !alive_[a] || !alive_[b])
    throw ContractError("bond decimation on a cluster that is not live");
  const std::size_t iab = index_of(adj_[a], b);
  if (iab == adj_[a].size()) throw ContractError("no bond between the given clusters");
  const double omega = adj_[a][iab].log_strength;
  if (log_field_[a] > omega || log_field_[b] > omega)
    throw ContractError("bond is weaker than an endpoint field; it is not decimatable");

  const std::uint32_t keep = std::min(a, b);
  const std::uint32_t gone = std::max(a, b);
  const double merged_field =
      std::min({log_field_[a] + log_field_[b] - omega, log_field_[a], log_field_[b]});
  check_generated(merged_field, omega);

  auto& kept = adj_[keep];
  swap_remove(kept, index_of(kept, gone));
  for (std::size_t i = 0; i < kept.size(); ++i) scratch_pos_[kept[i].id] = static_cast<std::int32_t>(i);

  std::vector<Neighbor> absorbed;
  absorbed.swap(adj_[gone]);
  for (const Neighbor& e : absorbed) {
    if (e.id == keep) continue;
    auto& other = adj_[e.id];
    const std::int32_t pos = scratch_pos_[e.id];
    if (pos >= 0) {
      const double merged = std::max(kept[pos].log_strength, e.log_strength);
      kept[pos].log_strength = merged;
      other[index_of(other, keep)].log_strength = merged;
      swap_remove(other, index_of(other, gone));
    } else {
      kept.push_back(e);
      scratch_pos_[e.id] = static_cast<std::int32_t>(kept.size() - 1);
      other[index_of(other, gone)].id = keep;
    }
  }
  for (const Neighbor& e : kept) scratch_pos_[e.id] = -1;

  log_field_[keep] = merged_field;
  moment_[keep] += moment_[gone];
  alive_[gone] = 0;
  merged_into_[gone] = keep;
  --live_;
  ++stats_.bond_decimations;

  sweep_dominated(keep);
  refresh(keep);
  for (const Neighbor& e : absorbed)
    if (e.id != keep) refresh(e.id);
}

void RgState::decimate_site(std::uint32_t i) {
  if (i >= vertex_count() || !alive_[i]) throw ContractError("field decimation on a cluster that is not live");
  const double omega = log_field_[i];
  for (const Neighbor& e : adj_[i])
    if (e.log_strength > omega)
      throw ContractError("field is weaker than an incident bond; it is not decimatable");

  std::vector<Neighbor> nb;
  nb.swap(adj_[i]);
  for (const Neighbor& e : nb) {
    auto& other = adj_[e.id];
    swap_remove(other, index_of(other, i));
  }

  generate_couplings(nb, omega);

  alive_[i] = 0;
  --live_;
  ++stats_.site_decimations;
  ++stats_.decimated_degree_histogram[nb.size()];
  for (const Neighbor& e : nb) {
    sweep_dominated(e.id);
    refresh(e.id);
  }
}

// A generated coupling g_jk = J_ji J_ik / h_i is dominated, and may be
// dropped without changing any later decimation, when a live l != j, k has
// J_jl > g_jk, J_lk > g_jk and J_jl J_lk / h_l >= g_jk: until l is decimated
// the pair can never be the global maximum, and every way l can disappear
// (merging into j or k, merging elsewhere, or a field decimation that
// regenerates at least J_jl J_lk / h_l) restores or supersedes the bond.
// The conditions only get easier as couplings grow, so a pair found
// dominated against the couplings present when it is examined stays
// dominated after the remaining pairs are added.
//
// Neighbours of i are ranked by J_il. The first strictly separated rank l
// with J_il^2 >= h_i h_l dominates every pair ranked below it once its own
// row is complete. Pairs are added in stages: the rows of the top rank and
// of that cut rank in full, then the rows of the next few ranks checked
// against those, then everything else checked against all of them.
void RgState::generate_couplings(const std::vector<Neighbor>& nb, double omega) {
  constexpr std::size_t kWitnesses = 6;
  const std::size_t d = nb.size();
  if (d < 2) return;

  std::vector<std::uint32_t> rank(d);
  for (std::uint32_t r = 0; r < d; ++r) rank[r] = r;
  std::size_t cut = d;
  if (options_.prune_dominated) {
    std::sort(rank.begin(), rank.end(), [&nb](std::uint32_t x, std::uint32_t y) {
      if (nb[x].log_strength != nb[y].log_strength) return nb[x].log_strength > nb[y].log_strength;
      return nb[x].id < nb[y].id;
    });
    for (std::size_t r = 0; r + 1 < d; ++r) {
      const Neighbor& l = nb[rank[r]];
      if (l.log_strength <= nb[rank[r + 1]].log_strength) continue;
      if (2.0 * l.log_strength - omega - log_field_[l.id] >= slack(omega)) {
        cut = r + 1;
        break;
      }
    }
  }
  // stage[x]: 0 full row, 1 checked witness row, 2 checked, 3 dominated.
  std::vector<std::uint8_t> stage(d, 2);
  if (!options_.prune_dominated) {
    std::fill(stage.begin(), stage.end(), 0);
  } else {
    for (std::size_t r = cut; r < d; ++r) stage[rank[r]] = 3;
    for (std::size_t r = 1; r < std::min(kWitnesses, cut); ++r) stage[rank[r]] = 1;
    stage[rank[0]] = 0;
    stage[rank[cut - 1]] = 0;
  }
  const std::size_t dominated_rows = d - cut;
  stats_.pruned_bonds += dominated_rows * (dominated_rows - (dominated_rows > 0 ? 1 : 0));

  WitnessTable witnesses(*this);

  auto pair_stage = [&stage](std::size_t a, std::size_t b) -> int {
    if (stage[a] == 0 || stage[b] == 0) return 0;
    if (stage[a] == 3 && stage[b] == 3) return -1;
    return std::min<int>(2, std::max(stage[a], stage[b]));
  };

  // Adds the pairs of stage s. Each ordered pair writes its own
  // end; the witness table is fixed during a stage, so both orders agree.
  auto run_stage = [&](std::uint8_t s) {
    std::vector<std::size_t> low;
    for (std::size_t x = 0; x < d; ++x)
      if (stage[x] <= s) low.push_back(x);
    for (std::size_t jx = 0; jx < d; ++jx) {
      auto& aj = adj_[nb[jx].id];
      bool marked = false;
      const bool all_columns = stage[jx] <= s || s == 2;
      const std::size_t ncols = all_columns ? d : low.size();
      for (std::size_t c = 0; c < ncols; ++c) {
        const std::size_t kx = all_columns ? c : low[c];
        if (kx == jx || pair_stage(jx, kx) != s) continue;
        if (!marked) {
          for (std::size_t q = 0; q < aj.size(); ++q) scratch_pos_[aj[q].id] = static_cast<std::int32_t>(q);
          marked = true;
        }
        const std::uint32_t k = nb[kx].id;
        const double g = std::min({nb[jx].log_strength + nb[kx].log_strength - omega,
                                   nb[jx].log_strength, nb[kx].log_strength});
        check_generated(g, omega);
        const std::int32_t pos = scratch_pos_[k];
        if (pos >= 0 && aj[pos].log_strength >= g) continue;
        if (s > 0 && witnesses.dominates(nb[jx].id, k, g)) {
          ++stats_.pruned_bonds;
          continue;
        }
        ++stats_.generated_bonds;
        if (pos >= 0) {
          aj[pos].log_strength = g;
        } else {
          aj.push_back({k, g});
          scratch_pos_[k] = static_cast<std::int32_t>(aj.size() - 1);
        }
      }
      if (marked)
        for (const Neighbor& q : aj) scratch_pos_[q.id] = -1;
    }
  };

  run_stage(0);
  if (options_.prune_dominated) {
    for (std::size_t x = 0; x < d; ++x)
      if (stage[x] == 0) witnesses.add(nb[x].id);
    run_stage(1);
    for (std::size_t x = 0; x < d; ++x)
      if (stage[x] == 1) witnesses.add(nb[x].id);
    run_stage(2);
  }
}

RgState::WitnessTable::~WitnessTable() {
  for (std::uint32_t x : touched_) rg_.witness_row_[x] = -1;
}

void RgState::WitnessTable::add(std::uint32_t w) {
  if (ids_.size() == kMax) throw ContractError("too many witness clusters");
  const std::size_t col = ids_.size();
  ids_.push_back(w);
  for (const Neighbor& e : rg_.adj_[w]) {
    std::int32_t row = rg_.witness_row_[e.id];
    if (row < 0) {
      row = static_cast<std::int32_t>(rows_.size());
      rg_.witness_row_[e.id] = row;
      touched_.push_back(e.id);
      rows_.emplace_back();
      rows_.back().fill(-std::numeric_limits<double>::infinity());
    }
    rows_[row][col] = e.log_strength;
  }
}

bool RgState::WitnessTable::dominates(std::uint32_t j, std::uint32_t k, double log_value) const {
  log_value += slack(log_value);
  const std::int32_t rj = rg_.witness_row_[j];
  const std::int32_t rk = rg_.witness_row_[k];
  if (rj < 0 || rk < 0) return false;
  for (std::size_t w = 0; w < ids_.size(); ++w) {
    const double jl = rows_[rj][w];
    const double lk = rows_[rk][w];
    if (jl > log_value && lk > log_value && jl + lk - rg_.log_field_[ids_[w]] >= log_value) return true;
  }
  return false;
}

// Drops the bonds of c that are dominated through a path of two or three
// bonds (see generate_couplings for the two-bond case). For c - l1 - l2 - x
// the bond J_cx is dominated when every path bond and both two-bond
// segments J_cl1 J_l1l2 / h_l1, J_l1l2 J_l2x / h_l2 exceed J_cx and the
// whole path J_cl1 J_l1l2 J_l2x / (h_l1 h_l2) is at least J_cx: decimating
// or merging either interior cluster leaves a dominating two-bond path or a
// direct bond. Bonds are visited strongest first and only stronger bonds
// still present serve as the first hop, so earlier decisions stay valid.
// The three-bond pass only tries, for each l2, the l1 with the best
// segment c - l1 - l2.
//
// Runs once the degree has grown well past the last swept degree.
void RgState::sweep_dominated(std::uint32_t c) {
  auto& ac = adj_[c];
  if (!options_.prune_dominated || ac.size() < kSweepMinDegree || ac.size() < sweep_at_[c]) return;
  std::sort(ac.begin(), ac.end(), [](const Neighbor& x, const Neighbor& y) {
    if (x.log_strength != y.log_strength) return x.log_strength > y.log_strength;
    return x.id < y.id;
  });
  // witness_row_[l] is the position of a present first hop in `hop`.
  std::vector<double> hop;
  hop.reserve(ac.size());
  auto first_hop = [&](std::uint32_t l) -> double {
    const std::int32_t pos = witness_row_[l];
    return pos < 0 ? -std::numeric_limits<double>::infinity() : hop[pos];
  };
  auto drop = [&](const Neighbor& e) {
    auto& other = adj_[e.id];
    swap_remove(other, index_of(other, c));
    ++stats_.pruned_bonds;
    refresh(e.id);
  };

  std::size_t out = 0;
  for (std::size_t q = 0; q < ac.size(); ++q) {
    const Neighbor e = ac[q];
    const double v = e.log_strength + slack(e.log_strength);
    bool dominated = false;
    for (const Neighbor& xl : adj_[e.id]) {
      const double cl = first_hop(xl.id);
      if (cl > v && xl.log_strength > v && cl + xl.log_strength - log_field_[xl.id] >= v) {
        dominated = true;
        break;
      }
    }
    if (dominated) {
      drop(e);
    } else {
      ac[out] = e;
      hop.push_back(e.log_strength);
      witness_row_[e.id] = static_cast<std::int32_t>(out);
      ++out;
    }
  }
  ac.resize(out);

  struct Segment {
    double value;         // J_cl1 J_l1y / h_l1
    double second_hop;    // J_l1y
    std::uint32_t first;  // l1
  };
  std::vector<Segment> best;
  std::vector<std::uint32_t> reached;
  for (const Neighbor& l1 : ac) {
    const double h1 = log_field_[l1.id];
    for (const Neighbor& y : adj_[l1.id]) {
      if (y.id == c) continue;
      const double value = l1.log_strength + y.log_strength - h1;
      std::int32_t& slot = scratch_pos_[y.id];
      if (slot < 0) {
        slot = static_cast<std::int32_t>(best.size());
        best.push_back({value, y.log_strength, l1.id});
        reached.push_back(y.id);
      } else if (value > best[slot].value) {
        best[slot] = {value, y.log_strength, l1.id};
      }
    }
  }

  std::size_t kept = 0;
  for (std::size_t q = 0; q < ac.size(); ++q) {
    const Neighbor e = ac[q];
    const double v = e.log_strength + slack(e.log_strength);
    bool dominated = false;
    for (const Neighbor& x2 : adj_[e.id]) {
      if (x2.id == c || !(x2.log_strength > v)) continue;
      const std::int32_t slot = scratch_pos_[x2.id];
      if (slot < 0) continue;
      const Segment& s1 = best[slot];
      if (s1.first == e.id) continue;
      const double cl = first_hop(s1.first);
      const double h2 = log_field_[x2.id];
      if (cl > v && s1.second_hop > v && s1.value > v && s1.second_hop + x2.log_strength - h2 > v &&
          s1.value + x2.log_strength - h2 >= v) {
        dominated = true;
        break;
      }
    }
    if (dominated) {
      witness_row_[e.id] = -1;
      drop(e);
    } else {
      ac[kept++] = e;
    }
  }
  ac.resize(kept);
  for (std::uint32_t y : reached) scratch_pos_[y] = -1;
  for (const Neighbor& e : ac) witness_row_[e.id] = -1;
  sweep_at_[c] = static_cast<std::uint32_t>(kept + kept / 2);
}

bool RgState::step() {
  const auto t = peek_max();
  if (!t) return false;
  if (options_.verify_monotone && t->log_strength > last_omega_)
    throw ContractError("energy scale increased during decimation");
  last_omega_ = t->log_strength;
  if (t->is_field()) decimate_site(t->a);
  else decimate_bond(t->a, t->b);
  return true;
}

// The strongest bond never grows and a field only shrinks by merging, so
// once every live field exceeds every live bond no cluster can merge again
// and the remaining field decimations cannot change the partition.
bool RgState::merges_exhausted() const {
  double strongest_bond = -std::numeric_limits<double>::infinity();
  double weakest_field = std::numeric_limits<double>::infinity();
  for (std::uint32_t c = 0; c < vertex_count(); ++c) {
    if (!alive_[c]) continue;
    weakest_field = std::min(weakest_field, log_field_[c]);
    for (const Neighbor& e : adj_[c]) strongest_bond = std::max(strongest_bond, e.log_strength);
  }
  return strongest_bond < weakest_field;
}

void RgState::run() {
  std::size_t next_check = live_;
  while (live_ > 0) {
    if (live_ <= next_check) {
      if (merges_exhausted()) return;
      next_check = live_ / 2;
    }
    if (!step()) return;
  }
}

std::uint32_t RgState::find_cluster(std::uint32_t v) {
  std::uint32_t root = v;
  while (merged_into_[root] != root) root = merged_into_[root];
  while (merged_into_[v] != root) {
    const std::uint32_t next = merged_into_[v];
    merged_into_[v] = root;
    v = next;
  }
  return root;
}

std::vector<SiteIndex> RgState::labels() {
  std::vector<SiteIndex> out(vertex_count());
  for (std::uint32_t v = 0; v < out.size(); ++v) out[v] = find_cluster(v);
  return out;
}

ClusterDecomposition run_sdrg(const DisorderInstance& inst, SdrgStats* stats, const SdrgOptions& options) {
  if (inst.model.variant == Variant::Diluted)
    throw ContractError("run_sdrg does not accept diluted instances; use percolation_clusters");
  RgState state(inst);
  state.set_options(options);
  state.run();
  ClusterDecomposition d;
  d.spec = inst.spec;
  d.model = inst.model;
  d.seed = inst.seed;
  d.labels = state.labels();
  if (stats) *stats = state.stats();
  return d;
}

}  // namespace spinweb
