#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clusters.hpp"
#include "experiment.hpp"
#include "lattice.hpp"
#include "network.hpp"
#include "oracles.hpp"
#include "placement.hpp"
#include "sdrg.hpp"
#include "topology.hpp"

using namespace spinweb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string show(const std::optional<double>& v) { return v ? fmt("%.4g", *v) : "undefined"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome rule_fidelity() {
  const int trials = 1000;
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> u(0.05, 1.0), ratio(100.0, 1000.0);
  double worst_bond = 0, worst_site = 0;
  for (int t = 0; t < trials; ++t) {
    const double h1 = u(gen), h2 = u(gen), J = ratio(gen) * std::max(h1, h2);
    const auto E = oracle::ising_spectrum({h1, h2}, {{0, 1, J}});
    std::vector<double> h{h1, h2};
    std::vector<RgState::BondInit> b{{0, 1, J}};
    RgState st(h, b);
    st.decimate_bond(0, 1);
    const double predicted = 2 * st.field(0);
    worst_bond = std::max(worst_bond, std::abs((E[1] - E[0]) - predicted) / predicted);
    if (std::abs(predicted - 2 * h1 * h2 / J) > 1e-12 * predicted) return {false, "bond rule differs from 2 h_i h_j / J"};
  }
  for (int t = 0; t < trials; ++t) {
    const double J1 = u(gen), J2 = u(gen), hi = ratio(gen) * std::max(J1, J2);
    const auto E = oracle::ising_spectrum({0.0, hi, 0.0}, {{0, 1, J1}, {1, 2, J2}});
    const double inferred = (E[2] - E[0]) / 2;
    std::vector<double> h{1e-12, hi, 1e-12};
    std::vector<RgState::BondInit> b{{0, 1, J1}, {1, 2, J2}};
    RgState st(h, b);
    st.decimate_site(1);
    const double predicted = *st.bond(0, 2);
    worst_site = std::max(worst_site, std::abs(inferred - predicted) / predicted);
  }
  return {worst_bond <= 0.01 && worst_site <= 0.02,
          fmt("%d trials each; worst relative error bond %.2e (tol 1e-2), site %.2e (tol 2e-2)", trials, worst_bond,
              worst_site)};
}

Outcome oracle_equivalence() {
  const auto spec = LatticeSpec::make(32);
  const int seeds = 20;
  int label_mismatch = 0, network_mismatch = 0, entropy_mismatch = 0, networks = 0, regions = 0;
  std::size_t links = 0;
  std::vector<ClusterDecomposition> ds;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto diluted = sample_disorder(spec, DisorderModel::diluted(0.3 + 0.02 * seed), seed);
    auto perc = percolation_clusters(diluted);
    label_mismatch += perc.labels != oracle::flood_fill(diluted);
    ds.push_back(std::move(perc));
    ds.push_back(run_sdrg(sample_disorder(spec, DisorderModel::fixed_h(DisorderModel::kThetaCritical), seed)));
  }
  PackingParams p;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto layout = i % 3 == 2 ? pack_hexagonal(spec, 0.3, 8.0) : pack_spiral(spec, 100 + i, p);
    for (auto rule : {LinkRule::NodeExclusive, LinkRule::PairContained}) {
      const auto net = build_network(ds[i], layout, rule);
      std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> got;
      for (const auto& e : net.edges) got[{e.u, e.v}] = e.w;
      network_mismatch += got != oracle::brute_links(ds[i], layout, rule);
      links += net.edges.size();
      ++networks;
    }
  }
  std::mt19937_64 gen(77);
  for (int t = 0; t < 200; ++t, ++regions) {
    const auto& d = ds[t % ds.size()];
    std::vector<bool> inside(d.labels.size());
    std::vector<SiteIndex> region;
    if (t % 2 == 0) {
      const double fraction = std::uniform_real_distribution<double>(0.01, 0.9)(gen);
      for (SiteIndex s = 0; s < inside.size(); ++s)
        if (std::bernoulli_distribution(fraction)(gen)) inside[s] = true, region.push_back(s);
    } else {
      std::uniform_real_distribution<double> c(0.0, 32.0), r(1.0, 10.0);
      for (auto s : discretize_disk({c(gen), c(gen), r(gen)}, spec)) inside[s] = true, region.push_back(s);
    }
    entropy_mismatch += entanglement_entropy(d, region) != oracle::brute_entropy(d, inside);
  }
  return {label_mismatch == 0 && network_mismatch == 0 && entropy_mismatch == 0 && links > 0,
          fmt("%d seeds: percolation mismatches %d/%d, network mismatches %d/%d (%zu links), entropy mismatches %d/%d",
              seeds, label_mismatch, seeds, network_mismatch, networks, links, entropy_mismatch, regions)};
}

Outcome graph_fixtures() {
  const double tol = 1e-12;
  std::vector<std::string> failures;
  auto expect = [&](const char* what, const std::optional<double>& got, double want) {
    if (!got || std::abs(*got - want) > tol) failures.push_back(fmt("%s = %s (want %.12g)", what, show(got).c_str(), want));
  };
  auto mean_path = [](const QuantumNetwork& n) -> std::optional<double> {
    auto r = average_shortest_path(Graph(n));
    return r ? std::optional<double>(r->mean) : std::nullopt;
  };
  const auto triangle = oracle::graph(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto path = oracle::graph(3, {{0, 1}, {1, 2}});
  const auto cycle = oracle::graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  const auto star = oracle::graph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  const auto lattice = oracle::triangular_lattice(12);
  expect("triangle <d>", mean_path(triangle), 1.0);
  expect("triangle C", global_clustering(Graph(triangle)), 1.0);
  expect("3-path <d>", mean_path(path), 4.0 / 3.0);
  expect("5-cycle <d>", mean_path(cycle), 1.5);
  expect("star r", assortativity(Graph(star)), -1.0);
  expect("star C", global_clustering(Graph(star)), 0.0);
  expect("triangular lattice C", global_clustering(Graph(lattice)), 0.4);
  std::string detail = "triangle, 3-path, 5-cycle, 5-leaf star, 12x12 periodic triangular lattice at tol 1e-12";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

struct Ensembles {
  std::map<int, EnsembleResult> spiral, hex;
};

ExperimentConfig ensemble_config(int L, PackingKind packing) {
  ExperimentConfig c;
  c.L = L;
  c.samples = 16;
  c.seed = 2024;
  c.packing = packing;
  return c;
}

const std::vector<int> kSizes{128, 256, 512, 1024};

Ensembles& ensembles() {
  static Ensembles e = [] {
    Ensembles out;
    for (int L : kSizes) {
      const auto t0 = std::chrono::steady_clock::now();
      out.spiral[L] = run_ensemble(ensemble_config(L, PackingKind::Spiral));
      out.hex[L] = run_ensemble(ensemble_config(L, PackingKind::Hexagonal));
      const auto& s = out.spiral[L].aggregate;
      const auto& h = out.hex[L].aggregate;
      std::printf("  ensemble L=%d (16 samples, %.0f s): heterogeneous LCC nodes %.2f links %.2f <k> %.3f; "
                  "hexagonal pitch %.2f LCC nodes %.2f links %.2f\n",
                  L, seconds_since(t0), s.lcc_nodes.mean, s.lcc_links.mean, s.mean_degree.mean, out.hex[L].pitch,
                  h.lcc_nodes.mean, h.lcc_links.mean);
      std::fflush(stdout);
    }
    return out;
  }();
  return e;
}

Outcome degree_exponent() {
  const auto& agg = ensembles().spiral.at(1024).aggregate;
  const auto& fit = agg.pooled_fit;
  if (!fit.ok()) return {false, "pooled degree distribution of 16 networks at L=1024 is unfittable: " + fit.reason};
  return {std::abs(fit.gamma - 2.67) <= 0.4,
          fmt("pooled over 16 networks at L=1024 (%zu nodes): gamma %.3f +- %.3f, k_min %zu, tail %zu; target 2.67 +- 0.4",
              agg.pooled_degrees.nodes, fit.gamma, fit.error, fit.k_min, fit.tail)};
}

// Coefficient of determination of a least-squares line; nullopt when
// either coordinate has no variance.
std::optional<double> r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sxx += (x[i] - mx) * (x[i] - mx), syy += (y[i] - my) * (y[i] - my), sxy += (x[i] - mx) * (y[i] - my);
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return sxy * sxy / (sxx * syy);
}

struct Scaling {
  std::optional<double> log_fit, sqrt_fit;
  std::string points;
};

Scaling path_scaling(const std::map<int, EnsembleResult>& runs) {
  std::vector<double> ln_n, sqrt_n, d;
  Scaling s;
  for (int L : kSizes) {
    const auto& a = runs.at(L).aggregate;
    s.points += fmt(" L=%d N=%.2f <d>=%.3f;", L, a.lcc_nodes.mean, a.path_length.mean);
    if (a.path_length.n == 0) continue;
    ln_n.push_back(std::log(a.lcc_nodes.mean));
    sqrt_n.push_back(std::sqrt(a.lcc_nodes.mean));
    d.push_back(a.path_length.mean);
  }
  if (d.size() >= 3) s.log_fit = r_squared(ln_n, d), s.sqrt_fit = r_squared(sqrt_n, d);
  return s;
}

Outcome small_world() {
  const auto het = path_scaling(ensembles().spiral), hex = path_scaling(ensembles().hex);
  const bool het_ok = het.log_fit && het.sqrt_fit && *het.log_fit > *het.sqrt_fit;
  const bool hex_ok = hex.log_fit && hex.sqrt_fit && *hex.sqrt_fit > *hex.log_fit;
  return {het_ok && hex_ok,
          "heterogeneous R2(ln N) " + show(het.log_fit) + " vs R2(sqrt N) " + show(het.sqrt_fit) + " [" + het.points +
              " ]; hexagonal R2(ln N) " + show(hex.log_fit) + " vs R2(sqrt N) " + show(hex.sqrt_fit) + " [" +
              hex.points + " ]"};
}

Outcome disassortativity() {
  bool ok = true;
  std::string detail = "heterogeneous mean r:";
  for (int L : {256, 512, 1024}) {
    const auto& r = ensembles().spiral.at(L).aggregate.assortativity;
    ok = ok && r.n > 0 && r.mean < 0;
    detail += fmt(" L=%d %s (defined in %zu/16)", L, r.n ? fmt("%.3f +- %.3f", r.mean, r.sem).c_str() : "undefined", r.n);
  }
  const auto& hex = ensembles().hex.at(1024).aggregate.assortativity;
  ok = ok && hex.n > 0 && std::abs(hex.mean) <= 0.1;
  detail += "; hexagonal L=1024 mean r " + (hex.n ? fmt("%.3f", hex.mean) : std::string("undefined")) +
            fmt(" (defined in %zu/16, want |r| <= 0.1)", hex.n);
  return {ok, detail};
}

Outcome hierarchy() {
  const auto& agg = ensembles().spiral.at(1024).aggregate;
  const auto& slope = agg.pooled_local_slope;
  std::size_t nodes_k2 = 0;
  for (const auto& p : agg.local_clustering) nodes_k2 += p.count;
  return {slope && std::abs(*slope + 1.0) <= 0.3,
          "pooled C_local(k) log-log slope at L=1024: " + show(slope) +
              fmt(" (want -1 +- 0.3; %zu degree classes with k >= 2 holding %zu nodes, mean C %.4f)",
                  agg.local_clustering.size(), nodes_k2, agg.clustering.n ? agg.clustering.mean : 0.0)};
}

Outcome criticality_optimum() {
  ExperimentConfig c;
  c.L = 256;
  c.samples = 64;
  c.seed = 4242;
  c.theta.clear();
  for (int i = -6; i <= 6; ++i) c.theta.push_back(DisorderModel::kThetaCritical + 0.05 * i);
  RunOptions opt;
  opt.analyze = false;
  const auto sw = sweep_parameter(c, opt);
  std::size_t best = 0;
  std::string curve;
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    if (sw.links[i].mean > sw.links[best].mean) best = i;
    curve += fmt(" %.3f:%.2f", sw.values[i], sw.links[i].mean);
  }
  const double at = sw.values[best];
  return {std::abs(at - DisorderModel::kThetaCritical) <= 0.1 + 1e-9,
          fmt("argmax theta %.4f (theta_c %.5f, tol 0.1); mean LCC links over 64 samples:", at,
              DisorderModel::kThetaCritical) +
              curve};
}

Outcome performance() {
  std::string detail;
  bool ok = true;
  for (auto [L, budget] : {std::pair{1024, 60.0}, std::pair{4096, 1800.0}}) {
    double elapsed = 0;
    std::size_t clusters = 0;
    {
      const auto inst = sample_disorder(LatticeSpec::make(L), DisorderModel::fixed_h(DisorderModel::kThetaCritical), 9);
      const auto t0 = std::chrono::steady_clock::now();
      clusters = run_sdrg(inst).cluster_count();
      elapsed = seconds_since(t0);
    }
    ok = ok && elapsed <= budget;
    detail += fmt("%sL=%d %.1f s (budget %.0f s, %zu clusters)", detail.empty() ? "" : "; ", L, elapsed, budget, clusters);
  }
  return {ok, detail};
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      out[fs::relative(e.path(), dir).generic_string()] = s.str();
    }
  return out;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "spinweb-acceptance-determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "run.cfg") << "L = 96\nsamples = 6\nseed = 31\nsave = all\n";
  std::vector<std::map<std::string, std::string>> trees;
  for (int threads : {1, 3}) {
    const auto out = root / ("threads" + std::to_string(threads));
    const std::string cmd = std::string("\"") + SPINWEB_CLI + "\" -q pipeline --config \"" + (root / "run.cfg").string() +
                            "\" --threads " + std::to_string(threads) + " --output \"" + out.string() + "\"";
    if (const int rc = std::system(cmd.c_str()); rc != 0) return {false, fmt("pipeline exited with status %d", rc)};
    trees.push_back(tree(out));
  }
  std::size_t differing = 0, bytes = 0;
  std::set<std::string> names;
  for (const auto& t : trees)
    for (const auto& [k, v] : t) names.insert(k);
  for (const auto& n : names) {
    auto a = trees[0].find(n), b = trees[1].find(n);
    differing += a == trees[0].end() || b == trees[1].end() || a->second != b->second;
  }
  for (const auto& [k, v] : trees[0]) bytes += v.size();
  return {differing == 0 && trees[0].size() > 10,
          fmt("pipeline at 1 and 3 workers: %zu files, %zu bytes, %zu differing", trees[0].size(), bytes, differing)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "SDRG rule fidelity", rule_fidelity},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "analytic graph fixtures", graph_fixtures},
      {9, "performance budget", performance},
      {10, "determinism", determinism},
      {8, "criticality optimum", criticality_optimum},
      {4, "degree-exponent recovery", degree_exponent},
      {5, "small-world scaling", small_world},
      {6, "disassortativity", disassortativity},
      {7, "hierarchy", hierarchy},
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  std::map<int, std::pair<const char*, Outcome>> results;
  for (const auto& c : all) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%2d] %-26s %s  (%.0f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
    results[c.id] = {c.name, o};
  }
  int failed = 0;
  std::printf("\nsummary\n");
  for (const auto& [id, r] : results) {
    std::printf("criterion %2d %-26s %s\n", id, r.first, r.second.pass ? "PASS" : "FAIL");
    failed += !r.second.pass;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed ? 1 : 0;
}
