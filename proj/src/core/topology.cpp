#include "topology.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"
#include "text_io.hpp"

namespace spinweb {

Graph::Graph(const QuantumNetwork& net) : offset_(net.node_count + 1, 0) {
  for (const Edge& e : net.edges) {
    if (e.u >= e.v || e.v >= net.node_count) throw ContractError("invalid edge in network");
    ++offset_[e.u + 1];
    ++offset_[e.v + 1];
  }
  std::partial_sum(offset_.begin(), offset_.end(), offset_.begin());
  adj_.resize(offset_.back());
  std::vector<std::size_t> fill(offset_.begin(), offset_.end() - 1);
  for (const Edge& e : net.edges) {
    adj_[fill[e.u]++] = e.v;
    adj_[fill[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < node_count(); ++i) {
    std::sort(adj_.begin() + offset_[i], adj_.begin() + offset_[i + 1]);
    if (std::adjacent_find(adj_.begin() + offset_[i], adj_.begin() + offset_[i + 1]) != adj_.begin() + offset_[i + 1])
      throw ContractError("duplicate edge at node " + std::to_string(i));
  }
}

namespace {

// Index i of the bin [b^i, b^(i+1)) holding k >= 1.
int bin_of(double k, double ratio) {
  int i = static_cast<int>(std::floor(std::log(k) / std::log(ratio)));
  while (i > 0 && std::pow(ratio, i) > k) --i;
  while (std::pow(ratio, i + 1) <= k) ++i;
  return i;
}

}  // namespace

Curve log_bin(const Curve& per_degree, double ratio) {
  if (!(ratio > 1.0)) throw ParameterError("bin ratio must exceed 1");
  std::map<int, std::pair<double, std::size_t>> bins;
  for (const auto& p : per_degree) {
    if (p.k < 1.0 || p.count == 0) continue;
    auto& b = bins[bin_of(p.k, ratio)];
    b.first += p.value * static_cast<double>(p.count);
    b.second += p.count;
  }
  Curve out;
  for (const auto& [i, b] : bins)
    out.push_back({std::pow(ratio, i + 0.5), b.first / static_cast<double>(b.second), b.second});
  return out;
}

std::optional<double> log_log_slope(const Curve& curve, std::size_t min_count) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve)
    if (p.count >= min_count && p.value > 0.0 && p.k > 0.0) pts.emplace_back(std::log(p.k), std::log(p.value));
  if (pts.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

double DegreeDistribution::probability(std::size_t k) const {
  const auto it = counts.find(k);
  return it == counts.end() || nodes == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(nodes);
}

double DegreeDistribution::mean_degree() const {
  if (nodes == 0) return 0.0;
  double s = 0;
  for (const auto& [k, c] : counts) s += static_cast<double>(k) * static_cast<double>(c);
  return s / static_cast<double>(nodes);
}

Curve DegreeDistribution::curve() const {
  Curve out;
  for (const auto& [k, c] : counts) out.push_back({static_cast<double>(k), probability(k), c});
  return out;
}

Curve DegreeDistribution::log_binned(double ratio) const {
  if (!(ratio > 1.0)) throw ParameterError("bin ratio must exceed 1");
  std::map<int, std::size_t> mass;
  for (const auto& [k, c] : counts)
    if (k >= 1) mass[bin_of(static_cast<double>(k), ratio)] += c;
  Curve out;
  for (const auto& [i, m] : mass) {
    const double lo = std::pow(ratio, i), hi = std::pow(ratio, i + 1);
    const double width = std::ceil(hi) - std::ceil(lo);
    out.push_back({std::pow(ratio, i + 0.5), static_cast<double>(m) / (static_cast<double>(nodes) * width), m});
  }
  return out;
}

DegreeDistribution degree_distribution(const Graph& g) {
  DegreeDistribution d;
  d.nodes = g.node_count();
  for (std::size_t i = 0; i < g.node_count(); ++i) ++d.counts[g.degree(i)];
  return d;
}

DegreeDistribution degree_distribution_of(const std::vector<std::size_t>& degrees) {
  DegreeDistribution d;
  d.nodes = degrees.size();
  for (auto k : degrees) ++d.counts[k];
  return d;
}

double hurwitz_zeta(double s, double q) {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
  gsl_sf_result r;
  const int status = gsl_sf_hzeta_e(s, q, &r);
  if (status != GSL_SUCCESS) throw ContractError(std::string("Hurwitz zeta failed: ") + gsl_strerror(status));
  return r.val;
}

namespace {

struct Tail {
  std::size_t n = 0;
  double log_sum = 0.0;
  std::size_t distinct = 0;
};

Tail tail_of(const DegreeDistribution& dist, std::size_t k_min) {
  Tail t;
  for (auto it = dist.counts.lower_bound(k_min); it != dist.counts.end(); ++it) {
    t.n += it->second;
    t.log_sum += static_cast<double>(it->second) * std::log(static_cast<double>(it->first));
    ++t.distinct;
  }
  return t;
}

constexpr double kGammaLo = 1.0 + 1e-6;
constexpr double kGammaHi = 20.0;

double fit_tail(const Tail& t, std::size_t k_min) {
  const double q = static_cast<double>(k_min);
  const auto nll = [&](double g) { return static_cast<double>(t.n) * std::log(hurwitz_zeta(g, q)) + g * t.log_sum; };
  return boost::math::tools::brent_find_minima(nll, kGammaLo, kGammaHi, 40).first;
}

}  // namespace

double fit_exponent_fixed_kmin(const DegreeDistribution& dist, std::size_t k_min) {
  if (k_min < 1) throw ParameterError("k_min must be at least 1");
  const Tail t = tail_of(dist, k_min);
  if (t.distinct < 2) throw ContractError("tail needs at least two distinct degrees");
  return fit_tail(t, k_min);
}

PowerLawFit fit_degree_exponent(const DegreeDistribution& dist, std::size_t min_tail) {
  PowerLawFit fit;
  double best_ks = std::numeric_limits<double>::infinity();
  for (const auto& [k_min, c] : dist.counts) {
    if (k_min < 1) continue;
    const Tail t = tail_of(dist, k_min);
    if (t.n < min_tail) break;
    if (t.distinct < 2) break;
    const double g = fit_tail(t, k_min);
    const double z0 = hurwitz_zeta(g, static_cast<double>(k_min));
    // KS distance between the empirical and model CDFs. The empirical CDF is
    // flat between observed degrees, so comparing at every observed k and at
    // k - 1 covers the supremum.
    double ks = 0.0;
    std::size_t below = 0;
    for (auto it = dist.counts.lower_bound(k_min); it != dist.counts.end(); ++it) {
      const double emp_before = static_cast<double>(below) / static_cast<double>(t.n);
      const double model_before = 1.0 - hurwitz_zeta(g, static_cast<double>(it->first)) / z0;
      ks = std::max(ks, std::fabs(emp_before - model_before));
      below += it->second;
      const double emp_at = static_cast<double>(below) / static_cast<double>(t.n);
      const double model_at = 1.0 - hurwitz_zeta(g, static_cast<double>(it->first + 1)) / z0;
      ks = std::max(ks, std::fabs(emp_at - model_at));
    }
    if (ks < best_ks) {
      best_ks = ks;
      fit.status = PowerLawFit::Status::Ok;
      fit.gamma = g;
      fit.k_min = k_min;
      fit.tail = t.n;
      fit.ks = ks;
    }
  }
  if (!fit.ok()) {
    std::size_t n = 0;
    for (const auto& [k, c] : dist.counts)
      if (k >= 1) n += c;
    fit.reason = n < min_tail ? "fewer than " + std::to_string(min_tail) + " samples with k >= 1"
                              : "no candidate k_min leaves a tail with two distinct degrees and enough samples";
  } else {
    const double h = 1e-4, q = static_cast<double>(fit.k_min);
    const auto lz = [&](double g) { return std::log(hurwitz_zeta(g, q)); };
    const double lo = std::max(kGammaLo, fit.gamma - h);
    const double hi = lo + 2 * h;
    const double d2 = (lz(hi) - 2 * lz(lo + h) + lz(lo)) / (h * h);
    fit.error = d2 > 0 ? 1.0 / std::sqrt(static_cast<double>(fit.tail) * d2) : std::numeric_limits<double>::infinity();
  }
  Curve binned;
  for (const auto& p : dist.log_binned())
    if (!fit.ok() || p.k >= static_cast<double>(fit.k_min)) binned.push_back(p);
  if (const auto s = log_log_slope(binned)) fit.binned_slope = -*s;
  return fit;
}

std::vector<std::int32_t> bfs_distances(const Graph& g, std::uint32_t source) {
  std::vector<std::int32_t> dist(g.node_count(), -1);
  std::vector<std::uint32_t> queue;
  queue.reserve(g.node_count());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (auto p = g.begin(u); p != g.end(u); ++p)
      if (dist[*p] < 0) {
        dist[*p] = dist[u] + 1;
        queue.push_back(*p);
      }
  }
  return dist;
}

namespace {

// Sum of hop distances from a source and the number of nodes reached.
std::pair<std::uint64_t, std::size_t> distance_sum(const Graph& g, std::uint32_t source,
                                                    std::vector<std::int32_t>& dist,
                                                    std::vector<std::uint32_t>& queue) {
  std::fill(dist.begin(), dist.end(), -1);
  queue.clear();
  dist[source] = 0;
  queue.push_back(source);
  std::uint64_t sum = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    sum += static_cast<std::uint64_t>(dist[u]);
    for (auto p = g.begin(u); p != g.end(u); ++p)
      if (dist[*p] < 0) {
        dist[*p] = dist[u] + 1;
        queue.push_back(*p);
      }
  }
  return {sum, queue.size()};
}

}  // namespace

std::optional<PathLengthResult> average_shortest_path(const Graph& g, const PathLengthOptions& opt) {
  const std::size_t n = g.node_count();
  if (n < 2) return std::nullopt;
  PathLengthResult res;
  res.sampled = opt.mode == PathLengthOptions::Mode::Sampled ||
                (opt.mode == PathLengthOptions::Mode::Auto && n > PathLengthOptions::kAutoThreshold);
  std::vector<std::uint32_t> sources(n);
  std::iota(sources.begin(), sources.end(), 0u);
  if (res.sampled) {
    if (opt.sources == 0) throw ParameterError("sampled shortest paths need at least one source");
    const std::size_t s = std::min(opt.sources, n);
    Rng rng(opt.seed);
    for (std::size_t i = 0; i < s; ++i) std::swap(sources[i], sources[i + rng.below(n - i)]);
    sources.resize(s);
    res.seed = opt.seed;
  }
  res.sources = sources.size();

  std::vector<std::uint64_t> sums(sources.size());
  std::vector<std::uint8_t> disconnected(sources.size(), 0);
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(sources.size())));
  const auto work = [&](unsigned w) {
    std::vector<std::int32_t> dist(n);
    std::vector<std::uint32_t> queue;
    queue.reserve(n);
    for (std::size_t i = w; i < sources.size(); i += workers) {
      const auto [sum, reached] = distance_sum(g, sources[i], dist, queue);
      sums[i] = sum;
      disconnected[i] = reached != n;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  if (std::any_of(disconnected.begin(), disconnected.end(), [](auto d) { return d != 0; }))
    throw ContractError("shortest paths need a connected network (use the largest component)");

  const double pairs = static_cast<double>(n - 1);
  const std::uint64_t total = std::accumulate(sums.begin(), sums.end(), std::uint64_t{0});
  res.mean = static_cast<double>(total) / (static_cast<double>(sources.size()) * pairs);
  if (res.sampled && sources.size() > 1) {
    double ss = 0;
    for (auto s : sums) {
      const double d = static_cast<double>(s) / pairs - res.mean;
      ss += d * d;
    }
    res.standard_error = std::sqrt(ss / static_cast<double>(sources.size() - 1) / static_cast<double>(sources.size()));
  }
  return res;
}

std::optional<double> assortativity(const Graph& g) {
  const std::size_t m = g.edge_count();
  if (m == 0) return std::nullopt;
  double mean = 0;
  for (std::size_t u = 0; u < g.node_count(); ++u)
    mean += static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(u));
  mean /= static_cast<double>(2 * m);
  double var = 0, cov = 0;
  for (std::size_t u = 0; u < g.node_count(); ++u) {
    const double du = static_cast<double>(g.degree(u)) - mean;
    for (auto p = g.begin(u); p != g.end(u); ++p) {
      var += du * du;
      cov += du * (static_cast<double>(g.degree(*p)) - mean);
    }
  }
  if (var <= 0.0) return std::nullopt;
  return std::clamp(cov / var, -1.0, 1.0);
}

Curve knn_curve(const Graph& g) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (std::size_t u = 0; u < g.node_count(); ++u) {
    const std::size_t k = g.degree(u);
    if (k == 0) continue;
    double s = 0;
    for (auto p = g.begin(u); p != g.end(u); ++p) s += static_cast<double>(g.degree(*p));
    auto& a = acc[k];
    a.first += s / static_cast<double>(k);
    ++a.second;
  }
  Curve out;
  for (const auto& [k, a] : acc) out.push_back({static_cast<double>(k), a.first / static_cast<double>(a.second), a.second});
  return out;
}

std::vector<std::uint64_t> triangles_per_node(const Graph& g) {
  std::vector<std::uint64_t> t(g.node_count(), 0);
  for (std::uint32_t u = 0; u < g.node_count(); ++u)
    for (auto p = std::upper_bound(g.begin(u), g.end(u), u); p != g.end(u); ++p) {
      const std::uint32_t v = *p;
      auto a = std::upper_bound(g.begin(u), g.end(u), v);
      auto b = std::upper_bound(g.begin(v), g.end(v), v);
      while (a != g.end(u) && b != g.end(v)) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++t[u], ++t[v], ++t[*a];
          ++a, ++b;
        }
      }
    }
  return t;
}

std::optional<double> global_clustering(const Graph& g) {
  const auto t = triangles_per_node(g);
  std::uint64_t closed = 0, wedges = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const std::uint64_t k = g.degree(i);
    closed += 2 * t[i];  // 6 T in total
    wedges += k * (k - (k > 0 ? 1 : 0));
  }
  if (wedges == 0) return std::nullopt;
  return static_cast<double>(closed) / static_cast<double>(wedges);
}

std::vector<std::optional<double>> local_clustering(const Graph& g) {
  const auto t = triangles_per_node(g);
  std::vector<std::optional<double>> c(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double k = static_cast<double>(g.degree(i));
    if (g.degree(i) >= 2) c[i] = 2.0 * static_cast<double>(t[i]) / (k * (k - 1.0));
  }
  return c;
}

Curve local_clustering_curve(const Graph& g) {
  const auto c = local_clustering(g);
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (c[i]) {
      auto& a = acc[g.degree(i)];
      a.first += *c[i];
      ++a.second;
    }
  Curve out;
  for (const auto& [k, a] : acc) out.push_back({static_cast<double>(k), a.first / static_cast<double>(a.second), a.second});
  return out;
}

std::optional<double> local_clustering_slope(const Curve& per_degree, double ratio) {
  return log_log_slope(log_bin(per_degree, ratio), kMinNodesPerBin);
}

TopologyReport topology_report(const QuantumNetwork& net, const TopologyOptions& opt) {
  const Graph g(net);
  if (g.node_count() > 0 && std::ranges::count(bfs_distances(g, 0), -1) > 0)
    throw ContractError("topology report needs a connected network (use the largest component)");
  TopologyReport r;
  r.nodes = g.node_count();
  r.edges = g.edge_count();
  for (const Edge& e : net.edges) r.total_weight += e.w;
  r.degrees = degree_distribution(g);
  r.fit = fit_degree_exponent(r.degrees, opt.min_tail);
  r.path = average_shortest_path(g, opt.path);
  r.assortativity = assortativity(g);
  r.knn = knn_curve(g);
  r.clustering = global_clustering(g);
  r.local_clustering = local_clustering_curve(g);
  r.local_slope = local_clustering_slope(r.local_clustering, opt.bin_ratio);
  return r;
}

namespace {

using Json = nlohmann::ordered_json;

Json maybe(const std::optional<double>& v) { return v ? Json(*v) : Json("undefined"); }

Json curve_json(const Curve& c) {
  Json a = Json::array();
  for (const auto& p : c) a.push_back({{"k", p.k}, {"value", p.value}, {"count", p.count}});
  return a;
}

}  // namespace

void write_report_json(std::ostream& out, const TopologyReport& r, double bin_ratio) {
  Json j;
  j["report_version"] = TopologyReport::kVersion;
  j["nodes"] = r.nodes;
  j["edges"] = r.edges;
  j["total_weight"] = r.total_weight;

  Json deg;
  deg["mean"] = r.degrees.mean_degree();
  Json counts = Json::array();
  for (const auto& [k, c] : r.degrees.counts) counts.push_back({k, c});
  deg["counts"] = counts;
  deg["log_binned"] = curve_json(r.degrees.log_binned(bin_ratio));
  Json fit;
  if (r.fit.ok()) {
    fit["status"] = "ok";
    fit["gamma"] = r.fit.gamma;
    fit["error"] = r.fit.error;
    fit["k_min"] = r.fit.k_min;
    fit["tail"] = r.fit.tail;
    fit["ks"] = r.fit.ks;
  } else {
    fit["status"] = "unfittable";
    fit["reason"] = r.fit.reason;
  }
  fit["binned_slope"] = maybe(r.fit.binned_slope);
  deg["fit"] = fit;
  j["degree"] = deg;

  if (r.path) {
    j["shortest_path"] = {{"mean", r.path->mean},
                          {"standard_error", r.path->standard_error},
                          {"mode", r.path->sampled ? "sampled" : "exact"},
                          {"sources", r.path->sources},
                          {"seed", r.path->seed}};
  } else {
    j["shortest_path"] = "undefined";
  }
  j["assortativity"] = maybe(r.assortativity);
  j["knn"] = {{"per_degree", curve_json(r.knn)}, {"log_binned", curve_json(log_bin(r.knn, bin_ratio))}};
  j["clustering"] = {{"global", maybe(r.clustering)},
                     {"local_slope", maybe(r.local_slope)},
                     {"local_per_degree", curve_json(r.local_clustering)},
                     {"local_log_binned", curve_json(log_bin(r.local_clustering, bin_ratio))}};
  Json cfg = Json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = cfg;
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing report");
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
  out << "k,value,count\n";
  for (const auto& p : curve) out << text::format_double(p.k) << ',' << text::format_double(p.value) << ',' << p.count << '\n';
  if (!out) throw IoError("failed writing curve");
}

}  // namespace spinweb
