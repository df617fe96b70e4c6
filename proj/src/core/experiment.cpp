#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"
#include "sdrg.hpp"
#include "text_io.hpp"

namespace spinweb {

namespace {

std::string save_name(SaveLevel s) {
  switch (s) {
    case SaveLevel::None: return "none";
    case SaveLevel::Networks: return "networks";
    case SaveLevel::All: return "all";
  }
  return "none";
}

std::string path_mode_name(PathLengthOptions::Mode m) {
  switch (m) {
    case PathLengthOptions::Mode::Auto: return "auto";
    case PathLengthOptions::Mode::Exact: return "exact";
    case PathLengthOptions::Mode::Sampled: return "sampled";
  }
  return "auto";
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += text::format_double(v[i]);
  }
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return text::parse_double(text::trim(v), 0);
  } catch (const ParseError&) {
    throw ParameterError(key + ": '" + v + "' is not a number");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    return text::parse_u64(text::trim(v), 0);
  } catch (const ParseError&) {
    throw ParameterError(key + ": '" + v + "' is not a non-negative integer");
  }
}

std::vector<double> to_grid(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string_view rest = v;
  for (;;) {
    const auto comma = rest.find(',');
    out.push_back(to_double(key, std::string(rest.substr(0, comma))));
    if (!std::isfinite(out.back())) throw ParameterError(key + ": grid values must be finite");
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

}  // namespace

const std::vector<ExperimentConfig::KeyInfo>& ExperimentConfig::keys() {
  static const std::vector<KeyInfo> table = {
      {"L", "lattice side length", true},
      {"variant", "disorder variant: fixed-h, box-h or diluted", true},
      {"theta", "ln h for fixed-h/box-h; a comma list makes a sweep", true},
      {"p", "bond probability for diluted; a comma list makes a sweep", true},
      {"packing", "node placement: spiral or hexagonal", true},
      {"gamma", "radius power-law exponent (spiral)", true},
      {"r_min", "minimum node radius (spiral)", true},
      {"r_max", "maximum node radius, 0 for L/8 (spiral)", true},
      {"coverage", "fraction of sites inside nodes", true},
      {"gap", "gap between neighbouring disks (spiral)", true},
      {"failure_budget", "consecutive placement failures before giving up (spiral)", true},
      {"pitch", "hexagonal pitch, 0 to match the spiral node count", true},
      {"rule", "link rule: node-exclusive or pair-contained", true},
      {"samples", "samples per grid point", true},
      {"seed", "master seed", true},
      {"path_mode", "shortest paths: auto, exact or sampled", true},
      {"path_sources", "sources for sampled shortest paths", true},
      {"bin_ratio", "logarithmic bin ratio for curves", true},
      {"min_tail", "minimum tail size for the power-law fit", true},
      {"save", "per-sample artifacts: none, networks or all", false},
      {"threads", "worker threads, 0 for all cores", false},
      {"output", "output directory", false},
  };
  return table;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value(text::trim(raw));
  if (value.empty()) throw ParameterError(key + ": empty value");
  if (key == "L") {
    const auto v = to_u64(key, value);
    if (v > 65535) throw ParameterError("L: too large");
    L = static_cast<int>(v);
  } else if (key == "variant") {
    variant = parse_variant(value);
  } else if (key == "theta") {
    theta = to_grid(key, value);
  } else if (key == "p") {
    p = to_grid(key, value);
  } else if (key == "packing") {
    packing = parse_packing(value);
  } else if (key == "gamma") {
    packing_params.gamma = to_double(key, value);
  } else if (key == "r_min") {
    packing_params.r_min = to_double(key, value);
  } else if (key == "r_max") {
    packing_params.r_max = to_double(key, value);
  } else if (key == "coverage") {
    packing_params.coverage = to_double(key, value);
  } else if (key == "gap") {
    packing_params.gap = to_double(key, value);
  } else if (key == "failure_budget") {
    const auto v = to_u64(key, value);
    if (v > 1000000000) throw ParameterError("failure_budget: too large");
    packing_params.failure_budget = static_cast<int>(v);
  } else if (key == "pitch") {
    pitch = to_double(key, value);
  } else if (key == "rule") {
    rule = parse_rule(value);
  } else if (key == "samples") {
    samples = to_u64(key, value);
  } else if (key == "seed") {
    seed = to_u64(key, value);
  } else if (key == "path_mode") {
    if (value == "auto") path_mode = PathLengthOptions::Mode::Auto;
    else if (value == "exact") path_mode = PathLengthOptions::Mode::Exact;
    else if (value == "sampled") path_mode = PathLengthOptions::Mode::Sampled;
    else throw ParameterError("path_mode: expected auto, exact or sampled");
  } else if (key == "path_sources") {
    path_sources = to_u64(key, value);
  } else if (key == "bin_ratio") {
    bin_ratio = to_double(key, value);
  } else if (key == "min_tail") {
    min_tail = to_u64(key, value);
  } else if (key == "save") {
    if (value == "none") save = SaveLevel::None;
    else if (value == "networks") save = SaveLevel::Networks;
    else if (value == "all") save = SaveLevel::All;
    else throw ParameterError("save: expected none, networks or all");
  } else if (key == "threads") {
    const auto v = to_u64(key, value);
    if (v > 4096) throw ParameterError("threads: too large");
    threads = static_cast<unsigned>(v);
  } else if (key == "output") {
    output = value;
  } else {
    throw ParameterError("unknown key '" + key + "'");
  }
}

std::string ExperimentConfig::get(const std::string& key) const {
  const auto& pp = packing_params;
  if (key == "L") return std::to_string(L);
  if (key == "variant") return variant_name(variant);
  if (key == "theta") return join(theta);
  if (key == "p") return join(p);
  if (key == "packing") return packing_name(packing);
  if (key == "gamma") return text::format_double(pp.gamma);
  if (key == "r_min") return text::format_double(pp.r_min);
  if (key == "r_max") return text::format_double(pp.r_max);
  if (key == "coverage") return text::format_double(pp.coverage);
  if (key == "gap") return text::format_double(pp.gap);
  if (key == "failure_budget") return std::to_string(pp.failure_budget);
  if (key == "pitch") return text::format_double(pitch);
  if (key == "rule") return rule_name(rule);
  if (key == "samples") return std::to_string(samples);
  if (key == "seed") return std::to_string(seed);
  if (key == "path_mode") return path_mode_name(path_mode);
  if (key == "path_sources") return std::to_string(path_sources);
  if (key == "bin_ratio") return text::format_double(bin_ratio);
  if (key == "min_tail") return std::to_string(min_tail);
  if (key == "save") return save_name(save);
  if (key == "threads") return std::to_string(threads);
  if (key == "output") return output.string();
  throw ParameterError("unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  const LatticeSpec s = LatticeSpec::make(L);
  if (grid().empty()) throw ParameterError(grid_name() + ": grid is empty");
  for (double v : grid()) model_at(v).validate();
  if (packing == PackingKind::Spiral) {
    packing_params.validate(s);
  } else {
    if (!(packing_params.coverage > 0.0 && packing_params.coverage < PackingParams::kHexDensity))
      throw ParameterError("coverage must lie in (0, pi/(2 sqrt 3))");
    if (!(pitch >= 0.0 && pitch <= L)) throw ParameterError("pitch must lie in [0, L]");
    if (pitch == 0.0) packing_params.validate(s);
  }
  if (samples < 1) throw ParameterError("samples must be at least 1");
  if (path_sources < 1) throw ParameterError("path_sources must be at least 1");
  if (!(bin_ratio > 1.0)) throw ParameterError("bin_ratio must exceed 1");
  if (min_tail < 2) throw ParameterError("min_tail must be at least 2");
}

DisorderModel ExperimentConfig::model_at(double value) const {
  switch (variant) {
    case Variant::FixedH: return DisorderModel::fixed_h(value);
    case Variant::BoxH: return DisorderModel::box_h(value);
    case Variant::Diluted: return DisorderModel::diluted(value);
  }
  return {};
}

unsigned ExperimentConfig::worker_count() const {
  return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

std::string ExperimentConfig::canonical_text() const {
  std::string s;
  for (const auto& k : keys())
    if (k.hashed) s += std::string(k.key) + " = " + get(k.key) + '\n';
  return s;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (text::next_line(in, line, line_no)) {
    std::string_view t = line;
    if (const auto hash = t.find('#'); hash != std::string_view::npos) t = t.substr(0, hash);
    t = text::trim(t);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(text::trim(t.substr(0, eq)));
    try {
      cfg.set(key, std::string(t.substr(eq + 1)));
    } catch (const ParameterError& e) {
      throw ParameterError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return parse_config(in);
}

SampleSeeds sample_seeds(std::uint64_t master, std::size_t grid_index, std::size_t sample_index) {
  SampleSeeds s;
  s.sample = derive_seed(master, {grid_index, sample_index});
  s.instance = derive_seed(s.sample, {0});
  s.layout = derive_seed(s.sample, {1});
  s.paths = derive_seed(s.sample, {2});
  return s;
}

double resolve_pitch(const ExperimentConfig& cfg, std::size_t grid_index) {
  if (cfg.packing != PackingKind::Hexagonal) return 0.0;
  if (cfg.pitch > 0.0) return cfg.pitch;
  const auto spiral = pack_spiral(cfg.spec(), sample_seeds(cfg.seed, grid_index, 0).layout, cfg.packing_params);
  return hex_pitch_for_nodes(cfg.spec(), spiral.node_count());
}

SampleResult run_sample(const ExperimentConfig& cfg, std::size_t grid_index, std::size_t sample_index,
                        double pitch, const RunOptions& opt) {
  SampleResult r;
  r.grid_index = grid_index;
  r.sample_index = sample_index;
  r.seeds = sample_seeds(cfg.seed, grid_index, sample_index);
  r.value = cfg.grid().at(grid_index);
  const LatticeSpec spec = cfg.spec();

  const auto inst = sample_disorder(spec, cfg.model_at(r.value), r.seeds.instance);
  auto decomp = inst.model.variant == Variant::Diluted ? percolation_clusters(inst) : run_sdrg(inst);
  NodeLayout layout;
  if (cfg.packing == PackingKind::Spiral) {
    layout = pack_spiral(spec, r.seeds.layout, cfg.packing_params);
  } else {
    layout = pack_hexagonal(spec, cfg.packing_params.coverage, pitch);
    layout.seed = r.seeds.layout;
  }
  r.layout_nodes = layout.node_count();
  r.coverage = layout.coverage;

  const auto net = build_network(decomp, layout, cfg.rule);
  auto lcc = largest_connected_component(net);
  r.network_links = net.edge_count();
  r.lcc_nodes = lcc.node_count;
  r.lcc_links = lcc.edge_count();

  if (opt.analyze && lcc.node_count > 0) {
    TopologyOptions topt;
    topt.path.mode = cfg.path_mode;
    topt.path.sources = cfg.path_sources;
    topt.path.seed = r.seeds.paths;
    topt.bin_ratio = cfg.bin_ratio;
    topt.min_tail = cfg.min_tail;
    r.report = topology_report(lcc, topt);
    auto& c = r.report->config;
    c["grid_index"] = std::to_string(grid_index);
    c["sample"] = std::to_string(sample_index);
    c[cfg.grid_name()] = text::format_double(r.value);
    c["instance_seed"] = std::to_string(r.seeds.instance);
    c["layout_seed"] = std::to_string(r.seeds.layout);
    c["path_seed"] = std::to_string(r.seeds.paths);
    c["config_hash"] = text::hex64(cfg.hash());
  }
  if (opt.keep_artifacts) {
    r.lcc = std::move(lcc);
    if (cfg.save == SaveLevel::All) {
      r.decomposition = std::move(decomp);
      r.layout = std::move(layout);
    }
  }
  return r;
}

namespace {

[[noreturn]] void rethrow_with_context(std::exception_ptr ep, const std::string& context) {
  try {
    std::rethrow_exception(ep);
  } catch (const ParameterError& e) {
    throw ParameterError(context + e.what());
  } catch (const ContractError& e) {
    throw ContractError(context + e.what());
  } catch (const IoError& e) {
    throw IoError(context + e.what());
  } catch (const std::exception& e) {
    throw Error(context + e.what());
  }
}

// Runs tasks [0, count) on the configured workers; results land by index,
// so the output never depends on scheduling. The first failure in task
// order is rethrown.
template <class Task>
std::vector<SampleResult> run_tasks(std::size_t count, unsigned workers, Task&& task,
                                    const std::function<std::string(std::size_t)>& describe,
                                    const RunOptions& opt) {
  std::vector<SampleResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::size_t done = 0;
  std::mutex progress_mutex;
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        results[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
        return;
      }
      if (opt.progress) {
        std::lock_guard lock(progress_mutex);
        ++done;
        opt.progress(describe(i) + " done (" + std::to_string(done) + "/" + std::to_string(count) + ")");
      }
    }
  };
  workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, count)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) rethrow_with_context(errors[i], describe(i) + " failed: ");
  return results;
}

std::string describe_sample(const ExperimentConfig& cfg, std::size_t g, std::size_t s) {
  return "sample " + std::to_string(s) + " at " + cfg.grid_name() + "=" + text::format_double(cfg.grid()[g]) +
         " (seed " + std::to_string(sample_seeds(cfg.seed, g, s).sample) + ")";
}

Curve pooled_curve(const std::vector<const Curve*>& curves) {
  std::map<double, std::pair<double, std::size_t>> acc;
  for (const Curve* c : curves)
    for (const auto& p : *c) {
      auto& a = acc[p.k];
      a.first += p.value * static_cast<double>(p.count);
      a.second += p.count;
    }
  Curve out;
  for (const auto& [k, a] : acc)
    if (a.second > 0) out.push_back({k, a.first / static_cast<double>(a.second), a.second});
  return out;
}

}  // namespace

Statistic summarize(const std::vector<double>& values) {
  Statistic s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sem = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

EnsembleAggregate aggregate_samples(const std::vector<SampleResult>& samples, const ExperimentConfig& cfg) {
  EnsembleAggregate a;
  std::vector<double> links, nodes, degree, path, assort, clust, slope, gamma;
  std::vector<const Curve*> knn, local;
  std::map<std::size_t, double> p_sum;
  std::map<std::size_t, std::size_t> p_count;
  std::size_t reports = 0;
  for (const auto& s : samples) {
    links.push_back(static_cast<double>(s.lcc_links));
    nodes.push_back(static_cast<double>(s.lcc_nodes));
    if (!s.report) continue;
    const auto& r = *s.report;
    ++reports;
    degree.push_back(r.degrees.mean_degree());
    if (r.path) path.push_back(r.path->mean);
    if (r.assortativity) assort.push_back(*r.assortativity);
    if (r.clustering) clust.push_back(*r.clustering);
    if (r.local_slope) slope.push_back(*r.local_slope);
    if (r.fit.ok()) gamma.push_back(r.fit.gamma);
    for (const auto& [k, c] : r.degrees.counts) {
      p_sum[k] += r.degrees.probability(k);
      p_count[k] += c;
      a.pooled_degrees.counts[k] += c;
    }
    a.pooled_degrees.nodes += r.degrees.nodes;
    knn.push_back(&r.knn);
    local.push_back(&r.local_clustering);
  }
  a.lcc_links = summarize(links);
  a.lcc_nodes = summarize(nodes);
  a.mean_degree = summarize(degree);
  a.path_length = summarize(path);
  a.assortativity = summarize(assort);
  a.clustering = summarize(clust);
  a.local_slope = summarize(slope);
  a.gamma = summarize(gamma);
  for (const auto& [k, sum] : p_sum)
    a.degree.push_back({static_cast<double>(k), sum / static_cast<double>(reports), p_count[k]});
  a.pooled_fit = fit_degree_exponent(a.pooled_degrees, cfg.min_tail);
  a.knn = pooled_curve(knn);
  a.local_clustering = pooled_curve(local);
  a.pooled_local_slope = local_clustering_slope(a.local_clustering, cfg.bin_ratio);
  return a;
}

EnsembleResult run_ensemble(const ExperimentConfig& cfg, std::size_t grid_index, const RunOptions& opt) {
  cfg.validate();
  if (grid_index >= cfg.grid().size()) throw ParameterError("grid index out of range");
  EnsembleResult res;
  res.pitch = resolve_pitch(cfg, grid_index);
  res.samples = run_tasks(
      cfg.samples, cfg.worker_count(), [&](std::size_t i) { return run_sample(cfg, grid_index, i, res.pitch, opt); },
      [&](std::size_t i) { return describe_sample(cfg, grid_index, i); }, opt);
  res.aggregate = aggregate_samples(res.samples, cfg);
  return res;
}

SweepResult sweep_parameter(const ExperimentConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  SweepResult sw;
  sw.parameter = cfg.grid_name();
  sw.values = cfg.grid();
  const std::size_t g = sw.values.size(), n = cfg.samples;
  std::vector<double> pitch(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) pitch[i] = resolve_pitch(cfg, i);
  sw.samples = run_tasks(
      g * n, cfg.worker_count(), [&](std::size_t t) { return run_sample(cfg, t / n, t % n, pitch[t / n], opt); },
      [&](std::size_t t) { return describe_sample(cfg, t / n, t % n); }, opt);
  for (std::size_t i = 0; i < g; ++i) {
    std::vector<double> links, nodes;
    for (std::size_t s = 0; s < n; ++s) {
      links.push_back(static_cast<double>(sw.samples[i * n + s].lcc_links));
      nodes.push_back(static_cast<double>(sw.samples[i * n + s].lcc_nodes));
    }
    sw.links.push_back(summarize(links));
    sw.nodes.push_back(summarize(nodes));
  }
  return sw;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sw) {
  out << sw.parameter << ",mean_links,sem\n";
  for (std::size_t i = 0; i < sw.values.size(); ++i)
    out << text::format_double(sw.values[i]) << ',' << text::format_double(sw.links[i].mean) << ','
        << text::format_double(sw.links[i].sem) << '\n';
  if (!out) throw IoError("failed writing sweep table");
}

namespace {

std::string opt_str(const std::optional<double>& v) { return v ? text::format_double(*v) : "undefined"; }

}  // namespace

void write_samples_csv(std::ostream& out, const std::vector<SampleResult>& samples) {
  out << "grid_index,value,sample,seed,layout_nodes,coverage,network_links,lcc_nodes,lcc_links,"
         "mean_degree,path_length,path_se,assortativity,clustering,local_slope,gamma\n";
  for (const auto& s : samples) {
    out << s.grid_index << ',' << text::format_double(s.value) << ',' << s.sample_index << ',' << s.seeds.sample << ','
        << s.layout_nodes << ',' << text::format_double(s.coverage) << ',' << s.network_links << ',' << s.lcc_nodes
        << ',' << s.lcc_links;
    if (s.report) {
      const auto& r = *s.report;
      out << ',' << text::format_double(r.degrees.mean_degree()) << ','
          << opt_str(r.path ? std::optional(r.path->mean) : std::nullopt) << ','
          << opt_str(r.path ? std::optional(r.path->standard_error) : std::nullopt) << ','
          << opt_str(r.assortativity) << ',' << opt_str(r.clustering) << ',' << opt_str(r.local_slope) << ','
          << opt_str(r.fit.ok() ? std::optional(r.fit.gamma) : std::nullopt);
    } else {
      out << ",undefined,undefined,undefined,undefined,undefined,undefined,undefined";
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing sample table");
}

void write_aggregate_json(std::ostream& out, const EnsembleResult& res, const ExperimentConfig& cfg) {
  using Json = nlohmann::ordered_json;
  const auto& a = res.aggregate;
  const auto stat = [](const Statistic& s) {
    return s.n == 0 ? Json("undefined") : Json{{"mean", s.mean}, {"sem", s.sem}, {"n", s.n}};
  };
  const auto curve = [](const Curve& c) {
    Json arr = Json::array();
    for (const auto& p : c) arr.push_back({{"k", p.k}, {"value", p.value}, {"count", p.count}});
    return arr;
  };
  Json j;
  j["report_version"] = TopologyReport::kVersion;
  j["config_hash"] = text::hex64(cfg.hash());
  j["samples"] = res.samples.size();
  if (!res.samples.empty()) j[cfg.grid_name()] = res.samples.front().value;
  if (cfg.packing == PackingKind::Hexagonal) j["pitch"] = res.pitch;
  j["statistics"] = {{"lcc_links", stat(a.lcc_links)},     {"lcc_nodes", stat(a.lcc_nodes)},
                     {"mean_degree", stat(a.mean_degree)}, {"path_length", stat(a.path_length)},
                     {"assortativity", stat(a.assortativity)}, {"clustering", stat(a.clustering)},
                     {"local_slope", stat(a.local_slope)}, {"gamma", stat(a.gamma)}};
  Json fit;
  if (a.pooled_fit.ok()) {
    fit = {{"status", "ok"},       {"gamma", a.pooled_fit.gamma}, {"error", a.pooled_fit.error},
           {"k_min", a.pooled_fit.k_min}, {"tail", a.pooled_fit.tail}, {"ks", a.pooled_fit.ks}};
  } else {
    fit = {{"status", "unfittable"}, {"reason", a.pooled_fit.reason}};
  }
  fit["binned_slope"] = a.pooled_fit.binned_slope ? Json(*a.pooled_fit.binned_slope) : Json("undefined");
  j["pooled_degree_fit"] = fit;
  j["pooled_local_slope"] = a.pooled_local_slope ? Json(*a.pooled_local_slope) : Json("undefined");
  j["degree"] = curve(a.degree);
  j["knn"] = curve(a.knn);
  j["local_clustering"] = curve(a.local_clustering);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing aggregate report");
}

namespace {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  template <class F>
  void write(const std::string& rel, F&& body) {
    const auto path = dir_ / rel;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    auto out = text::open_output(path);
    try {
      body(out);
    } catch (const IoError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
    written_.push_back(rel);
  }

  void write_samples(const std::vector<SampleResult>& samples, const ExperimentConfig& cfg) {
    if (cfg.save == SaveLevel::None) return;
    for (const auto& s : samples) {
      const std::string stem = "samples/g" + std::to_string(s.grid_index) + "_s" + std::to_string(s.sample_index);
      if (s.lcc) write(stem + ".edges", [&](std::ostream& o) { write_edgelist(o, *s.lcc); });
      if (s.report) write(stem + ".json", [&](std::ostream& o) { write_report_json(o, *s.report, cfg.bin_ratio); });
      if (s.layout) write(stem + ".layout", [&](std::ostream& o) { write_layout(o, *s.layout); });
      if (s.decomposition) write(stem + ".clusters", [&](std::ostream& o) { write_decomposition(o, *s.decomposition); });
    }
  }

  std::vector<std::string> finish(const ExperimentConfig& cfg) {
    write_manifest(dir_, cfg.hash(), cfg.canonical_text());
    written_.push_back("manifest.json");
    return written_;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

}  // namespace

std::vector<std::string> export_ensemble(const EnsembleResult& res, const ExperimentConfig& cfg) {
  ArtifactWriter w(cfg.output);
  const auto& a = res.aggregate;
  w.write("config.txt", [&](std::ostream& o) { o << cfg.canonical_text(); });
  w.write("aggregate.json", [&](std::ostream& o) { write_aggregate_json(o, res, cfg); });
  w.write("samples.csv", [&](std::ostream& o) { write_samples_csv(o, res.samples); });
  w.write("degree.csv", [&](std::ostream& o) { write_curve_csv(o, a.degree); });
  w.write("degree_binned.csv", [&](std::ostream& o) { write_curve_csv(o, a.pooled_degrees.log_binned(cfg.bin_ratio)); });
  w.write("knn.csv", [&](std::ostream& o) { write_curve_csv(o, a.knn); });
  w.write("knn_binned.csv", [&](std::ostream& o) { write_curve_csv(o, log_bin(a.knn, cfg.bin_ratio)); });
  w.write("clocal.csv", [&](std::ostream& o) { write_curve_csv(o, a.local_clustering); });
  w.write("clocal_binned.csv", [&](std::ostream& o) { write_curve_csv(o, log_bin(a.local_clustering, cfg.bin_ratio)); });
  w.write_samples(res.samples, cfg);
  return w.finish(cfg);
}

std::vector<std::string> export_sweep(const SweepResult& sw, const ExperimentConfig& cfg) {
  ArtifactWriter w(cfg.output);
  w.write("config.txt", [&](std::ostream& o) { o << cfg.canonical_text(); });
  w.write("sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, sw); });
  w.write("sweep_samples.csv", [&](std::ostream& o) { write_samples_csv(o, sw.samples); });
  w.write_samples(sw.samples, cfg);
  return w.finish(cfg);
}

void write_manifest(const std::filesystem::path& dir, std::uint64_t config_hash, const std::string& config_text) {
  using Json = nlohmann::ordered_json;
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (auto it = std::filesystem::recursive_directory_iterator(dir, ec);
       !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec))
    if (it->is_regular_file()) {
      auto rel = std::filesystem::relative(it->path(), dir);
      if (rel != "manifest.json") files.push_back(rel);
    }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  Json j;
  j["manifest_version"] = 1;
  j["config_hash"] = text::hex64(config_hash);
  j["config"] = config_text;
  Json arts = Json::array();
  for (const auto& rel : files) {
    auto in = text::open_input(dir / rel);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    arts.push_back({{"path", rel.generic_string()},
                    {"bytes", content.size()},
                    {"fnv1a64", text::hex64(text::fnv1a64(content))},
                    {"config_hash", text::hex64(config_hash)}});
  }
  j["artifacts"] = arts;
  auto out = text::open_output(dir / "manifest.json");
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("failed writing " + (dir / "manifest.json").string());
}

}  // namespace spinweb
