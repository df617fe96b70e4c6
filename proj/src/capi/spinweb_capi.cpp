#include "spinweb/spinweb.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <utility>

#include "errors.hpp"
#include "experiment.hpp"
#include "lattice.hpp"
#include "network.hpp"
#include "placement.hpp"
#include "sdrg.hpp"
#include "text_io.hpp"
#include "topology.hpp"

struct spinweb_instance {
  spinweb::DisorderInstance v;
};
struct spinweb_decomposition {
  spinweb::ClusterDecomposition v;
};
struct spinweb_layout {
  spinweb::NodeLayout v;
};
struct spinweb_network {
  spinweb::QuantumNetwork v;
};
struct spinweb_report {
  spinweb::TopologyReport v;
  double bin_ratio = spinweb::kDefaultBinRatio;
};
struct spinweb_config {
  spinweb::ExperimentConfig v;
};

namespace {

thread_local std::string last_error;

int fail(int code, const char* what) {
  last_error = what;
  return code;
}

template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return SPINWEB_OK;
  } catch (const spinweb::ParameterError& e) {
    return fail(SPINWEB_ERR_PARAMETER, e.what());
  } catch (const spinweb::ContractError& e) {
    return fail(SPINWEB_ERR_CONTRACT, e.what());
  } catch (const spinweb::IoError& e) {
    return fail(SPINWEB_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPINWEB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPINWEB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPINWEB_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw spinweb::ParameterError(what);
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

template <class T, class Load>
int read_file(const char* path, T** out, Load&& load) {
  return guarded([&] {
    require(path && out, "null argument");
    auto in = spinweb::text::open_input(path);
    *out = new T{load(in)};
  });
}

template <class Save>
int write_file(const char* path, Save&& save) {
  return guarded([&] {
    require(path != nullptr, "null argument");
    auto out = spinweb::text::open_output(path);
    save(out);
    out.flush();
    if (!out) throw spinweb::IoError(std::string("cannot write ") + path);
  });
}

spinweb::PackingParams to_params(const spinweb_packing_params* p) {
  spinweb::PackingParams q;
  if (!p) return q;
  q.gamma = p->gamma;
  q.r_min = p->r_min;
  q.r_max = p->r_max;
  q.coverage = p->coverage;
  q.gap = p->gap;
  q.failure_budget = p->failure_budget;
  return q;
}

std::function<void(const std::string&)> forward(spinweb_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const std::string& msg) { fn(msg.c_str(), user); };
}

}  // namespace

extern "C" {

const char* spinweb_last_error(void) { return last_error.c_str(); }

const char* spinweb_version(void) { return "1.0.0"; }

void spinweb_string_free(char* s) { std::free(s); }

int spinweb_instance_sample(int L, const char* variant, double param, uint64_t seed, spinweb_instance** out) {
  return guarded([&] {
    require(variant && out, "null argument");
    auto v = spinweb::parse_variant(variant);
    auto model = v == spinweb::Variant::Diluted ? spinweb::DisorderModel::diluted(param)
                 : v == spinweb::Variant::BoxH  ? spinweb::DisorderModel::box_h(param)
                                                : spinweb::DisorderModel::fixed_h(param);
    *out = new spinweb_instance{spinweb::sample_disorder(spinweb::LatticeSpec::make(L), model, seed)};
  });
}

int spinweb_instance_read(const char* path, spinweb_instance** out) {
  return read_file(path, out, [](std::istream& in) { return spinweb::read_instance(in); });
}

int spinweb_instance_write(const spinweb_instance* inst, const char* path) {
  if (!inst) return fail(SPINWEB_ERR_PARAMETER, "null argument");
  return write_file(path, [&](std::ostream& o) { spinweb::write_instance(o, inst->v); });
}

void spinweb_instance_free(spinweb_instance* inst) { delete inst; }

int spinweb_decompose(const spinweb_instance* inst, spinweb_decomposition** out) {
  return guarded([&] {
    require(inst && out, "null argument");
    *out = new spinweb_decomposition{inst->v.model.variant == spinweb::Variant::Diluted
                                         ? spinweb::percolation_clusters(inst->v)
                                         : spinweb::run_sdrg(inst->v)};
  });
}

int spinweb_decomposition_read(const char* path, spinweb_decomposition** out) {
  return read_file(path, out, [](std::istream& in) { return spinweb::read_decomposition(in); });
}

int spinweb_decomposition_write(const spinweb_decomposition* d, const char* path) {
  if (!d) return fail(SPINWEB_ERR_PARAMETER, "null argument");
  return write_file(path, [&](std::ostream& o) { spinweb::write_decomposition(o, d->v); });
}

int spinweb_decomposition_cluster_count(const spinweb_decomposition* d, size_t* out) {
  return guarded([&] {
    require(d && out, "null argument");
    *out = d->v.cluster_count();
  });
}

int spinweb_decomposition_labels(const spinweb_decomposition* d, uint32_t* labels, size_t len) {
  return guarded([&] {
    require(d && (labels || len == 0), "null argument");
    std::size_t n = std::min(len, d->v.labels.size());
    for (std::size_t i = 0; i < n; ++i) labels[i] = d->v.labels[i];
  });
}

int spinweb_entanglement_entropy(const spinweb_decomposition* d, const uint32_t* sites, size_t count, size_t* out) {
  return guarded([&] {
    require(d && out && (sites || count == 0), "null argument");
    std::vector<spinweb::SiteIndex> region(sites, sites + count);
    *out = spinweb::entanglement_entropy(d->v, region);
  });
}

void spinweb_decomposition_free(spinweb_decomposition* d) { delete d; }

void spinweb_packing_defaults(spinweb_packing_params* p) {
  if (!p) return;
  spinweb::PackingParams q;
  *p = {q.gamma, q.r_min, q.r_max, q.coverage, q.gap, q.failure_budget};
}

int spinweb_pack_spiral(int L, uint64_t seed, const spinweb_packing_params* p, spinweb_layout** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new spinweb_layout{spinweb::pack_spiral(spinweb::LatticeSpec::make(L), seed, to_params(p))};
  });
}

int spinweb_pack_hexagonal(int L, double coverage, double pitch, spinweb_layout** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new spinweb_layout{spinweb::pack_hexagonal(spinweb::LatticeSpec::make(L), coverage, pitch)};
  });
}

int spinweb_hex_pitch_for_nodes(int L, size_t nodes, double* pitch) {
  return guarded([&] {
    require(pitch != nullptr, "null argument");
    require(nodes > 0, "node count must be positive");
    *pitch = spinweb::hex_pitch_for_nodes(spinweb::LatticeSpec::make(L), nodes);
  });
}

int spinweb_layout_read(const char* path, spinweb_layout** out) {
  return read_file(path, out, [](std::istream& in) { return spinweb::read_layout(in); });
}

int spinweb_layout_write(const spinweb_layout* l, const char* path, int with_site_map) {
  if (!l) return fail(SPINWEB_ERR_PARAMETER, "null argument");
  return write_file(path, [&](std::ostream& o) { spinweb::write_layout(o, l->v, with_site_map != 0); });
}

int spinweb_layout_info(const spinweb_layout* l, size_t* nodes, double* coverage, int* complete) {
  return guarded([&] {
    require(l != nullptr, "null argument");
    if (nodes) *nodes = l->v.node_count();
    if (coverage) *coverage = l->v.coverage;
    if (complete) *complete = l->v.complete ? 1 : 0;
  });
}

int spinweb_layout_warnings(const spinweb_layout* l, char** out) {
  return guarded([&] {
    require(l && out, "null argument");
    std::string all;
    for (const auto& w : l->v.warnings) all += w + "\n";
    *out = dup(all);
  });
}

void spinweb_layout_free(spinweb_layout* l) { delete l; }

int spinweb_network_build(const spinweb_decomposition* d, const spinweb_layout* l, const char* rule,
                          spinweb_network** out) {
  return guarded([&] {
    require(d && l && rule && out, "null argument");
    *out = new spinweb_network{spinweb::build_network(d->v, l->v, spinweb::parse_rule(rule))};
  });
}

int spinweb_network_lcc(const spinweb_network* net, spinweb_network** out) {
  return guarded([&] {
    require(net && out, "null argument");
    *out = new spinweb_network{spinweb::largest_connected_component(net->v)};
  });
}

int spinweb_network_read(const char* path, spinweb_network** out) {
  return read_file(path, out, [](std::istream& in) { return spinweb::read_edgelist(in); });
}

int spinweb_network_write(const spinweb_network* net, const char* path) {
  if (!net) return fail(SPINWEB_ERR_PARAMETER, "null argument");
  return write_file(path, [&](std::ostream& o) { spinweb::write_edgelist(o, net->v); });
}

int spinweb_network_import(const char* path, spinweb_network** out, size_t* duplicates, size_t* self_loops) {
  return guarded([&] {
    require(path && out, "null argument");
    auto g = spinweb::import_edgelist(std::filesystem::path(path));
    if (duplicates) *duplicates = g.duplicate_edges;
    if (self_loops) *self_loops = g.self_loops;
    *out = new spinweb_network{std::move(g.net)};
  });
}

int spinweb_network_size(const spinweb_network* net, size_t* nodes, size_t* edges) {
  return guarded([&] {
    require(net != nullptr, "null argument");
    if (nodes) *nodes = net->v.node_count;
    if (edges) *edges = net->v.edge_count();
  });
}

int spinweb_network_edges(const spinweb_network* net, uint32_t* u, uint32_t* v, uint32_t* w, size_t len) {
  return guarded([&] {
    require(net != nullptr, "null argument");
    std::size_t n = std::min(len, net->v.edges.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = net->v.edges[i];
      if (u) u[i] = e.u;
      if (v) v[i] = e.v;
      if (w) w[i] = e.w;
    }
  });
}

void spinweb_network_free(spinweb_network* net) { delete net; }

void spinweb_analysis_defaults(spinweb_analysis_options* o) {
  if (!o) return;
  spinweb::TopologyOptions t;
  *o = {0, t.path.sources, t.path.seed, t.path.threads, t.bin_ratio, t.min_tail};
}

int spinweb_analyze(const spinweb_network* net, const spinweb_analysis_options* o, spinweb_report** out) {
  return guarded([&] {
    require(net && out, "null argument");
    spinweb::TopologyOptions t;
    if (o) {
      require(o->path_mode >= 0 && o->path_mode <= 2, "path_mode must be 0, 1 or 2");
      t.path.mode = static_cast<spinweb::PathLengthOptions::Mode>(o->path_mode);
      t.path.sources = o->path_sources;
      t.path.seed = o->path_seed;
      t.path.threads = o->threads;
      t.bin_ratio = o->bin_ratio;
      t.min_tail = o->min_tail;
    }
    *out = new spinweb_report{spinweb::topology_report(net->v, t), t.bin_ratio};
  });
}

int spinweb_report_json(const spinweb_report* r, char** out) {
  return guarded([&] {
    require(r && out, "null argument");
    std::ostringstream s;
    spinweb::write_report_json(s, r->v, r->bin_ratio);
    *out = dup(s.str());
  });
}

int spinweb_report_curve_csv(const spinweb_report* r, const char* which, char** out) {
  return guarded([&] {
    require(r && which && out, "null argument");
    std::string w = which;
    const auto& v = r->v;
    spinweb::Curve c;
    if (w == "degree") c = v.degrees.curve();
    else if (w == "degree_binned") c = v.degrees.log_binned(r->bin_ratio);
    else if (w == "knn") c = v.knn;
    else if (w == "knn_binned") c = spinweb::log_bin(v.knn, r->bin_ratio);
    else if (w == "clocal") c = v.local_clustering;
    else if (w == "clocal_binned") c = spinweb::log_bin(v.local_clustering, r->bin_ratio);
    else throw spinweb::ParameterError("unknown curve '" + w + "'");
    std::ostringstream s;
    spinweb::write_curve_csv(s, c);
    *out = dup(s.str());
  });
}

int spinweb_report_scalar(const spinweb_report* r, const char* name, double* value, int* defined) {
  return guarded([&] {
    require(r && name && value, "null argument");
    const auto& v = r->v;
    std::string n = name;
    std::optional<double> x;
    if (n == "nodes") x = static_cast<double>(v.nodes);
    else if (n == "edges") x = static_cast<double>(v.edges);
    else if (n == "mean_degree") x = v.degrees.mean_degree();
    else if (n == "gamma") x = v.fit.ok() ? std::optional<double>(v.fit.gamma) : std::nullopt;
    else if (n == "gamma_error") x = v.fit.ok() ? std::optional<double>(v.fit.error) : std::nullopt;
    else if (n == "k_min") x = v.fit.ok() ? std::optional<double>(static_cast<double>(v.fit.k_min)) : std::nullopt;
    else if (n == "path_length") x = v.path ? std::optional<double>(v.path->mean) : std::nullopt;
    else if (n == "path_se") x = v.path ? std::optional<double>(v.path->standard_error) : std::nullopt;
    else if (n == "assortativity") x = v.assortativity;
    else if (n == "clustering") x = v.clustering;
    else if (n == "local_slope") x = v.local_slope;
    else throw spinweb::ParameterError("unknown scalar '" + n + "'");
    *value = x.value_or(0.0);
    if (defined) *defined = x ? 1 : 0;
  });
}

void spinweb_report_free(spinweb_report* r) { delete r; }

int spinweb_config_new(spinweb_config** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new spinweb_config{};
  });
}

int spinweb_config_load(const char* path, spinweb_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new spinweb_config{spinweb::load_config(path)};
  });
}

int spinweb_config_set(spinweb_config* c, const char* key, const char* value) {
  return guarded([&] {
    require(c && key && value, "null argument");
    c->v.set(key, value);
  });
}

int spinweb_config_get(const spinweb_config* c, const char* key, char** out) {
  return guarded([&] {
    require(c && key && out, "null argument");
    *out = dup(c->v.get(key));
  });
}

int spinweb_config_text(const spinweb_config* c, char** out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = dup(c->v.canonical_text());
  });
}

int spinweb_config_hash(const spinweb_config* c, uint64_t* out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = c->v.hash();
  });
}

int spinweb_config_validate(const spinweb_config* c) {
  return guarded([&] {
    require(c != nullptr, "null argument");
    c->v.validate();
  });
}

void spinweb_config_free(spinweb_config* c) { delete c; }

size_t spinweb_config_key_count(void) { return spinweb::ExperimentConfig::keys().size(); }

int spinweb_config_key(size_t index, const char** key, const char** help) {
  return guarded([&] {
    const auto& keys = spinweb::ExperimentConfig::keys();
    require(index < keys.size(), "key index out of range");
    if (key) *key = keys[index].key;
    if (help) *help = keys[index].help;
  });
}

int spinweb_run_pipeline(const spinweb_config* c, spinweb_progress_fn progress, void* user, char** summary) {
  return guarded([&] {
    require(c != nullptr, "null argument");
    const auto& cfg = c->v;
    cfg.validate();
    if (cfg.is_sweep()) throw spinweb::ParameterError("pipeline needs a single " + cfg.grid_name() + " value");
    spinweb::RunOptions opt;
    opt.keep_artifacts = cfg.save != spinweb::SaveLevel::None;
    opt.progress = forward(progress, user);
    auto res = spinweb::run_ensemble(cfg, 0, opt);
    spinweb::export_ensemble(res, cfg);
    if (summary) {
      std::ostringstream s;
      spinweb::write_aggregate_json(s, res, cfg);
      *summary = dup(s.str());
    }
  });
}

int spinweb_run_sweep(const spinweb_config* c, spinweb_progress_fn progress, void* user, char** table) {
  return guarded([&] {
    require(c != nullptr, "null argument");
    const auto& cfg = c->v;
    cfg.validate();
    spinweb::RunOptions opt;
    opt.analyze = false;
    opt.keep_artifacts = cfg.save != spinweb::SaveLevel::None;
    opt.progress = forward(progress, user);
    auto res = spinweb::sweep_parameter(cfg, opt);
    spinweb::export_sweep(res, cfg);
    if (table) {
      std::ostringstream s;
      spinweb::write_sweep_csv(s, res);
      *table = dup(s.str());
    }
  });
}

}  // extern "C"
