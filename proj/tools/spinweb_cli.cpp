#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "spinweb/spinweb.h"

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(int rc) {
  if (rc != SPINWEB_OK) throw Failure{rc, spinweb_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{SPINWEB_ERR_PARAMETER, msg}; }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Instance = std::unique_ptr<spinweb_instance, Deleter<spinweb_instance, spinweb_instance_free>>;
using Decomposition = std::unique_ptr<spinweb_decomposition, Deleter<spinweb_decomposition, spinweb_decomposition_free>>;
using Layout = std::unique_ptr<spinweb_layout, Deleter<spinweb_layout, spinweb_layout_free>>;
using Network = std::unique_ptr<spinweb_network, Deleter<spinweb_network, spinweb_network_free>>;
using Report = std::unique_ptr<spinweb_report, Deleter<spinweb_report, spinweb_report_free>>;
using Config = std::unique_ptr<spinweb_config, Deleter<spinweb_config, spinweb_config_free>>;

std::string take(char* s) {
  std::string out = s ? s : "";
  spinweb_string_free(s);
  return out;
}

bool quiet = false;

void note(const std::string& msg) {
  if (!quiet) std::cerr << msg << '\n';
}

void progress(const char* msg, void*) { note(msg); }

const char* kStdout = "/dev/stdout";

// Options that mirror configuration keys. Values given on the command line
// are applied on top of the optional config file.
class ConfigFlags {
 public:
  void add(CLI::App* app, const std::vector<std::string>& keys) {
    app->add_option("--config", file_, "configuration file (key = value)")->check(CLI::ExistingFile);
    for (std::size_t i = 0; i < spinweb_config_key_count(); ++i) {
      const char* key = nullptr;
      const char* help = nullptr;
      check(spinweb_config_key(i, &key, &help));
      if (!keys.empty() && std::find(keys.begin(), keys.end(), key) == keys.end()) continue;
      std::string k = key;
      order_.push_back(k);
      app->add_option(k.size() == 1 ? "-" + k : "--" + k, values_[k], help);
    }
  }

  Config load() const {
    spinweb_config* raw = nullptr;
    check(file_.empty() ? spinweb_config_new(&raw) : spinweb_config_load(file_.c_str(), &raw));
    Config cfg(raw);
    for (const auto& k : order_) {
      const auto& v = values_.at(k);
      if (v) check(spinweb_config_set(cfg.get(), k.c_str(), v->c_str()));
    }
    check(spinweb_config_validate(cfg.get()));
    return cfg;
  }

 private:
  std::string file_;
  std::vector<std::string> order_;
  std::map<std::string, std::optional<std::string>> values_;
};

std::string get(const Config& c, const char* key) {
  char* s = nullptr;
  check(spinweb_config_get(c.get(), key, &s));
  return take(s);
}

double get_double(const Config& c, const char* key) {
  const auto s = get(c, key);
  if (s.find(',') != std::string::npos) usage_error(std::string(key) + " must be a single value here");
  return std::stod(s);
}

int get_int(const Config& c, const char* key) { return std::stoi(get(c, key)); }

std::uint64_t get_u64(const Config& c, const char* key) { return std::stoull(get(c, key)); }

const char* target(const std::string& path, bool to_stdout) { return to_stdout ? kStdout : path.c_str(); }

void need_output(const std::string& path, bool to_stdout, const char* what) {
  if (path.empty() && !to_stdout) usage_error(std::string("no output: give ") + what + " or --stdout");
}

struct GenerateCmd {
  ConfigFlags flags;
  std::string instance_path, clusters_path;
  bool to_stdout = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "sample a disorder instance and its cluster decomposition");
    flags.add(sub, {"L", "variant", "theta", "p", "seed"});
    sub->add_option("--instance", instance_path, "write the disorder instance here");
    sub->add_option("--clusters", clusters_path, "write the cluster decomposition here");
    sub->add_flag("--stdout", to_stdout, "write the decomposition to standard output");
    sub->callback([this] { run(); });
  }

  void run() {
    need_output(clusters_path.empty() ? instance_path : clusters_path, to_stdout, "--clusters/--instance");
    auto cfg = flags.load();
    const auto variant = get(cfg, "variant");
    const double param = get_double(cfg, variant == "diluted" ? "p" : "theta");
    spinweb_instance* inst = nullptr;
    check(spinweb_instance_sample(get_int(cfg, "L"), variant.c_str(), param, get_u64(cfg, "seed"), &inst));
    Instance owned(inst);
    if (!instance_path.empty()) check(spinweb_instance_write(inst, instance_path.c_str()));
    if (clusters_path.empty() && !to_stdout) return;
    spinweb_decomposition* d = nullptr;
    check(spinweb_decompose(inst, &d));
    Decomposition dec(d);
    std::size_t clusters = 0;
    check(spinweb_decomposition_cluster_count(d, &clusters));
    note("clusters: " + std::to_string(clusters));
    check(spinweb_decomposition_write(d, target(clusters_path, to_stdout)));
  }
};

struct PackCmd {
  ConfigFlags flags;
  std::string out_path;
  bool site_map = false, to_stdout = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("pack", "place circular node regions on the lattice");
    flags.add(sub, {"L", "seed", "packing", "gamma", "r_min", "r_max", "coverage", "gap", "failure_budget", "pitch"});
    sub->add_option("--out", out_path, "write the layout here");
    sub->add_flag("--site-map", site_map, "append the per-site node map");
    sub->add_flag("--stdout", to_stdout, "write the layout to standard output");
    sub->callback([this] { run(); });
  }

  void run() {
    need_output(out_path, to_stdout, "--out");
    auto cfg = flags.load();
    const int L = get_int(cfg, "L");
    spinweb_packing_params p;
    spinweb_packing_defaults(&p);
    p.gamma = get_double(cfg, "gamma");
    p.r_min = get_double(cfg, "r_min");
    p.r_max = get_double(cfg, "r_max");
    p.coverage = get_double(cfg, "coverage");
    p.gap = get_double(cfg, "gap");
    p.failure_budget = get_int(cfg, "failure_budget");
    const auto seed = get_u64(cfg, "seed");

    spinweb_layout* raw = nullptr;
    if (get(cfg, "packing") == "hexagonal") {
      double pitch = get_double(cfg, "pitch");
      if (pitch <= 0.0) {
        check(spinweb_pack_spiral(L, seed, &p, &raw));
        Layout spiral(raw);
        std::size_t nodes = 0;
        check(spinweb_layout_info(raw, &nodes, nullptr, nullptr));
        check(spinweb_hex_pitch_for_nodes(L, nodes, &pitch));
      }
      check(spinweb_pack_hexagonal(L, p.coverage, pitch, &raw));
    } else {
      check(spinweb_pack_spiral(L, seed, &p, &raw));
    }
    Layout layout(raw);
    char* warnings = nullptr;
    check(spinweb_layout_warnings(raw, &warnings));
    for (const auto& w : CLI::detail::split(take(warnings), '\n'))
      if (!w.empty()) note("warning: " + w);
    std::size_t nodes = 0;
    double coverage = 0.0;
    int complete = 0;
    check(spinweb_layout_info(raw, &nodes, &coverage, &complete));
    note("nodes: " + std::to_string(nodes) + " coverage: " + std::to_string(coverage) +
         (complete ? "" : " (target not reached)"));
    check(spinweb_layout_write(raw, target(out_path, to_stdout), site_map ? 1 : 0));
  }
};

struct NetworkCmd {
  ConfigFlags flags;
  std::string clusters_path, layout_path, out_path;
  bool full = false, to_stdout = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("network", "link nodes through shared clusters and keep the largest component");
    flags.add(sub, {"rule"});
    sub->add_option("--clusters", clusters_path, "cluster decomposition file")->required()->check(CLI::ExistingFile);
    sub->add_option("--layout", layout_path, "layout file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "write the edge list here");
    sub->add_flag("--full", full, "keep every node instead of the largest connected component");
    sub->add_flag("--stdout", to_stdout, "write the edge list to standard output");
    sub->callback([this] { run(); });
  }

  void run() {
    need_output(out_path, to_stdout, "--out");
    auto cfg = flags.load();
    spinweb_decomposition* d = nullptr;
    check(spinweb_decomposition_read(clusters_path.c_str(), &d));
    Decomposition dec(d);
    spinweb_layout* l = nullptr;
    check(spinweb_layout_read(layout_path.c_str(), &l));
    Layout layout(l);
    spinweb_network* n = nullptr;
    check(spinweb_network_build(d, l, get(cfg, "rule").c_str(), &n));
    Network net(n);
    std::size_t nodes = 0, edges = 0;
    check(spinweb_network_size(n, &nodes, &edges));
    note("network: " + std::to_string(nodes) + " nodes, " + std::to_string(edges) + " links");
    if (!full) {
      spinweb_network* c = nullptr;
      check(spinweb_network_lcc(n, &c));
      net.reset(c);
      check(spinweb_network_size(c, &nodes, &edges));
      note("largest component: " + std::to_string(nodes) + " nodes, " + std::to_string(edges) + " links");
    }
    check(spinweb_network_write(net.get(), target(out_path, to_stdout)));
  }
};

bool is_native_edgelist(const std::string& path) {
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  return first == "# spinweb v1";
}

Network load_any(const std::string& path) {
  spinweb_network* n = nullptr;
  if (is_native_edgelist(path)) {
    check(spinweb_network_read(path.c_str(), &n));
    return Network(n);
  }
  std::size_t dups = 0, loops = 0;
  check(spinweb_network_import(path.c_str(), &n, &dups, &loops));
  note("imported: dropped " + std::to_string(dups) + " duplicate edges, " + std::to_string(loops) + " self-loops");
  return Network(n);
}

struct AnalyzeCmd {
  ConfigFlags flags;
  std::string input, out_path, curves_dir;
  bool to_stdout = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("analyze", "topology report of a network (native or plain 'u v' edge list)");
    flags.add(sub, {"path_mode", "path_sources", "seed", "bin_ratio", "min_tail", "threads"});
    sub->add_option("--input", input, "edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "write the JSON report here");
    sub->add_option("--curves", curves_dir, "write degree, knn and clocal CSV curves into this directory");
    sub->add_flag("--stdout", to_stdout, "write the JSON report to standard output");
    sub->callback([this] { run(); });
  }

  void run() {
    if (out_path.empty() && curves_dir.empty() && !to_stdout) usage_error("no output: give --out, --curves or --stdout");
    auto cfg = flags.load();
    auto net = load_any(input);
    spinweb_network* c = nullptr;
    check(spinweb_network_lcc(net.get(), &c));
    Network lcc(c);
    std::size_t all = 0, nodes = 0, edges = 0;
    check(spinweb_network_size(net.get(), &all, nullptr));
    check(spinweb_network_size(c, &nodes, &edges));
    if (nodes != all) note("analyzing the largest component: " + std::to_string(nodes) + " of " + std::to_string(all) + " nodes");

    spinweb_analysis_options o;
    spinweb_analysis_defaults(&o);
    const auto mode = get(cfg, "path_mode");
    o.path_mode = mode == "exact" ? 1 : mode == "sampled" ? 2 : 0;
    o.path_sources = std::stoull(get(cfg, "path_sources"));
    o.path_seed = get_u64(cfg, "seed");
    o.bin_ratio = get_double(cfg, "bin_ratio");
    o.min_tail = std::stoull(get(cfg, "min_tail"));
    const int threads = get_int(cfg, "threads");
    o.threads = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());

    spinweb_report* r = nullptr;
    check(spinweb_analyze(c, &o, &r));
    Report report(r);
    char* json = nullptr;
    check(spinweb_report_json(r, &json));
    const auto text = take(json);
    if (to_stdout) std::cout << text;
    if (!out_path.empty()) write_text(out_path, text);
    if (!curves_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(curves_dir, ec);
      if (ec) throw Failure{SPINWEB_ERR_IO, "cannot create " + curves_dir + ": " + ec.message()};
      for (const char* which : {"degree", "degree_binned", "knn", "knn_binned", "clocal", "clocal_binned"}) {
        char* csv = nullptr;
        check(spinweb_report_curve_csv(r, which, &csv));
        write_text((std::filesystem::path(curves_dir) / (std::string(which) + ".csv")).string(), take(csv));
      }
    }
  }

  static void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw Failure{SPINWEB_ERR_IO, "cannot write " + path};
  }
};

struct ImportCmd {
  std::string input, out_path;
  bool lcc = false, to_stdout = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("import", "convert a plain 'u v' edge list to the native format");
    sub->add_option("--input", input, "edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "write the native edge list here");
    sub->add_flag("--lcc", lcc, "keep only the largest connected component");
    sub->add_flag("--stdout", to_stdout, "write to standard output");
    sub->callback([this] { run(); });
  }

  void run() {
    need_output(out_path, to_stdout, "--out");
    spinweb_network* n = nullptr;
    std::size_t dups = 0, loops = 0;
    check(spinweb_network_import(input.c_str(), &n, &dups, &loops));
    Network net(n);
    std::size_t nodes = 0, edges = 0;
    check(spinweb_network_size(n, &nodes, &edges));
    note("imported " + std::to_string(nodes) + " nodes, " + std::to_string(edges) + " edges; dropped " +
         std::to_string(dups) + " duplicates, " + std::to_string(loops) + " self-loops");
    if (lcc) {
      spinweb_network* c = nullptr;
      check(spinweb_network_lcc(n, &c));
      net.reset(c);
    }
    check(spinweb_network_write(net.get(), target(out_path, to_stdout)));
  }
};

struct RunCmd {
  ConfigFlags flags;
  bool to_stdout = false;
  bool sweep = false;

  void attach(CLI::App& app, bool is_sweep) {
    sweep = is_sweep;
    auto* sub = is_sweep ? app.add_subcommand("sweep", "LCC size over a theta or p grid")
                         : app.add_subcommand("pipeline", "full ensemble: disorder, clusters, nodes, network, report");
    flags.add(sub, {});
    sub->add_flag("--stdout", to_stdout, is_sweep ? "print the sweep table" : "print the aggregate report");
    sub->callback([this] { run(); });
  }

  void run() {
    auto cfg = flags.load();
    char* out = nullptr;
    check(sweep ? spinweb_run_sweep(cfg.get(), progress, nullptr, to_stdout ? &out : nullptr)
                : spinweb_run_pipeline(cfg.get(), progress, nullptr, to_stdout ? &out : nullptr));
    if (to_stdout) std::cout << take(out);
    note("artifacts in " + get(cfg, "output"));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum network generator and analyzer built on random transverse-field Ising clusters", "spinweb"};
  app.set_version_flag("--version", spinweb_version());
  app.add_flag("-q,--quiet", quiet, "suppress progress messages");
  app.require_subcommand(1);

  GenerateCmd generate;
  PackCmd pack;
  NetworkCmd network;
  AnalyzeCmd analyze;
  ImportCmd import_cmd;
  RunCmd pipeline, sweep;
  try {
    generate.attach(app);
    pack.attach(app);
    network.attach(app);
    analyze.attach(app);
    sweep.attach(app, true);
    pipeline.attach(app, false);
    import_cmd.attach(app);
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : SPINWEB_ERR_PARAMETER;
  } catch (const Failure& f) {
    std::cerr << "spinweb: error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "spinweb: error: " << e.what() << '\n';
    return SPINWEB_ERR_INTERNAL;
  }
  return 0;
}
