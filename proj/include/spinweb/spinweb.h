#ifndef SPINWEB_H
#define SPINWEB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPINWEB_API __declspec(dllexport)
#else
#define SPINWEB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; they double as the command-line exit codes. */
enum {
  SPINWEB_OK = 0,
  SPINWEB_ERR_INTERNAL = 1,
  SPINWEB_ERR_PARAMETER = 2,
  SPINWEB_ERR_CONTRACT = 3,
  SPINWEB_ERR_IO = 4
};

typedef struct spinweb_instance spinweb_instance;
typedef struct spinweb_decomposition spinweb_decomposition;
typedef struct spinweb_layout spinweb_layout;
typedef struct spinweb_network spinweb_network;
typedef struct spinweb_report spinweb_report;
typedef struct spinweb_config spinweb_config;

/* Message of the last failure on the calling thread ("" if none). */
SPINWEB_API const char* spinweb_last_error(void);
SPINWEB_API const char* spinweb_version(void);
/* Releases strings returned through char** out-parameters. */
SPINWEB_API void spinweb_string_free(char* s);

/* Disorder: variant is "fixed-h", "box-h" or "diluted"; param is theta or p. */
SPINWEB_API int spinweb_instance_sample(int L, const char* variant, double param, uint64_t seed,
                                        spinweb_instance** out);
SPINWEB_API int spinweb_instance_read(const char* path, spinweb_instance** out);
SPINWEB_API int spinweb_instance_write(const spinweb_instance* inst, const char* path);
SPINWEB_API void spinweb_instance_free(spinweb_instance* inst);

/* Ground-state clusters: SDRG for fixed-h/box-h, percolation for diluted. */
SPINWEB_API int spinweb_decompose(const spinweb_instance* inst, spinweb_decomposition** out);
SPINWEB_API int spinweb_decomposition_read(const char* path, spinweb_decomposition** out);
SPINWEB_API int spinweb_decomposition_write(const spinweb_decomposition* d, const char* path);
SPINWEB_API int spinweb_decomposition_cluster_count(const spinweb_decomposition* d, size_t* out);
/* Copies min(len, L*L) labels (smallest member site of each cluster). */
SPINWEB_API int spinweb_decomposition_labels(const spinweb_decomposition* d, uint32_t* labels, size_t len);
SPINWEB_API int spinweb_entanglement_entropy(const spinweb_decomposition* d, const uint32_t* sites, size_t count,
                                             size_t* out);
SPINWEB_API void spinweb_decomposition_free(spinweb_decomposition* d);

typedef struct spinweb_packing_params {
  double gamma;
  double r_min;
  double r_max; /* 0 selects L / 8 */
  double coverage;
  double gap;
  int failure_budget;
} spinweb_packing_params;

SPINWEB_API void spinweb_packing_defaults(spinweb_packing_params* p);
SPINWEB_API int spinweb_pack_spiral(int L, uint64_t seed, const spinweb_packing_params* p, spinweb_layout** out);
SPINWEB_API int spinweb_pack_hexagonal(int L, double coverage, double pitch, spinweb_layout** out);
/* Pitch of a hexagonal layout with about `nodes` disks on an L x L torus. */
SPINWEB_API int spinweb_hex_pitch_for_nodes(int L, size_t nodes, double* pitch);
SPINWEB_API int spinweb_layout_read(const char* path, spinweb_layout** out);
SPINWEB_API int spinweb_layout_write(const spinweb_layout* l, const char* path, int with_site_map);
SPINWEB_API int spinweb_layout_info(const spinweb_layout* l, size_t* nodes, double* coverage, int* complete);
/* Packing warnings, one per line ("" if none). */
SPINWEB_API int spinweb_layout_warnings(const spinweb_layout* l, char** out);
SPINWEB_API void spinweb_layout_free(spinweb_layout* l);

/* rule is "node-exclusive" or "pair-contained". */
SPINWEB_API int spinweb_network_build(const spinweb_decomposition* d, const spinweb_layout* l, const char* rule,
                                      spinweb_network** out);
SPINWEB_API int spinweb_network_lcc(const spinweb_network* net, spinweb_network** out);
SPINWEB_API int spinweb_network_read(const char* path, spinweb_network** out);
SPINWEB_API int spinweb_network_write(const spinweb_network* net, const char* path);
/* Generic "u v" edge list; duplicates and self-loops are dropped and counted. */
SPINWEB_API int spinweb_network_import(const char* path, spinweb_network** out, size_t* duplicates,
                                       size_t* self_loops);
SPINWEB_API int spinweb_network_size(const spinweb_network* net, size_t* nodes, size_t* edges);
/* Copies min(len, edges) edges as (u, v, w) triples; any pointer may be NULL. */
SPINWEB_API int spinweb_network_edges(const spinweb_network* net, uint32_t* u, uint32_t* v, uint32_t* w, size_t len);
SPINWEB_API void spinweb_network_free(spinweb_network* net);

typedef struct spinweb_analysis_options {
  int path_mode; /* 0 auto, 1 exact, 2 sampled */
  size_t path_sources;
  uint64_t path_seed;
  unsigned threads;
  double bin_ratio;
  size_t min_tail;
} spinweb_analysis_options;

SPINWEB_API void spinweb_analysis_defaults(spinweb_analysis_options* o);
/* The network must be connected (use spinweb_network_lcc first). */
SPINWEB_API int spinweb_analyze(const spinweb_network* net, const spinweb_analysis_options* o, spinweb_report** out);
SPINWEB_API int spinweb_report_json(const spinweb_report* r, char** out);
/* which: degree, degree_binned, knn, knn_binned, clocal, clocal_binned. */
SPINWEB_API int spinweb_report_curve_csv(const spinweb_report* r, const char* which, char** out);
/* name: nodes, edges, mean_degree, gamma, gamma_error, k_min, path_length,
   path_se, assortativity, clustering, local_slope. *defined is 0 for
   degenerate statistics. */
SPINWEB_API int spinweb_report_scalar(const spinweb_report* r, const char* name, double* value, int* defined);
SPINWEB_API void spinweb_report_free(spinweb_report* r);

SPINWEB_API int spinweb_config_new(spinweb_config** out);
SPINWEB_API int spinweb_config_load(const char* path, spinweb_config** out);
SPINWEB_API int spinweb_config_set(spinweb_config* c, const char* key, const char* value);
SPINWEB_API int spinweb_config_get(const spinweb_config* c, const char* key, char** out);
SPINWEB_API int spinweb_config_text(const spinweb_config* c, char** out);
SPINWEB_API int spinweb_config_hash(const spinweb_config* c, uint64_t* out);
SPINWEB_API int spinweb_config_validate(const spinweb_config* c);
SPINWEB_API void spinweb_config_free(spinweb_config* c);
SPINWEB_API size_t spinweb_config_key_count(void);
SPINWEB_API int spinweb_config_key(size_t index, const char** key, const char** help);

typedef void (*spinweb_progress_fn)(const char* message, void* user);

/* Runs every sample of a scalar config and writes all artifacts under the
   configured output directory. summary (optional) receives the aggregate
   report as JSON. */
SPINWEB_API int spinweb_run_pipeline(const spinweb_config* c, spinweb_progress_fn progress, void* user,
                                     char** summary);
/* Runs a grid config; table (optional) receives the sweep CSV. */
SPINWEB_API int spinweb_run_sweep(const spinweb_config* c, spinweb_progress_fn progress, void* user, char** table);

#ifdef __cplusplus
}
#endif

#endif
