/* C interface to the apt library: graph loading, structural properties,
 * checkpoints, frozen embeddings and the command runners behind the CLI.
 *
 * Every function returns an apt_status. On failure a message is available
 * from apt_last_error() on the same thread until the next failing call.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with apt_string_free(). Handles are released with their
 * matching *_free function; passing NULL to a free function is a no-op.
 */
#ifndef APT_H
#define APT_H

#include <stddef.h>
#include <stdint.h>

#if defined(APT_BUILDING_LIBRARY)
#define APT_API __attribute__((visibility("default")))
#else
#define APT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum apt_status {
  APT_OK = 0,
  APT_ERR_INVALID_ARGUMENT = 1,
  APT_ERR_IO = 2,
  APT_ERR_PARSE = 3,
  APT_ERR_EMPTY_GRAPH = 4,
  APT_ERR_FORMAT = 5,
  APT_ERR_VERSION = 6,
  APT_ERR_NUMERICAL = 7,
  APT_ERR_INTERNAL = 99
} apt_status;

typedef struct apt_graph apt_graph;
typedef struct apt_model apt_model;

APT_API const char* apt_version(void);
APT_API const char* apt_last_error(void);
APT_API const char* apt_status_name(apt_status status);
APT_API void apt_string_free(char* s);

/* Edge-list file ("u v" per line, '#' comments). */
APT_API apt_status apt_graph_load(const char* path, apt_graph** out);
/* edges holds 2 * num_edges node ids in [0, num_nodes). */
APT_API apt_status apt_graph_from_edges(size_t num_nodes, const uint32_t* edges, size_t num_edges, const char* name,
                                        apt_graph** out);
APT_API void apt_graph_free(apt_graph* g);
APT_API apt_status apt_graph_size(const apt_graph* g, size_t* num_nodes, size_t* num_edges);
/* Raw properties of the largest connected component as a JSON object. */
APT_API apt_status apt_graph_stats_json(const apt_graph* g, char** out_json);
APT_API apt_status apt_graph_entropy(const apt_graph* g, double* out);

APT_API apt_status apt_model_load(const char* path, apt_model** out);
APT_API void apt_model_free(apt_model* m);
APT_API apt_status apt_model_info(const apt_model* m, size_t* num_params, size_t* d_feat, size_t* d_emb);
/* Writes num_nodes x d_emb row-major embeddings into out (capacity out_len). */
APT_API apt_status apt_model_embed_nodes(const apt_model* m, const apt_graph* g, uint64_t seed, size_t threads,
                                         double* out, size_t out_len);

/* Commands: "props", "gen", "pretrain", "probe", "report". */
APT_API apt_status apt_command_defaults(const char* command, char** out_json);
/* file_json may be NULL; overrides are "dotted.key=value" strings. */
APT_API apt_status apt_command_resolve(const char* command, const char* file_json, const char* const* overrides,
                                       size_t num_overrides, char** out_json);
/* Runs a command on a resolved config. The result JSON holds "resolved",
 * "summary", "stdout", "warnings" and "failures". */
APT_API apt_status apt_command_run(const char* command, const char* resolved_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
