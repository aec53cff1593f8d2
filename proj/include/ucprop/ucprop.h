#ifndef UCPROP_H
#define UCPROP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque handles. Configs are mutable; runs are immutable results. */
typedef struct ucp_config ucp_config;
typedef struct ucp_run ucp_run;

typedef enum {
  UCP_OK = 0,
  UCP_ERR_ARGUMENT = 1,     /* null handle or bad argument */
  UCP_ERR_PARSE = 2,        /* config text rejected; details in last_error */
  UCP_ERR_PRECONDITION = 3, /* documented precondition violated */
  UCP_ERR_RESOLUTION = 4,   /* grid cannot resolve the requested scale */
  UCP_ERR_SOLVER = 5,       /* linear solve missed its tolerance */
  UCP_ERR_INTERNAL = 6      /* broken internal contract */
} ucp_status;

const char* ucp_version(void);

/* Message of the most recent failure on this thread; empty if none. */
const char* ucp_last_error(void);

ucp_status ucp_config_parse(const char* text, ucp_config** out);
ucp_status ucp_config_load(const char* path, ucp_config** out);
/* Canonical JSON; free the string with ucp_string_free. */
ucp_status ucp_config_serialize(const ucp_config* cfg, char** out_text);
ucp_status ucp_config_set_experiment(ucp_config* cfg, const char* name);
ucp_status ucp_config_set_out_dir(ucp_config* cfg, const char* dir);
ucp_status ucp_config_set_seed(ucp_config* cfg, unsigned long long seed);
ucp_status ucp_config_set_grid_nodes(ucp_config* cfg, int nodes);
ucp_status ucp_config_set_quiet(ucp_config* cfg, int quiet);
void ucp_config_free(ucp_config* cfg);
void ucp_string_free(char* s);

/* Runs the configured experiment; artifacts land in the config's out_dir. */
ucp_status ucp_run_experiment(const ucp_config* cfg, ucp_run** out);
/* 1 iff any zero-violation assertion failed. */
int ucp_run_failed(const ucp_run* run);
size_t ucp_run_file_count(const ucp_run* run);
const char* ucp_run_file(const ucp_run* run, size_t i);
const char* ucp_run_summary_json(const ucp_run* run);
void ucp_run_free(ucp_run* run);

#ifdef __cplusplus
}
#endif

#endif /* UCPROP_H */
