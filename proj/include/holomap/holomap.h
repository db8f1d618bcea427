#ifndef HOLOMAP_H
#define HOLOMAP_H

/* C interface to the graded-manifold holonomy toolkit. All analysis runs
 * through hm_run; reports are JSON strings owned by the library and released
 * with hm_string_free. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hm_status {
  HM_OK = 0,
  HM_ERROR = 1,
  HM_SINGULAR = 2 /* computed, verdict singular (regularity command) */
} hm_status;

typedef struct hm_model hm_model; /* opaque */

typedef struct hm_options {
  /* negative values defer to the model's analysis block */
  double eps;
  int steps;
  int grid;
  double tol_rank;
  double tol_cert;
  double tol_deg;
} hm_options;

void hm_options_init(hm_options* opts);

/* Model constructors. On failure return NULL and, when err is non-NULL,
 * write a message of at most errcap-1 characters. */
hm_model* hm_model_from_text(const char* text, char* err, int errcap);
hm_model* hm_model_from_file(const char* path, char* err, int errcap);
hm_model* hm_model_builtin(const char* name, char* err, int errcap);
void hm_model_free(hm_model* model);

/* Serializes the model back to the text format; free with hm_string_free. */
char* hm_model_to_text(const hm_model* model);

/* Runs a subcommand: "degree", "frame", "coeffs", "holonomy", "regularity",
 * "singular", "variation", "example". arg carries the builtin name for
 * "example" and the probe coefficients for "variation" (may be NULL).
 * On HM_OK / HM_SINGULAR, *json_out receives the JSON report (release with
 * hm_string_free). model may be NULL for "example". */
hm_status hm_run(const hm_model* model, const char* command, const hm_options* opts,
                 const char* arg, char** json_out, char* err, int errcap);

void hm_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* HOLOMAP_H */
