/* Copyright 2026 The dgalab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libdgalab.
 *
 * Every function returns a dgalab_status. On failure a description is
 * available from dgalab_last_error() (thread-local, valid until the next call
 * on the same thread). Strings returned through char** out-parameters are
 * heap-allocated and must be released with dgalab_string_free(). Handles are
 * released with their matching *_free function; passing NULL is a no-op.
 */

#ifndef DGALAB_H
#define DGALAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(DGALAB_BUILDING_LIBRARY)
#define DGALAB_API __attribute__((visibility("default")))
#else
#define DGALAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dgalab_status {
  DGALAB_OK = 0,
  DGALAB_ERR_INVALID_ARGUMENT = 1, /* NULL handle or out-pointer, bad enum */
  DGALAB_ERR_CONFIG = 2,
  DGALAB_ERR_IO = 3,
  DGALAB_ERR_FORMAT = 4,
  DGALAB_ERR_DOMAIN = 5,
  DGALAB_ERR_NUMERIC = 6,
  DGALAB_ERR_CONTRACT = 7,
  DGALAB_ERR_CRYPTO = 8,
  DGALAB_ERR_POLICY = 9,
  DGALAB_ERR_DENIED = 10, /* vault access refused; see dgalab_denial */
  DGALAB_ERR_INTERNAL = 11
} dgalab_status;

typedef enum dgalab_label { DGALAB_BENIGN = 0, DGALAB_MALICIOUS = 1 } dgalab_label;

typedef enum dgalab_denial {
  DGALAB_DENIAL_NONE = 0,
  DGALAB_DENIAL_BAD_CREDENTIALS = 1,
  DGALAB_DENIAL_POLICY = 2,
  DGALAB_DENIAL_ATTRIBUTE = 3
} dgalab_denial;

typedef struct dgalab_corpus dgalab_corpus;
typedef struct dgalab_split dgalab_split;
typedef struct dgalab_model dgalab_model;
typedef struct dgalab_server dgalab_server;

DGALAB_API const char* dgalab_version(void);
DGALAB_API const char* dgalab_last_error(void);
DGALAB_API const char* dgalab_status_name(dgalab_status status);
DGALAB_API void dgalab_string_free(char* s);

/* ---- corpus ---------------------------------------------------------- */

DGALAB_API dgalab_status dgalab_corpus_new(dgalab_corpus** out);
DGALAB_API void dgalab_corpus_free(dgalab_corpus* corpus);
/* `rank,domain` rows; limit 0 means no limit. */
DGALAB_API dgalab_status dgalab_corpus_load_benign(dgalab_corpus* corpus, const char* path,
                                                   size_t limit, size_t* skipped_rows);
/* `domain,family` rows. */
DGALAB_API dgalab_status dgalab_corpus_load_dga(dgalab_corpus* corpus, const char* path,
                                                size_t* skipped_rows);
/* `families` random-DGA families sharing `count` samples (remainder to the
 * first families). */
DGALAB_API dgalab_status dgalab_corpus_add_synthetic_dga(dgalab_corpus* corpus, uint64_t seed,
                                                         unsigned families, size_t count);
/* Word-concatenation DGA; wordlist_path NULL uses the built-in list. */
DGALAB_API dgalab_status dgalab_corpus_add_dictionary_dga(dgalab_corpus* corpus, uint64_t seed,
                                                          const char* wordlist_path, size_t count);
DGALAB_API dgalab_status dgalab_corpus_add_synthetic_benign(dgalab_corpus* corpus, uint64_t seed,
                                                            size_t count);
DGALAB_API dgalab_status dgalab_corpus_size(const dgalab_corpus* corpus, size_t* records);

/* ---- split ----------------------------------------------------------- */

/* benign_cap < 0 caps benign at the malicious count. */
DGALAB_API dgalab_status dgalab_split_make(const dgalab_corpus* corpus, double train_fraction,
                                           uint64_t seed, int64_t benign_cap, dgalab_split** out);
DGALAB_API void dgalab_split_free(dgalab_split* split);
DGALAB_API dgalab_status dgalab_split_sizes(const dgalab_split* split, size_t* train,
                                            size_t* test, size_t* rejected);

/* ---- model ----------------------------------------------------------- */

typedef struct dgalab_train_config {
  size_t epochs;
  size_t batch_size;
  double lr;
  double dropout;
  uint64_t seed;
  int dim;
  int hidden;
} dgalab_train_config;

typedef void (*dgalab_epoch_callback)(size_t epoch, double mean_loss, double train_accuracy,
                                      void* user);

DGALAB_API void dgalab_train_config_default(dgalab_train_config* cfg);
/* log_json (optional) receives {"epochs":[...]}. */
DGALAB_API dgalab_status dgalab_train(const dgalab_split* split, const dgalab_train_config* cfg,
                                      dgalab_epoch_callback cb, void* user, dgalab_model** out,
                                      char** log_json);
DGALAB_API void dgalab_model_free(dgalab_model* model);
DGALAB_API dgalab_status dgalab_model_load(const char* path, dgalab_model** out);
/* Writes the model together with its optimizer state when it has one. */
DGALAB_API dgalab_status dgalab_model_save(const dgalab_model* model, const char* path);
DGALAB_API dgalab_status dgalab_model_score(const dgalab_model* model, const char* name,
                                            double* probability);

/* Metrics on the split's test partition as JSON. */
DGALAB_API dgalab_status dgalab_evaluate(const dgalab_model* model, const dgalab_split* split,
                                         char** report_json, char** report_table);

/* ---- attack ---------------------------------------------------------- */

/* Crafts every test sample with the `target` label at each epsilon.
 * sweep_csv: epsilon,detection_rate,mean_changed; crafted_csv: domain,family. */
DGALAB_API dgalab_status dgalab_attack(const dgalab_model* model, const dgalab_split* split,
                                       dgalab_label target, const double* epsilons,
                                       size_t n_epsilons, char** sweep_csv, char** sweep_table,
                                       char** crafted_csv);

typedef struct dgalab_harden_plan {
  double epsilon;
  int replace_malicious; /* nonzero: replace, zero: append */
  int keep_benign;
} dgalab_harden_plan;

DGALAB_API void dgalab_harden_plan_default(dgalab_harden_plan* plan);
DGALAB_API dgalab_status dgalab_harden(const dgalab_split* split, const dgalab_train_config* cfg,
                                       const dgalab_harden_plan* plan, dgalab_epoch_callback cb,
                                       void* user, dgalab_model** baseline,
                                       dgalab_model** hardened, char** report_json);

/* Scores every corpus record and returns `domain,family,score` rows with
 * score >= threshold. */
DGALAB_API dgalab_status dgalab_blacklist(const dgalab_model* model, const dgalab_corpus* corpus,
                                          double threshold, char** blacklist_csv,
                                          size_t* flagged);

/* ---- vault ----------------------------------------------------------- */

DGALAB_API dgalab_status dgalab_vault_keygen(const char* private_pem_path,
                                             const char* public_pem_path);
/* blacklist_csv, info_json, policy_json and credentials_json are contents,
 * not paths. credentials_json: {"Administrator": "...", "User": "...", ...}.
 * policy_json NULL uses the standard Administrator/User table.
 * kdf_log2_n 0 selects the default cost. */
DGALAB_API dgalab_status dgalab_vault_pack(const char* blacklist_csv, const char* info_json,
                                           const char* policy_json, const char* credentials_json,
                                           const char* private_pem_path, unsigned kdf_log2_n,
                                           const char* out_path);
/* DGALAB_OK when the container verifies; otherwise DGALAB_ERR_CRYPTO with the
 * reason in `detail` (optional). */
DGALAB_API dgalab_status dgalab_vault_verify(const char* container_path,
                                             const char* public_pem_path, char** detail);
/* section: "domain_blacklist" | "general_info" | "metadata".
 * attributes_json may be NULL. On refusal returns DGALAB_ERR_DENIED. */
DGALAB_API dgalab_status dgalab_vault_unseal(const char* container_path,
                                             const char* public_pem_path, const char* role,
                                             const char* passphrase, const char* attributes_json,
                                             const char* section, char** plaintext,
                                             dgalab_denial* denial);
/* Verifies the container and binds host:port (0 picks a free port). */
DGALAB_API dgalab_status dgalab_server_new(const char* container_path,
                                           const char* public_pem_path, const char* host, int port,
                                           dgalab_server** out, int* bound_port);
/* Blocks until dgalab_server_stop() is called from another thread. */
DGALAB_API dgalab_status dgalab_server_run(dgalab_server* server);
DGALAB_API void dgalab_server_stop(dgalab_server* server);
DGALAB_API void dgalab_server_free(dgalab_server* server);

DGALAB_API dgalab_status dgalab_sha256_file(const char* path, char** hex);

#ifdef __cplusplus
}
#endif

#endif /* DGALAB_H */
