#ifndef MMDISTILL_H
#define MMDISTILL_H

/* C interface to the moment-matching distillation core.
 *
 * All entry points operate on an opaque session handle and return an
 * error code; on failure mmd_last_error() holds a message. File-based
 * artifacts (JSON run configs, MMD1 checkpoints, CSV sample dumps) are
 * the data interchange.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MMD_API __declspec(dllexport)
#else
#define MMD_API __attribute__((visibility("default")))
#endif

enum {
    MMD_OK = 0,
    MMD_ERR_USAGE = 1,  /* bad arguments or malformed config */
    MMD_ERR_RUNTIME = 2 /* training diverged, I/O failure, bad checkpoint */
};

typedef struct mmd_session mmd_session;

MMD_API mmd_session* mmd_session_create(void);
MMD_API void mmd_session_destroy(mmd_session* s);

/* Message for the most recent failing call on this session; empty
 * string if the last call succeeded. Owned by the session. */
MMD_API const char* mmd_last_error(const mmd_session* s);

/* Pretrain the teacher described by the JSON run config; writes
 * teacher.ckpt (with optimizer state), a metrics CSV and a resolved
 * config snapshot into the config's out_dir. */
MMD_API int mmd_train(mmd_session* s, const char* config_path);

/* Distill the teacher in out_dir into a k-step sampler. variant
 * ("alternating"/"instant"), k (> 0) and transition
 * ("conditional"/"marginal") override the config when non-null /
 * positive. */
MMD_API int mmd_distill(mmd_session* s, const char* config_path, const char* variant, int k,
                        const char* transition);

/* Draw n samples from a checkpointed model with k steps in the given
 * mode ("ancestral"/"ddim") and guidance scale; writes a CSV dump. */
MMD_API int mmd_sample(mmd_session* s, const char* ckpt_path, int k, int n, const char* mode,
                       double guidance, unsigned long long seed, const char* out_csv);

/* Compare sample set A (CSV) against B: another CSV (energy distance
 * only) or a run config (energy distance vs fresh data, mode coverage,
 * and — when ckpt_path is non-null — the moment residual of that
 * generator). out_json may be null to skip the report file. */
MMD_API int mmd_eval(mmd_session* s, const char* samples_a_csv, const char* samples_b_or_config,
                     const char* ckpt_path, const char* out_json);

/* Run the built-in identity/property checks, printing one line per
 * check to stdout. Returns MMD_OK only if every check passes. */
MMD_API int mmd_check(mmd_session* s, unsigned long long seed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MMDISTILL_H */
