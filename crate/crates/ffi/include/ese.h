#ifndef ESE_H
#define ESE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; nonzero values match the CLI's exit codes per error
 * class, with FFI-specific codes above 100.
 */
typedef enum EseStatus {
  EseStatus_Ok = 0,
  EseStatus_InvalidParameter = 2,
  EseStatus_InsufficientKeyMaterial = 3,
  EseStatus_Io = 4,
  EseStatus_Estimation = 5,
  EseStatus_DegenerateKey = 6,
  EseStatus_MalformedContainer = 7,
  EseStatus_InvalidEntropy = 8,
  EseStatus_NoModulus = 9,
  EseStatus_NullPointer = 100,
} EseStatus;

/**
 * Opaque handle holding the encryption configuration, the modulus cache
 * and the last error message. Not thread-safe; use one per thread.
 */
typedef struct EseContext EseContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a context. `chunk_bits` must be a positive multiple of 8;
 * `eps_exp` in 1..=255 sets the security level 2^-eps_exp;
 * `entropy_ratio` is the estimated entropy per data bit in (0, 1];
 * `embedded_x` nonzero stores the public string inline instead of a
 * seed. Returns null on invalid parameters.
 */
struct EseContext *ese_context_new(uint64_t chunk_bits,
                                   uint32_t eps_exp,
                                   double entropy_ratio,
                                   double data_ratio,
                                   uintptr_t workers,
                                   int32_t embedded_x);

/**
 * Releases a context created by `ese_context_new`. Null is a no-op.
 */
void ese_context_free(struct EseContext *ctx);

/**
 * Message describing the context's most recent failure, or null if the
 * last call succeeded. The pointer is owned by the context and valid
 * until the next call on it.
 */
const char *ese_last_error(const struct EseContext *ctx);

/**
 * Key length in bits for an n-bit message with at least t bits of
 * collision entropy at security 2^-eps_exp. Writes the length to
 * `ell_out` and whether the scheme degrades to a one-time pad to
 * `otp_out` (may be null).
 */
enum EseStatus ese_key_length(uint64_t n_bits,
                              uint64_t t_bits,
                              uint32_t eps_exp,
                              uint64_t *ell_out,
                              int32_t *otp_out);

/**
 * Key material (in bytes) needed to encrypt `plaintext_len` bytes under
 * the context's configuration. Writes to `bytes_out`.
 */
enum EseStatus ese_key_requirement(struct EseContext *ctx,
                                   uintptr_t plaintext_len,
                                   uint64_t *bytes_out);

/**
 * Encrypts a buffer into a ciphertext container. On success `*out` holds
 * a library-owned buffer of `*out_len` bytes; free it with
 * `ese_buffer_free`.
 */
enum EseStatus ese_encrypt(struct EseContext *ctx,
                           const uint8_t *plaintext,
                           uintptr_t plaintext_len,
                           const uint8_t *key,
                           uintptr_t key_len,
                           uint8_t **out,
                           uintptr_t *out_len);

/**
 * Decrypts a ciphertext container produced by `ese_encrypt` with the
 * same key material. Output buffer ownership as in `ese_encrypt`.
 */
enum EseStatus ese_decrypt(struct EseContext *ctx,
                           const uint8_t *container,
                           uintptr_t container_len,
                           const uint8_t *key,
                           uintptr_t key_len,
                           uint8_t **out,
                           uintptr_t *out_len);

/**
 * Frees a buffer returned by `ese_encrypt`/`ese_decrypt`. The length
 * must be the value the library reported. Null is a no-op.
 */
void ese_buffer_free(uint8_t *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ESE_H */
