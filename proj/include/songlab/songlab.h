/*
 * songlab C API.
 *
 * Every function returns a songlab_status. On failure a human-readable
 * message for the calling thread is available from songlab_last_error().
 * Handles are opaque; each *_create / *_load has a matching *_destroy, and
 * destroy functions accept NULL.
 *
 * Byte strings are (pointer, length) pairs and need not be NUL-terminated.
 * 128-bit values (digests, blocks, chaining states) are 16-byte buffers.
 */
#ifndef SONGLAB_SONGLAB_H
#define SONGLAB_SONGLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define SONGLAB_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define SONGLAB_API __attribute__((visibility("default")))
#else
#  define SONGLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SONGLAB_DIGEST_BYTES 16

typedef enum songlab_status {
  SONGLAB_OK = 0,
  SONGLAB_E_INVALID_ARGUMENT = 1,
  SONGLAB_E_DUPLICATE_IDENTITY = 2,
  SONGLAB_E_UNKNOWN_IDENTITY = 3,
  SONGLAB_E_STALE_TIMESTAMP = 4,
  SONGLAB_E_MAC_MISMATCH = 5,
  SONGLAB_E_IDENTITY_MISMATCH = 6,
  SONGLAB_E_NO_TRANSCRIPT = 7,
  SONGLAB_E_UNSUPPORTED = 8,
  SONGLAB_E_EPSILON_OUT_OF_RANGE = 9,
  SONGLAB_E_CONFIG = 10,
  SONGLAB_E_IO = 11,
  SONGLAB_E_FORMAT = 12,
  SONGLAB_E_BUFFER_TOO_SMALL = 13,
  SONGLAB_E_NOT_FOUND = 14,
  SONGLAB_E_INTERNAL = 99
} songlab_status;

typedef enum songlab_hash_variant {
  SONGLAB_HASH_RAW = 0,
  SONGLAB_HASH_FINALIZED = 1
} songlab_hash_variant;

SONGLAB_API const char* songlab_status_string(songlab_status status);
SONGLAB_API const char* songlab_last_error(void);
SONGLAB_API const char* songlab_version(void);

/* ---- primitives --------------------------------------------------------- */

SONGLAB_API songlab_status songlab_hash(const uint8_t* msg, size_t len,
                                        songlab_hash_variant variant,
                                        uint8_t out[SONGLAB_DIGEST_BYTES]);
SONGLAB_API songlab_status songlab_compress(const uint8_t state[16], const uint8_t block[16],
                                            uint8_t out[16]);
SONGLAB_API songlab_status songlab_invert_compress(const uint8_t state_after[16],
                                                   const uint8_t block[16], uint8_t out[16]);
SONGLAB_API songlab_status songlab_encrypt(const uint8_t key[16], const uint8_t plaintext[16],
                                           uint8_t out[16]);
SONGLAB_API songlab_status songlab_decrypt(const uint8_t key[16], const uint8_t ciphertext[16],
                                           uint8_t out[16]);
/* 64-bit convenience wrapper; the C++ API is arbitrary precision. */
SONGLAB_API songlab_status songlab_mod_exp_u64(uint64_t base, uint64_t exponent,
                                               uint64_t modulus, uint64_t* out);

/* ---- wire format -------------------------------------------------------- */

/* Encodes a login request. *written receives the required size even when
 * SONGLAB_E_BUFFER_TOO_SMALL is returned. */
SONGLAB_API songlab_status songlab_encode_login_request(const char* id, size_t id_len,
                                                        const uint8_t c_a[16],
                                                        const uint8_t w_a[16], uint64_t t_a,
                                                        uint8_t* buf, size_t cap,
                                                        size_t* written);
/* Decodes; id_buf receives the identity bytes (no terminator). */
SONGLAB_API songlab_status songlab_decode_login_request(const uint8_t* bytes, size_t len,
                                                        char* id_buf, size_t id_cap,
                                                        size_t* id_len, uint8_t c_a[16],
                                                        uint8_t w_a[16], uint64_t* t_a);

/* ---- simulation --------------------------------------------------------- */

typedef struct songlab_sim songlab_sim;
typedef struct songlab_card songlab_card;

typedef struct songlab_session_result {
  uint64_t session_id;
  int server_accepted;
  int user_accepted;
  songlab_status server_status; /* SONGLAB_OK when accepted */
  songlab_status user_status;   /* SONGLAB_E_NOT_FOUND if no reply arrived */
  int keys_equal;
  uint8_t user_key[16];
  uint8_t server_key[16];
} songlab_session_result;

/* Generates a safe-prime group of prime_bits bits from seed. */
SONGLAB_API songlab_status songlab_sim_create(uint64_t seed, unsigned prime_bits, uint64_t delta_t,
                                              songlab_hash_variant variant, uint64_t start_time,
                                              songlab_sim** out);
SONGLAB_API void songlab_sim_destroy(songlab_sim* sim);
SONGLAB_API songlab_status songlab_sim_now(const songlab_sim* sim, uint64_t* now);
SONGLAB_API songlab_status songlab_sim_advance_clock(songlab_sim* sim, int64_t delta);
SONGLAB_API songlab_status songlab_sim_register(songlab_sim* sim, const char* id, size_t id_len,
                                                const char* pw, size_t pw_len,
                                                songlab_card** out);
SONGLAB_API songlab_status songlab_sim_run_session(songlab_sim* sim, const songlab_card* card,
                                                   const char* pw, size_t pw_len,
                                                   songlab_session_result* out);
SONGLAB_API songlab_status songlab_sim_transcript_count(const songlab_sim* sim, size_t* count);
/* Writes the session log in the documented text format. */
SONGLAB_API songlab_status songlab_sim_save_log(const songlab_sim* sim, const char* path);

SONGLAB_API void songlab_card_destroy(songlab_card* card);
/* Card-compromise oracle: the stored B_A value. */
SONGLAB_API songlab_status songlab_card_dump(const songlab_card* card, uint8_t b_a[16]);
SONGLAB_API songlab_status songlab_card_change_password(songlab_card* card, const char* old_pw,
                                                        size_t old_len, const char* new_pw,
                                                        size_t new_len);
/* Builds a card from a long-term secret, as an attacker would. */
SONGLAB_API songlab_status songlab_card_clone(const uint8_t long_term_secret[16], const char* id,
                                              size_t id_len, const char* pw, size_t pw_len,
                                              songlab_card** out);

/* ---- attacks ------------------------------------------------------------ */

typedef struct songlab_guess_result {
  int found;
  size_t trials;
  size_t confirmations;
} songlab_guess_result;

/* Off-line guessing against a saved transcript log and a dictionary file.
 * On success with found != 0, pw_buf receives the password (no terminator). */
SONGLAB_API songlab_status songlab_attack_guess(const char* id, size_t id_len,
                                                const uint8_t b_a[16], const char* log_path,
                                                const char* dictionary_path,
                                                songlab_guess_result* result, char* pw_buf,
                                                size_t pw_cap, size_t* pw_len);

/* Length-extension forgery of {ID_A, C_S, T_S}. */
SONGLAB_API songlab_status songlab_attack_forge(const uint8_t c_s[16], uint64_t t_s,
                                                int64_t epsilon, songlab_hash_variant variant,
                                                uint8_t forged_c_s[16], uint64_t* forged_t_s);

/* ---- scenarios ---------------------------------------------------------- */

typedef struct songlab_config songlab_config;
typedef struct songlab_report songlab_report;

/* Defaults (seed from $SONGLAB_SEED when set). */
SONGLAB_API songlab_status songlab_config_create(songlab_config** out);
SONGLAB_API songlab_status songlab_config_load(const char* path, songlab_config** out);
SONGLAB_API void songlab_config_destroy(songlab_config* cfg);
/* Flag-style override: seed, attack, dictionary, hash-variant, epsilon,
 * sessions, prime-bits, delta-t, victim, expect, transcript-log. */
SONGLAB_API songlab_status songlab_config_set(songlab_config* cfg, const char* key,
                                              const char* value);

SONGLAB_API songlab_status songlab_scenario_run(const songlab_config* cfg, int with_header,
                                                songlab_report** out);
SONGLAB_API void songlab_report_destroy(songlab_report* report);
SONGLAB_API const char* songlab_report_text(const songlab_report* report);
/* 0 expectations met, 1 violated. */
SONGLAB_API int songlab_report_exit_code(const songlab_report* report);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif /* SONGLAB_SONGLAB_H */
