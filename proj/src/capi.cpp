#include "songlab/songlab.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "songlab/attacks.hpp"
#include "songlab/crypto.hpp"
#include "songlab/environment.hpp"
#include "songlab/error.hpp"
#include "songlab/scenario.hpp"
#include "songlab/server.hpp"
#include "songlab/transcript.hpp"
#include "songlab/wire.hpp"

using namespace songlab;

struct songlab_sim {
  env::Simulation sim;
};

struct songlab_card {
  protocol::SmartCardState state;
};

struct songlab_config {
  scenario::ScenarioConfig cfg;
};

struct songlab_report {
  scenario::Report report;
};

namespace {

thread_local std::string g_last_error;

songlab_status fail(songlab_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

songlab_status from_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return SONGLAB_E_INVALID_ARGUMENT;
    case ErrorCode::DuplicateIdentity: return SONGLAB_E_DUPLICATE_IDENTITY;
    case ErrorCode::NoTranscript: return SONGLAB_E_NO_TRANSCRIPT;
    case ErrorCode::Unsupported: return SONGLAB_E_UNSUPPORTED;
    case ErrorCode::EpsilonOutOfRange: return SONGLAB_E_EPSILON_OUT_OF_RANGE;
    case ErrorCode::ConfigError: return SONGLAB_E_CONFIG;
    case ErrorCode::IoError: return SONGLAB_E_IO;
    case ErrorCode::FormatError: return SONGLAB_E_FORMAT;
  }
  return SONGLAB_E_INTERNAL;
}

songlab_status from_status(protocol::Status s) {
  switch (s) {
    case protocol::Status::Accepted: return SONGLAB_OK;
    case protocol::Status::UnknownIdentity: return SONGLAB_E_UNKNOWN_IDENTITY;
    case protocol::Status::StaleTimestamp: return SONGLAB_E_STALE_TIMESTAMP;
    case protocol::Status::MacMismatch: return SONGLAB_E_MAC_MISMATCH;
    case protocol::Status::IdentityMismatch: return SONGLAB_E_IDENTITY_MISMATCH;
  }
  return SONGLAB_E_INTERNAL;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
songlab_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SONGLAB_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SONGLAB_E_INTERNAL, e.what());
  } catch (...) {
    return fail(SONGLAB_E_INTERNAL, "unknown exception");
  }
}

std::string text(const char* p, std::size_t n) {
  if (p == nullptr && n != 0) throw Error(ErrorCode::InvalidArgument, "null string with length");
  return n == 0 ? std::string() : std::string(p, n);
}

template <class T>
T bits(const uint8_t* p) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, "null 16-byte buffer");
  return T::from({p, crypto::kBlockBytes});
}

template <class T>
void put(const T& v, uint8_t* out) {
  if (out == nullptr) throw Error(ErrorCode::InvalidArgument, "null output buffer");
  std::memcpy(out, v.bytes.data(), crypto::kBlockBytes);
}

template <class P>
void require(const P* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string("null ") + what);
}

crypto::HashVariant variant_of(songlab_hash_variant v) {
  if (v == SONGLAB_HASH_RAW) return crypto::HashVariant::Raw;
  if (v == SONGLAB_HASH_FINALIZED) return crypto::HashVariant::Finalized;
  throw Error(ErrorCode::InvalidArgument, "unknown hash variant");
}

songlab_status copy_out(const std::string& s, char* buf, size_t cap, size_t* len) {
  if (len != nullptr) *len = s.size();
  if (s.size() > cap || (buf == nullptr && !s.empty())) {
    return fail(SONGLAB_E_BUFFER_TOO_SMALL, "output buffer too small");
  }
  if (!s.empty()) std::memcpy(buf, s.data(), s.size());
  return SONGLAB_OK;
}

}  // namespace

extern "C" {

const char* songlab_status_string(songlab_status status) {
  switch (status) {
    case SONGLAB_OK: return "ok";
    case SONGLAB_E_INVALID_ARGUMENT: return "invalid argument";
    case SONGLAB_E_DUPLICATE_IDENTITY: return "duplicate identity";
    case SONGLAB_E_UNKNOWN_IDENTITY: return "unknown identity";
    case SONGLAB_E_STALE_TIMESTAMP: return "stale timestamp";
    case SONGLAB_E_MAC_MISMATCH: return "mac mismatch";
    case SONGLAB_E_IDENTITY_MISMATCH: return "identity mismatch";
    case SONGLAB_E_NO_TRANSCRIPT: return "no transcript";
    case SONGLAB_E_UNSUPPORTED: return "unsupported";
    case SONGLAB_E_EPSILON_OUT_OF_RANGE: return "epsilon out of range";
    case SONGLAB_E_CONFIG: return "config error";
    case SONGLAB_E_IO: return "io error";
    case SONGLAB_E_FORMAT: return "format error";
    case SONGLAB_E_BUFFER_TOO_SMALL: return "buffer too small";
    case SONGLAB_E_NOT_FOUND: return "not found";
    case SONGLAB_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* songlab_last_error(void) { return g_last_error.c_str(); }

const char* songlab_version(void) { return "1.0.0"; }

songlab_status songlab_hash(const uint8_t* msg, size_t len, songlab_hash_variant variant,
                            uint8_t out[16]) {
  return guarded([&] {
    if (msg == nullptr && len != 0) throw Error(ErrorCode::InvalidArgument, "null message");
    put(crypto::md_hash(crypto::ByteView(msg, len), variant_of(variant)), out);
    return SONGLAB_OK;
  });
}

songlab_status songlab_compress(const uint8_t state[16], const uint8_t block[16], uint8_t out[16]) {
  return guarded([&] {
    put(crypto::compress(bits<crypto::MdState>(state), bits<crypto::Block>(block)), out);
    return SONGLAB_OK;
  });
}

songlab_status songlab_invert_compress(const uint8_t state_after[16], const uint8_t block[16],
                                       uint8_t out[16]) {
  return guarded([&] {
    put(crypto::invert_compress(bits<crypto::MdState>(state_after), bits<crypto::Block>(block)),
        out);
    return SONGLAB_OK;
  });
}

songlab_status songlab_encrypt(const uint8_t key[16], const uint8_t plaintext[16],
                               uint8_t out[16]) {
  return guarded([&] {
    put(crypto::encrypt(bits<crypto::SymmetricKey>(key), bits<crypto::Block>(plaintext)), out);
    return SONGLAB_OK;
  });
}

songlab_status songlab_decrypt(const uint8_t key[16], const uint8_t ciphertext[16],
                               uint8_t out[16]) {
  return guarded([&] {
    put(crypto::decrypt(bits<crypto::SymmetricKey>(key), bits<crypto::Block>(ciphertext)), out);
    return SONGLAB_OK;
  });
}

songlab_status songlab_mod_exp_u64(uint64_t base, uint64_t exponent, uint64_t modulus,
                                   uint64_t* out) {
  return guarded([&] {
    require(out, "output");
    auto big = [](uint64_t v) {
      crypto::Integer i;
      mpz_import(i.get_mpz_t(), 1, 1, sizeof v, 0, 0, &v);
      return i;
    };
    const crypto::Integer r = crypto::mod_exp(big(base), big(exponent), big(modulus));
    uint64_t v = 0;
    mpz_export(&v, nullptr, 1, sizeof v, 0, 0, r.get_mpz_t());
    *out = v;
    return SONGLAB_OK;
  });
}

songlab_status songlab_encode_login_request(const char* id, size_t id_len, const uint8_t c_a[16],
                                            const uint8_t w_a[16], uint64_t t_a, uint8_t* buf,
                                            size_t cap, size_t* written) {
  return guarded([&] {
    const protocol::LoginRequest req{protocol::Identity(text(id, id_len)),
                                     bits<crypto::Digest>(c_a), bits<crypto::Block>(w_a),
                                     protocol::Timestamp{t_a}};
    const auto bytes = wire::encode(req);
    if (written != nullptr) *written = bytes.size();
    if (bytes.size() > cap || buf == nullptr) {
      return fail(SONGLAB_E_BUFFER_TOO_SMALL, "output buffer too small");
    }
    std::memcpy(buf, bytes.data(), bytes.size());
    return SONGLAB_OK;
  });
}

songlab_status songlab_decode_login_request(const uint8_t* bytes, size_t len, char* id_buf,
                                            size_t id_cap, size_t* id_len, uint8_t c_a[16],
                                            uint8_t w_a[16], uint64_t* t_a) {
  return guarded([&] {
    require(bytes, "bytes");
    const auto req = wire::decode_login_request({bytes, len});
    put(req.c_a, c_a);
    put(req.w_a, w_a);
    if (t_a != nullptr) *t_a = req.t_a.seconds;
    return copy_out(req.id.value(), id_buf, id_cap, id_len);
  });
}

songlab_status songlab_sim_create(uint64_t seed, unsigned prime_bits, uint64_t delta_t,
                                  songlab_hash_variant variant, uint64_t start_time,
                                  songlab_sim** out) {
  return guarded([&] {
    require(out, "output handle");
    std::mt19937_64 rng(seed);
    auto params = crypto::GroupParams::generate(prime_bits, rng);
    protocol::ServerState server(std::move(params), delta_t, variant_of(variant));
    *out = new songlab_sim{env::Simulation(std::move(server), protocol::Timestamp{start_time}, rng())};
    return SONGLAB_OK;
  });
}

void songlab_sim_destroy(songlab_sim* sim) { delete sim; }

songlab_status songlab_sim_now(const songlab_sim* sim, uint64_t* now) {
  return guarded([&] {
    require(sim, "sim");
    require(now, "output");
    *now = sim->sim.now().seconds;
    return SONGLAB_OK;
  });
}

songlab_status songlab_sim_advance_clock(songlab_sim* sim, int64_t delta) {
  return guarded([&] {
    require(sim, "sim");
    sim->sim.clock().advance(delta);
    return SONGLAB_OK;
  });
}

songlab_status songlab_sim_register(songlab_sim* sim, const char* id, size_t id_len, const char* pw,
                                    size_t pw_len, songlab_card** out) {
  return guarded([&] {
    require(sim, "sim");
    require(out, "output handle");
    auto card = sim->sim.register_user(protocol::Identity(text(id, id_len)),
                                       protocol::Password(text(pw, pw_len)));
    *out = new songlab_card{std::move(card)};
    return SONGLAB_OK;
  });
}

songlab_status songlab_sim_run_session(songlab_sim* sim, const songlab_card* card, const char* pw,
                                       size_t pw_len, songlab_session_result* out) {
  return guarded([&] {
    require(sim, "sim");
    require(card, "card");
    require(out, "result");
    const auto o = sim->sim.run_session(card->state, protocol::Password(text(pw, pw_len)));
    *out = songlab_session_result{};
    out->session_id = o.transcript.session_id;
    out->server_accepted = o.transcript.server_accepted ? 1 : 0;
    out->user_accepted = o.transcript.user_accepted ? 1 : 0;
    out->server_status = from_status(o.server_status);
    out->user_status = o.user_status ? from_status(*o.user_status) : SONGLAB_E_NOT_FOUND;
    out->keys_equal = (o.user_key && o.server_key && *o.user_key == *o.server_key) ? 1 : 0;
    if (o.user_key) put(o.user_key->bits, out->user_key);
    if (o.server_key) put(o.server_key->bits, out->server_key);
    return SONGLAB_OK;
  });
}

songlab_status songlab_sim_transcript_count(const songlab_sim* sim, size_t* count) {
  return guarded([&] {
    require(sim, "sim");
    require(count, "output");
    *count = sim->sim.session_log().size();
    return SONGLAB_OK;
  });
}

songlab_status songlab_sim_save_log(const songlab_sim* sim, const char* path) {
  return guarded([&] {
    require(sim, "sim");
    require(path, "path");
    save_transcript_log(path, sim->sim.session_log());
    return SONGLAB_OK;
  });
}

void songlab_card_destroy(songlab_card* card) { delete card; }

songlab_status songlab_card_dump(const songlab_card* card, uint8_t b_a[16]) {
  return guarded([&] {
    require(card, "card");
    put(dump_card(card->state).b_a, b_a);
    return SONGLAB_OK;
  });
}

songlab_status songlab_card_change_password(songlab_card* card, const char* old_pw,
                                            size_t old_len, const char* new_pw, size_t new_len) {
  return guarded([&] {
    require(card, "card");
    card->state = protocol::change_password(card->state, protocol::Password(text(old_pw, old_len)),
                                            protocol::Password(text(new_pw, new_len)));
    return SONGLAB_OK;
  });
}

songlab_status songlab_card_clone(const uint8_t long_term_secret[16], const char* id,
                                  size_t id_len, const char* pw, size_t pw_len,
                                  songlab_card** out) {
  return guarded([&] {
    require(out, "output handle");
    auto card = attacks::clone_card(bits<crypto::Digest>(long_term_secret),
                                    protocol::Identity(text(id, id_len)),
                                    protocol::Password(text(pw, pw_len)));
    *out = new songlab_card{std::move(card)};
    return SONGLAB_OK;
  });
}

songlab_status songlab_attack_guess(const char* id, size_t id_len, const uint8_t b_a[16],
                                    const char* log_path, const char* dictionary_path,
                                    songlab_guess_result* result, char* pw_buf, size_t pw_cap,
                                    size_t* pw_len) {
  return guarded([&] {
    require(log_path, "log path");
    require(dictionary_path, "dictionary path");
    require(result, "result");
    const CardDump dump{protocol::Identity(text(id, id_len)), bits<crypto::Digest>(b_a)};
    const auto log = load_transcript_log(log_path);
    const auto dict = attacks::Dictionary::load(dictionary_path);
    const auto g = attacks::offline_password_guess(dump, log, dict);
    *result = songlab_guess_result{g.password ? 1 : 0, g.trials, g.confirmations};
    if (!g.password) {
      if (pw_len != nullptr) *pw_len = 0;
      return SONGLAB_OK;
    }
    return copy_out(g.password->value(), pw_buf, pw_cap, pw_len);
  });
}

songlab_status songlab_attack_forge(const uint8_t c_s[16], uint64_t t_s, int64_t epsilon,
                                    songlab_hash_variant variant, uint8_t forged_c_s[16],
                                    uint64_t* forged_t_s) {
  return guarded([&] {
    require(forged_t_s, "output");
    // The identity is carried through untouched; any valid placeholder works.
    const protocol::ServerReply reply{protocol::Identity("-"), bits<crypto::Digest>(c_s),
                                      protocol::Timestamp{t_s}};
    const auto forged = attacks::forge_server_reply(reply, epsilon, variant_of(variant));
    put(forged.reply.c_s, forged_c_s);
    *forged_t_s = forged.reply.t_s.seconds;
    return SONGLAB_OK;
  });
}

songlab_status songlab_config_create(songlab_config** out) {
  return guarded([&] {
    require(out, "output handle");
    *out = new songlab_config{scenario::ScenarioConfig::defaults()};
    return SONGLAB_OK;
  });
}

songlab_status songlab_config_load(const char* path, songlab_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output handle");
    *out = new songlab_config{scenario::ScenarioConfig::load(path)};
    return SONGLAB_OK;
  });
}

void songlab_config_destroy(songlab_config* cfg) { delete cfg; }

songlab_status songlab_config_set(songlab_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
    return SONGLAB_OK;
  });
}

songlab_status songlab_scenario_run(const songlab_config* cfg, int with_header,
                                    songlab_report** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "output handle");
    *out = new songlab_report{scenario::run_scenario(cfg->cfg, with_header != 0)};
    return SONGLAB_OK;
  });
}

void songlab_report_destroy(songlab_report* report) { delete report; }

const char* songlab_report_text(const songlab_report* report) {
  return report == nullptr ? "" : report->report.text.c_str();
}

int songlab_report_exit_code(const songlab_report* report) {
  return report == nullptr ? 2 : report->report.exit_code;
}

}  // extern "C"
