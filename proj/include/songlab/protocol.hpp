#pragma once

// Public side of the smart-card scheme: message types, field encodings, and
// everything the user agent and card compute. Nothing here touches the
// server's secret exponent; that lives in server.hpp.

#include <cstdint>
#include <string>
#include <string_view>

#include "songlab/crypto.hpp"

namespace songlab::protocol {

using crypto::Block;
using crypto::Digest;
using crypto::HashVariant;

/// Printable, non-empty, compared byte-exact.
class Identity {
 public:
  explicit Identity(std::string value);
  const std::string& value() const noexcept { return value_; }
  crypto::ByteView bytes() const noexcept;
  friend auto operator<=>(const Identity&, const Identity&) = default;

 private:
  std::string value_;
};

class Password {
 public:
  explicit Password(std::string value);
  const std::string& value() const noexcept { return value_; }
  crypto::ByteView bytes() const noexcept;
  friend bool operator==(const Password&, const Password&) = default;

 private:
  std::string value_;
};

/// Simulated epoch seconds.
struct Timestamp {
  std::uint64_t seconds = 0;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

using Nonce = Block;

struct SmartCardState {
  Identity id;
  Digest b_a;
  friend bool operator==(const SmartCardState&, const SmartCardState&) = default;
};

struct LoginRequest {
  Identity id;
  Digest c_a;
  Block w_a;
  Timestamp t_a;
  friend bool operator==(const LoginRequest&, const LoginRequest&) = default;
};

struct ServerReply {
  Identity id;
  Digest c_s;
  Timestamp t_s;
  friend bool operator==(const ServerReply&, const ServerReply&) = default;
};

struct SessionKey {
  Digest bits;
  friend bool operator==(const SessionKey&, const SessionKey&) = default;
};

enum class Status {
  Accepted,
  UnknownIdentity,
  StaleTimestamp,
  MacMismatch,
  IdentityMismatch,
};

const char* to_string(Status s) noexcept;

// ---- field encodings ---------------------------------------------------------

/// 8 zero bytes then the 8-byte big-endian seconds value.
Block encode_timestamp(Timestamp t) noexcept;

/// Identity squeezed to one block: h(id, Finalized).
Block encode_identity(const Identity& id);

/// h(pw) as used in B_A and K_A.
Digest hash_password(const Password& pw);

/// True iff t <= now and now - t <= window.
bool is_fresh(Timestamp t, Timestamp now, std::uint64_t window) noexcept;

// ---- MAC constructions -------------------------------------------------------

/// C_A = h(T_A || R_A || W_A || ID_A).
Digest login_mac(Timestamp t_a, const Nonce& r_a, const Block& w_a, const Block& id_field);

/// C_S = h(ID_A || R_A || T_S) under the server's configured variant.
Digest server_mac(const Block& id_field, const Nonce& r_a, Timestamp t_s, HashVariant variant);

// ---- card / user agent -------------------------------------------------------

LoginRequest build_login_request(const SmartCardState& card, const Password& pw,
                                 const Nonce& nonce, Timestamp now);

Status user_verify_reply(const Identity& id, const Nonce& original_nonce, const ServerReply& reply,
                         Timestamp now, std::uint64_t delta_t, HashVariant variant);

/// sk = h(ID_A || T_S || T_A || R_A), always Finalized.
SessionKey derive_session_key(const Identity& id, Timestamp t_s, Timestamp t_a, const Nonce& nonce);

/// B_new = B XOR h(old) XOR h(new). The card cannot check old_pw; a wrong one
/// leaves the card unusable.
SmartCardState change_password(const SmartCardState& card, const Password& old_pw,
                               const Password& new_pw);

}  // namespace songlab::protocol
