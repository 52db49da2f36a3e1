#include "songlab/protocol.hpp"

#include <algorithm>
#include <array>

#include "songlab/error.hpp"

namespace songlab::protocol {

namespace {

crypto::ByteView view_of(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

Identity::Identity(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw Error(ErrorCode::InvalidArgument, "identity must be non-empty");
  const bool printable = std::all_of(value_.begin(), value_.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x20 && u != 0x7f;
  });
  if (!printable) {
    throw Error(ErrorCode::InvalidArgument, "identity must be printable");
  }
}

crypto::ByteView Identity::bytes() const noexcept { return view_of(value_); }

Password::Password(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw Error(ErrorCode::InvalidArgument, "password must be non-empty");
}

crypto::ByteView Password::bytes() const noexcept { return view_of(value_); }

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Accepted: return "Accepted";
    case Status::UnknownIdentity: return "UnknownIdentity";
    case Status::StaleTimestamp: return "StaleTimestamp";
    case Status::MacMismatch: return "MacMismatch";
    case Status::IdentityMismatch: return "IdentityMismatch";
  }
  return "Unknown";
}

Block encode_timestamp(Timestamp t) noexcept {
  Block b;
  for (int i = 0; i < 8; ++i) {
    b.bytes[15 - i] = static_cast<std::uint8_t>(t.seconds >> (8 * i));
  }
  return b;
}

Block encode_identity(const Identity& id) {
  return crypto::md_hash(id.bytes(), HashVariant::Finalized).as<crypto::BlockTag>();
}

Digest hash_password(const Password& pw) {
  return crypto::md_hash(pw.bytes(), HashVariant::Finalized);
}

bool is_fresh(Timestamp t, Timestamp now, std::uint64_t window) noexcept {
  return t.seconds <= now.seconds && now.seconds - t.seconds <= window;
}

Digest login_mac(Timestamp t_a, const Nonce& r_a, const Block& w_a, const Block& id_field) {
  const std::array<Block, 4> fields = {encode_timestamp(t_a), r_a, w_a, id_field};
  return crypto::md_hash_blocks(fields, HashVariant::Finalized);
}

Digest server_mac(const Block& id_field, const Nonce& r_a, Timestamp t_s, HashVariant variant) {
  const std::array<Block, 3> fields = {id_field, r_a, encode_timestamp(t_s)};
  return crypto::md_hash_blocks(fields, variant);
}

LoginRequest build_login_request(const SmartCardState& card, const Password& pw,
                                 const Nonce& nonce, Timestamp now) {
  const auto k_a = (card.b_a ^ hash_password(pw)).as<crypto::KeyTag>();
  const Block w_a = crypto::encrypt(k_a, nonce ^ encode_timestamp(now));
  const Digest c_a = login_mac(now, nonce, w_a, encode_identity(card.id));
  return LoginRequest{card.id, c_a, w_a, now};
}

Status user_verify_reply(const Identity& id, const Nonce& original_nonce, const ServerReply& reply,
                         Timestamp now, std::uint64_t delta_t, HashVariant variant) {
  if (reply.id != id) return Status::IdentityMismatch;
  if (!is_fresh(reply.t_s, now, delta_t)) return Status::StaleTimestamp;
  const Digest expected = server_mac(encode_identity(id), original_nonce, reply.t_s, variant);
  return expected == reply.c_s ? Status::Accepted : Status::MacMismatch;
}

SessionKey derive_session_key(const Identity& id, Timestamp t_s, Timestamp t_a,
                              const Nonce& nonce) {
  const std::array<Block, 4> fields = {encode_identity(id), encode_timestamp(t_s),
                                       encode_timestamp(t_a), nonce};
  return SessionKey{crypto::md_hash_blocks(fields, HashVariant::Finalized)};
}

SmartCardState change_password(const SmartCardState& card, const Password& old_pw,
                               const Password& new_pw) {
  return SmartCardState{card.id, card.b_a ^ hash_password(old_pw) ^ hash_password(new_pw)};
}

}  // namespace songlab::protocol
