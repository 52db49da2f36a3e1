#include "songlab/server.hpp"

#include "songlab/error.hpp"

namespace songlab::protocol {

ServerState::ServerState(crypto::GroupParams params, std::uint64_t delta_t, HashVariant variant)
    : params_(std::move(params)), delta_t_(delta_t), variant_(variant) {
  if (delta_t_ == 0) throw Error(ErrorCode::InvalidArgument, "delta_t must be > 0");
}

crypto::SymmetricKey ServerState::card_key(const Identity& id) const {
  return crypto::long_term_secret(id.bytes(), params_);
}

SmartCardState ServerState::register_user(const Identity& id, const Password& pw) {
  if (registered_.contains(id)) {
    throw Error(ErrorCode::DuplicateIdentity, "identity '" + id.value() + "' already registered");
  }
  SmartCardState card{id, card_key(id).as<crypto::DigestTag>() ^ hash_password(pw)};
  registered_.insert(id);
  return card;
}

SmartCardState register_user(ServerState& server, const Identity& id, const Password& pw) {
  return server.register_user(id, pw);
}

LoginCheck server_verify_login(const ServerState& server, const LoginRequest& req, Timestamp now) {
  if (!server.is_registered(req.id)) return {Status::UnknownIdentity, {}};
  if (!is_fresh(req.t_a, now, server.delta_t())) return {Status::StaleTimestamp, {}};

  const crypto::SymmetricKey k_a = server.card_key(req.id);
  const Nonce r_a = crypto::decrypt(k_a, req.w_a) ^ encode_timestamp(req.t_a);
  const Digest c_a = login_mac(req.t_a, r_a, req.w_a, encode_identity(req.id));
  if (c_a != req.c_a) return {Status::MacMismatch, {}};
  return {Status::Accepted, r_a};
}

ServerReply build_server_reply(const ServerState& server, const Identity& id,
                               const Nonce& recovered_nonce, Timestamp now) {
  return ServerReply{id, server_mac(encode_identity(id), recovered_nonce, now, server.hash_variant()),
                     now};
}

}  // namespace songlab::protocol
