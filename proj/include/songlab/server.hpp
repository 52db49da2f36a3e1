#pragma once

#include <cstdint>
#include <set>

#include "songlab/crypto.hpp"
#include "songlab/protocol.hpp"

namespace songlab::protocol {

class ServerState {
 public:
  ServerState(crypto::GroupParams params, std::uint64_t delta_t, HashVariant variant);

  const crypto::GroupParams& params() const noexcept { return params_; }
  std::uint64_t delta_t() const noexcept { return delta_t_; }
  HashVariant hash_variant() const noexcept { return variant_; }

  bool is_registered(const Identity& id) const { return registered_.contains(id); }
  std::size_t registered_count() const noexcept { return registered_.size(); }

  /// Issues a card. Throws DuplicateIdentity on a second registration.
  SmartCardState register_user(const Identity& id, const Password& pw);

  /// h(ID^x mod p), recomputed from x on every call.
  crypto::SymmetricKey card_key(const Identity& id) const;

 private:
  crypto::GroupParams params_;
  std::uint64_t delta_t_;
  HashVariant variant_;
  std::set<Identity> registered_;
};

struct LoginCheck {
  Status status = Status::MacMismatch;
  Nonce recovered{};  // meaningful only when status == Accepted

  bool accepted() const noexcept { return status == Status::Accepted; }
};

SmartCardState register_user(ServerState& server, const Identity& id, const Password& pw);

/// Identity, then freshness, then MAC.
LoginCheck server_verify_login(const ServerState& server, const LoginRequest& req, Timestamp now);

ServerReply build_server_reply(const ServerState& server, const Identity& id,
                               const Nonce& recovered_nonce, Timestamp now);

}  // namespace songlab::protocol
