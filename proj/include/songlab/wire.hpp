#pragma once

// Binary message layout (all integers big-endian):
//
//   LoginRequest: u32 id_len | id bytes | c_a[16] | w_a[16] | u64 t_a
//   ServerReply:  u32 id_len | id bytes | c_s[16] | u64 t_s
//
// The layout is frozen; tests/golden/wire_*.hex pin it.

#include "songlab/crypto.hpp"
#include "songlab/protocol.hpp"

namespace songlab::wire {

crypto::Bytes encode(const protocol::LoginRequest& req);
crypto::Bytes encode(const protocol::ServerReply& reply);

/// Throw FormatError on truncation, trailing bytes, or an invalid identity.
protocol::LoginRequest decode_login_request(crypto::ByteView bytes);
protocol::ServerReply decode_server_reply(crypto::ByteView bytes);

}  // namespace songlab::wire
