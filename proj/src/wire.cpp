#include "songlab/wire.hpp"

#include <algorithm>

#include "songlab/error.hpp"

namespace songlab::wire {

using crypto::Bytes;
using crypto::ByteView;

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class T>
void put_bits(Bytes& out, const T& bits) {
  out.insert(out.end(), bits.bytes.begin(), bits.bytes.end());
}

void put_identity(Bytes& out, const protocol::Identity& id) {
  put_u32(out, static_cast<std::uint32_t>(id.value().size()));
  out.insert(out.end(), id.value().begin(), id.value().end());
}

class Reader {
 public:
  explicit Reader(ByteView bytes) : bytes_(bytes) {}

  ByteView take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::FormatError, "truncated message");
    ByteView out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint64_t uint(std::size_t width) {
    std::uint64_t v = 0;
    for (auto b : take(width)) v = v << 8 | b;
    return v;
  }

  template <class T>
  T bits() {
    return T::from(take(crypto::kBlockBytes));
  }

  protocol::Identity identity() {
    const auto len = static_cast<std::size_t>(uint(4));
    ByteView raw = take(len);
    try {
      return protocol::Identity(std::string(raw.begin(), raw.end()));
    } catch (const Error& e) {
      throw Error(ErrorCode::FormatError, std::string("bad identity field: ") + e.what());
    }
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) throw Error(ErrorCode::FormatError, "trailing bytes after message");
  }

 private:
  ByteView bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes encode(const protocol::LoginRequest& req) {
  Bytes out;
  put_identity(out, req.id);
  put_bits(out, req.c_a);
  put_bits(out, req.w_a);
  put_u64(out, req.t_a.seconds);
  return out;
}

Bytes encode(const protocol::ServerReply& reply) {
  Bytes out;
  put_identity(out, reply.id);
  put_bits(out, reply.c_s);
  put_u64(out, reply.t_s.seconds);
  return out;
}

protocol::LoginRequest decode_login_request(ByteView bytes) {
  Reader r(bytes);
  auto id = r.identity();
  auto c_a = r.bits<crypto::Digest>();
  auto w_a = r.bits<crypto::Block>();
  protocol::Timestamp t_a{r.uint(8)};
  r.expect_end();
  return {std::move(id), c_a, w_a, t_a};
}

protocol::ServerReply decode_server_reply(ByteView bytes) {
  Reader r(bytes);
  auto id = r.identity();
  auto c_s = r.bits<crypto::Digest>();
  protocol::Timestamp t_s{r.uint(8)};
  r.expect_end();
  return {std::move(id), c_s, t_s};
}

}  // namespace songlab::wire
