#include "songlab/crypto.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include "songlab/error.hpp"

namespace songlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateIdentity: return "DuplicateIdentity";
    case ErrorCode::NoTranscript: return "NoTranscript";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace songlab

namespace songlab::crypto {

namespace {

constexpr std::array<std::uint32_t, 4> kIv = {0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u};
constexpr std::array<std::uint32_t, 8> kRoundConstants = {
    0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
    0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u,
};

using Words = std::array<std::uint32_t, 4>;

Words load(const MdState& s) {
  Words w{};
  for (std::size_t i = 0; i < 4; ++i) {
    w[i] = (std::uint32_t{s.bytes[4 * i]} << 24) | (std::uint32_t{s.bytes[4 * i + 1]} << 16) |
           (std::uint32_t{s.bytes[4 * i + 2]} << 8) | std::uint32_t{s.bytes[4 * i + 3]};
  }
  return w;
}

MdState store(const Words& w) {
  MdState s;
  for (std::size_t i = 0; i < 4; ++i) {
    s.bytes[4 * i] = static_cast<std::uint8_t>(w[i] >> 24);
    s.bytes[4 * i + 1] = static_cast<std::uint8_t>(w[i] >> 16);
    s.bytes[4 * i + 2] = static_cast<std::uint8_t>(w[i] >> 8);
    s.bytes[4 * i + 3] = static_cast<std::uint8_t>(w[i]);
  }
  return s;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto v : b) {
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::FormatError, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::FormatError, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

template <class Tag>
Bits128<Tag> Bits128<Tag>::from(ByteView b) {
  if (b.size() != kBlockBytes) {
    throw Error(ErrorCode::InvalidArgument,
                "expected 16 bytes, got " + std::to_string(b.size()));
  }
  Bits128 out;
  std::copy(b.begin(), b.end(), out.bytes.begin());
  return out;
}

template <class Tag>
Bits128<Tag> Bits128<Tag>::from_hex(std::string_view hex) {
  return from(crypto::from_hex(hex));
}

template <class Tag>
std::string Bits128<Tag>::hex() const {
  return to_hex(view());
}

template struct Bits128<BlockTag>;
template struct Bits128<DigestTag>;
template struct Bits128<StateTag>;
template struct Bits128<KeyTag>;

const char* to_string(HashVariant v) noexcept {
  return v == HashVariant::Raw ? "raw" : "finalized";
}

HashVariant parse_hash_variant(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "raw") return HashVariant::Raw;
  if (lower == "finalized") return HashVariant::Finalized;
  throw Error(ErrorCode::InvalidArgument, "unknown hash variant '" + std::string(s) + "'");
}

MdState initial_value() noexcept { return store(kIv); }

const std::array<std::uint32_t, 8>& round_constants() noexcept { return kRoundConstants; }

MdState mix(const MdState& s) noexcept {
  auto [a, b, c, d] = load(s);
  for (std::uint32_t rc : kRoundConstants) {
    a += b; d ^= a; d = std::rotl(d, 16);
    c += d; b ^= c; b = std::rotl(b, 12);
    a += b; d ^= a; d = std::rotl(d, 8);
    c += d; b ^= c; b = std::rotl(b, 7);
    a ^= rc;
  }
  return store({a, b, c, d});
}

MdState unmix(const MdState& s) noexcept {
  auto [a, b, c, d] = load(s);
  for (auto it = kRoundConstants.rbegin(); it != kRoundConstants.rend(); ++it) {
    a ^= *it;
    b = std::rotr(b, 7); b ^= c; c -= d;
    d = std::rotr(d, 8); d ^= a; a -= b;
    b = std::rotr(b, 12); b ^= c; c -= d;
    d = std::rotr(d, 16); d ^= a; a -= b;
  }
  return store({a, b, c, d});
}

MdState compress(const MdState& state, const Block& block) noexcept {
  return mix(state ^ block.as<StateTag>());
}

MdState invert_compress(const MdState& state_after, const Block& block) noexcept {
  return unmix(state_after) ^ block.as<StateTag>();
}

std::vector<Block> pad_message(ByteView message) {
  Bytes padded(message.begin(), message.end());
  padded.push_back(0x80);
  while (padded.size() % kBlockBytes != 0) padded.push_back(0x00);
  std::vector<Block> blocks(padded.size() / kBlockBytes);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::copy_n(padded.begin() + static_cast<std::ptrdiff_t>(i * kBlockBytes), kBlockBytes,
                blocks[i].bytes.begin());
  }
  return blocks;
}

Digest finalize(const MdState& s) noexcept {
  return (mix(s ^ initial_value()) ^ s).as<DigestTag>();
}

Digest MdHasher::finish(HashVariant variant) const noexcept {
  return variant == HashVariant::Raw ? state_.as<DigestTag>() : finalize(state_);
}

Digest md_hash(ByteView message, HashVariant variant) {
  MdHasher h;
  for (const Block& b : pad_message(message)) h.absorb(b);
  return h.finish(variant);
}

Digest md_hash(std::string_view message, HashVariant variant) {
  return md_hash(ByteView(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()),
                 variant);
}

Digest md_hash_blocks(std::span<const Block> fields, HashVariant variant) {
  Bytes joined;
  joined.reserve(fields.size() * kBlockBytes);
  for (const Block& b : fields) joined.insert(joined.end(), b.bytes.begin(), b.bytes.end());
  return md_hash(joined, variant);
}

Block keystream(const SymmetricKey& key) {
  std::array<std::uint8_t, kBlockBytes + 1> input{};
  std::copy(key.bytes.begin(), key.bytes.end(), input.begin());
  input[kBlockBytes] = 0x01;
  return md_hash(input, HashVariant::Finalized).as<BlockTag>();
}

Block encrypt(const SymmetricKey& key, const Block& plaintext) {
  return plaintext ^ keystream(key);
}

Block decrypt(const SymmetricKey& key, const Block& ciphertext) {
  return ciphertext ^ keystream(key);
}

}  // namespace songlab::crypto
