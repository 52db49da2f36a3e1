#pragma once

// Desk-scale primitives: a 128-bit Merkle-Damgard hash with an invertible
// compression function, a one-block XOR-pad cipher, and safe-prime group
// arithmetic over GMP integers. None of this is meant to be secure.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace songlab::crypto {

inline constexpr std::size_t kBlockBytes = 16;

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Fixed 128-bit string. Tag keeps Block, Digest, MdState and SymmetricKey
/// from mixing by accident; explicit conversions exist where the algebra
/// needs them (Digest XOR Block, key = digest, and so on).
template <class Tag>
struct Bits128 {
  std::array<std::uint8_t, kBlockBytes> bytes{};

  static Bits128 from(ByteView b);
  static Bits128 from_hex(std::string_view hex);
  std::string hex() const;
  ByteView view() const { return {bytes.data(), bytes.size()}; }

  template <class Other>
  Bits128<Other> as() const {
    return Bits128<Other>{bytes};
  }

  friend Bits128 operator^(const Bits128& a, const Bits128& b) {
    Bits128 out;
    for (std::size_t i = 0; i < kBlockBytes; ++i) out.bytes[i] = a.bytes[i] ^ b.bytes[i];
    return out;
  }
  Bits128& operator^=(const Bits128& o) { return *this = *this ^ o; }
  friend bool operator==(const Bits128&, const Bits128&) = default;
};

struct BlockTag {};
struct DigestTag {};
struct StateTag {};
struct KeyTag {};

using Block = Bits128<BlockTag>;
using Digest = Bits128<DigestTag>;
using MdState = Bits128<StateTag>;
using SymmetricKey = Bits128<KeyTag>;

enum class HashVariant { Raw, Finalized };

const char* to_string(HashVariant v) noexcept;
HashVariant parse_hash_variant(std::string_view s);

/// Published chaining-value IV (see docs/CONSTANTS.md).
MdState initial_value() noexcept;
const std::array<std::uint32_t, 8>& round_constants() noexcept;

/// Eight ARX rounds over four big-endian 32-bit words; a bijection.
MdState mix(const MdState& s) noexcept;
MdState unmix(const MdState& s) noexcept;

MdState compress(const MdState& state, const Block& block) noexcept;
MdState invert_compress(const MdState& state_after, const Block& block) noexcept;

/// message || 0x80 || 0x00* up to a multiple of 16 bytes. No length field.
std::vector<Block> pad_message(ByteView message);

Digest md_hash(ByteView message, HashVariant variant);
Digest md_hash(std::string_view message, HashVariant variant);

/// Convenience for callers that already hold block-aligned fields.
Digest md_hash_blocks(std::span<const Block> fields, HashVariant variant);

/// Incremental absorber exposing the chaining value, for tests and for the
/// forgery oracle ("state after the first k blocks").
class MdHasher {
 public:
  MdHasher() : state_(initial_value()) {}
  explicit MdHasher(const MdState& start) : state_(start) {}

  void absorb(const Block& block) noexcept { state_ = compress(state_, block); }
  const MdState& state() const noexcept { return state_; }
  Digest finish(HashVariant variant) const noexcept;

 private:
  MdState state_;
};

/// Output transform applied after the last compression in Finalized mode.
Digest finalize(const MdState& s) noexcept;

// One-block cipher: ciphertext = plaintext XOR h(key || 0x01, Finalized).
Block keystream(const SymmetricKey& key);
Block encrypt(const SymmetricKey& key, const Block& plaintext);
Block decrypt(const SymmetricKey& key, const Block& ciphertext);

// ---- group arithmetic -------------------------------------------------------

using Integer = mpz_class;

/// Square-and-multiply. Throws InvalidArgument for modulus <= 1, a negative
/// exponent, or a base outside [0, modulus-1].
Integer mod_exp(const Integer& base, const Integer& exponent, const Integer& modulus);

/// Deterministic Miller-Rabin for n < 3.3e24; beyond that GMP's test with 50
/// rounds is added on top of the fixed bases.
bool is_prime(const Integer& n);

struct GroupParams {
  Integer p;
  Integer q;
  Integer x;

  /// Validates p = 2q + 1, both prime, 1 <= x <= q-1.
  static GroupParams make(Integer p, Integer q, Integer x);

  /// Seeded safe-prime search: p has exactly `prime_bits` bits.
  template <class Rng>
  static GroupParams generate(unsigned prime_bits, Rng& rng);

  std::size_t modulus_bytes() const;
};

[[noreturn]] void throw_invalid_prime_bits(unsigned bits);

/// Uniform value in [0, 2^bits).
template <class Rng>
Integer random_below_pow2(unsigned bits, Rng& rng) {
  std::vector<std::uint64_t> words((bits + 63) / 64);
  for (auto& w : words) w = rng();
  Integer v;
  mpz_import(v.get_mpz_t(), words.size(), 1, sizeof(std::uint64_t), 0, 0, words.data());
  v >>= static_cast<unsigned long>(words.size() * 64 - bits);
  return v;
}

/// Uniform value with exactly `bits` bits (top bit set).
template <class Rng>
Integer random_bits(unsigned bits, Rng& rng) {
  Integer v = random_below_pow2(bits, rng);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  return v;
}

/// Uniform value in [lo, hi] by rejection.
template <class Rng>
Integer random_range(const Integer& lo, const Integer& hi, Rng& rng) {
  const Integer span = hi - lo + 1;
  const auto bits = static_cast<unsigned>(mpz_sizeinbase(span.get_mpz_t(), 2));
  for (;;) {
    Integer v = random_below_pow2(bits, rng);
    if (v < span) return lo + v;
  }
}

template <class Rng>
GroupParams GroupParams::generate(unsigned prime_bits, Rng& rng) {
  if (prime_bits < 5) throw_invalid_prime_bits(prime_bits);
  for (;;) {
    Integer q = random_bits(prime_bits - 1, rng);
    mpz_setbit(q.get_mpz_t(), 0);
    Integer p = 2 * q + 1;
    if (mpz_sizeinbase(p.get_mpz_t(), 2) != prime_bits) continue;
    if (!is_prime(q) || !is_prime(p)) continue;
    Integer x = random_range(Integer(1), q - 1, rng);
    return make(std::move(p), std::move(q), std::move(x));
  }
}

/// (decode_be(h(identity, Finalized)) mod (p-3)) + 2, in [2, p-2].
Integer map_identity_to_group(ByteView identity, const GroupParams& params);

/// Fixed-length big-endian encoding, modulus_bytes() wide.
Bytes encode_group_element(const Integer& v, const GroupParams& params);

/// h(ID^x mod p): the card/server long-term secret.
SymmetricKey long_term_secret(ByteView identity, const GroupParams& params);

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);

}  // namespace songlab::crypto
