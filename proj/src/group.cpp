#include <array>

#include "songlab/crypto.hpp"
#include "songlab/error.hpp"

namespace songlab::crypto {

Integer mod_exp(const Integer& base, const Integer& exponent, const Integer& modulus) {
  if (modulus <= 1) throw Error(ErrorCode::InvalidArgument, "mod_exp: modulus must be > 1");
  if (exponent < 0) throw Error(ErrorCode::InvalidArgument, "mod_exp: negative exponent");
  if (base < 0 || base >= modulus) {
    throw Error(ErrorCode::InvalidArgument, "mod_exp: base outside [0, modulus-1]");
  }

  // Left-to-right binary method.
  Integer result = 1;
  const auto bits = mpz_sizeinbase(exponent.get_mpz_t(), 2);
  for (std::size_t i = bits; i-- > 0;) {
    result = (result * result) % modulus;
    if (mpz_tstbit(exponent.get_mpz_t(), i)) result = (result * base) % modulus;
  }
  return result % modulus;
}

bool is_prime(const Integer& n) {
  if (n < 2) return false;
  static const std::array<unsigned, 12> kBases = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (unsigned b : kBases) {
    if (n == b) return true;
    if (n % b == 0) return false;
  }

  Integer d = n - 1;
  unsigned s = 0;
  while (mpz_even_p(d.get_mpz_t())) {
    d >>= 1;
    ++s;
  }
  const Integer n_minus_1 = n - 1;
  for (unsigned b : kBases) {
    Integer y = mod_exp(Integer(b), d, n);
    if (y == 1 || y == n_minus_1) continue;
    bool witness = true;
    for (unsigned r = 1; r < s; ++r) {
      y = (y * y) % n;
      if (y == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }

  // The fixed base set is a proof below 3.3e24 (about 81 bits).
  static const Integer kDeterministicBound("3317044064679887385961981");
  if (n < kDeterministicBound) return true;
  return mpz_probab_prime_p(n.get_mpz_t(), 50) != 0;
}

void throw_invalid_prime_bits(unsigned bits) {
  throw Error(ErrorCode::InvalidArgument,
              "prime_bits must be >= 5, got " + std::to_string(bits));
}

GroupParams GroupParams::make(Integer p, Integer q, Integer x) {
  if (p != 2 * q + 1) throw Error(ErrorCode::InvalidArgument, "group: p != 2q + 1");
  if (!is_prime(q)) throw Error(ErrorCode::InvalidArgument, "group: q is not prime");
  if (!is_prime(p)) throw Error(ErrorCode::InvalidArgument, "group: p is not prime");
  if (x < 1 || x > q - 1) throw Error(ErrorCode::InvalidArgument, "group: x outside [1, q-1]");
  return GroupParams{std::move(p), std::move(q), std::move(x)};
}

std::size_t GroupParams::modulus_bytes() const {
  return (mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8;
}

Integer map_identity_to_group(ByteView identity, const GroupParams& params) {
  if (identity.empty()) throw Error(ErrorCode::InvalidArgument, "identity must be non-empty");
  const Digest d = md_hash(identity, HashVariant::Finalized);
  Integer v;
  mpz_import(v.get_mpz_t(), d.bytes.size(), 1, 1, 0, 0, d.bytes.data());
  return v % (params.p - 3) + 2;
}

Bytes encode_group_element(const Integer& v, const GroupParams& params) {
  const std::size_t width = params.modulus_bytes();
  Bytes out(width, 0);
  std::size_t count = 0;
  Bytes raw((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8 + 1);
  mpz_export(raw.data(), &count, 1, 1, 0, 0, v.get_mpz_t());
  if (count > width) throw Error(ErrorCode::InvalidArgument, "group element wider than p");
  std::copy_n(raw.begin(), count, out.end() - static_cast<std::ptrdiff_t>(count));
  return out;
}

SymmetricKey long_term_secret(ByteView identity, const GroupParams& params) {
  const Integer g = map_identity_to_group(identity, params);
  const Integer y = mod_exp(g, params.x, params.p);
  return md_hash(encode_group_element(y, params), HashVariant::Finalized).as<KeyTag>();
}

}  // namespace songlab::crypto
