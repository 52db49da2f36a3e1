#pragma once

// The four weaknesses of the scheme as runnable procedures. Inputs are limited
// to what an attacker holds: a card dump, recorded transcripts, intercepted
// messages and public parameters. This header deliberately does not include
// server.hpp.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "songlab/crypto.hpp"
#include "songlab/protocol.hpp"
#include "songlab/transcript.hpp"

namespace songlab::attacks {

using protocol::Password;

/// Candidates in file order. Duplicates are kept in the list but skipped
/// during the search.
struct Dictionary {
  std::vector<Password> candidates;

  /// One candidate per line, UTF-8, optional trailing newline; CR before LF
  /// and empty lines are dropped. Throws InvalidArgument if nothing remains.
  static Dictionary parse(std::istream& in);
  static Dictionary load(const std::filesystem::path& path);
  static Dictionary from(std::vector<Password> candidates);
};

struct GuessResult {
  std::optional<Password> password;
  std::size_t trials = 0;         // distinct candidates tested
  std::size_t confirmations = 0;  // transcripts the winner reproduced
};

/// Off-line guessing from B_A plus eavesdropped {C_A, W_A, T_A}. A candidate
/// must reproduce C_A on every accepted transcript of dump.id; the earliest
/// such candidate wins. Throws NoTranscript when there is nothing to test.
GuessResult offline_password_guess(const CardDump& dump, std::span<const Transcript> transcripts,
                                   const Dictionary& dict);

/// B_A XOR h(pw) = h(ID^x mod p).
crypto::Digest long_term_secret_from(const CardDump& dump, const Password& pw);

/// A fresh card for `id` that works with `chosen_pw`.
protocol::SmartCardState clone_card(const crypto::Digest& long_term_secret,
                                    const protocol::Identity& id, const Password& chosen_pw);

struct RecoveredKey {
  std::uint64_t session_id = 0;
  protocol::SessionKey key;
};

struct KeyRecovery {
  std::vector<RecoveredKey> keys;              // in transcript order
  std::vector<std::uint64_t> skipped_sessions;  // no reply recorded
};

KeyRecovery recover_past_session_keys(const crypto::Digest& long_term_secret,
                                      std::span<const Transcript> transcripts);

struct ForgedReply {
  protocol::ServerReply reply;
  std::int64_t epsilon = 0;
};

/// Delivery-time check for the forged stamp: the user will see t_s + epsilon
/// at `deliver_at` and accepts stamps up to `delta_t` old.
struct FreshnessWindow {
  protocol::Timestamp deliver_at;
  std::uint64_t delta_t = 0;
};

/// Rewrites T_S inside an intercepted reply and fixes C_S without learning
/// R_A. Throws Unsupported for the Finalized variant, EpsilonOutOfRange when
/// the new stamp would wrap or (given a window) would not be fresh.
ForgedReply forge_server_reply(const protocol::ServerReply& reply, std::int64_t epsilon,
                               crypto::HashVariant variant,
                               std::optional<FreshnessWindow> window = std::nullopt);

/// Walks a Raw C_S back through the padding block and the T_S block, giving
/// the chaining value right after h absorbed ID_A || R_A.
crypto::MdState rewind_server_mac(const crypto::Digest& c_s, protocol::Timestamp t_s);

/// Absorbs T_S and padding from a recovered state and emits the Raw digest.
crypto::Digest replay_server_mac(const crypto::MdState& after_prefix, protocol::Timestamp t_s);

}  // namespace songlab::attacks
