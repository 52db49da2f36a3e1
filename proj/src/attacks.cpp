#include "songlab/attacks.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <string>
#include <unordered_set>

#include "songlab/error.hpp"

namespace songlab::attacks {

using crypto::Block;
using crypto::Digest;
using crypto::MdState;
using protocol::Timestamp;

Dictionary Dictionary::parse(std::istream& in) {
  Dictionary d;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    d.candidates.emplace_back(std::move(line));
  }
  if (d.candidates.empty()) throw Error(ErrorCode::InvalidArgument, "dictionary is empty");
  return d;
}

Dictionary Dictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dictionary " + path.string());
  return parse(in);
}

Dictionary Dictionary::from(std::vector<Password> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "dictionary is empty");
  return Dictionary{std::move(candidates)};
}

namespace {

// Per-transcript values that do not depend on the candidate.
struct Observation {
  Digest c_a;
  Block w_a;
  Timestamp t_a;
  Block t_a_field;
};

bool reproduces(const Observation& o, const crypto::SymmetricKey& k, const Block& id_field) {
  const protocol::Nonce r = crypto::decrypt(k, o.w_a) ^ o.t_a_field;
  return protocol::login_mac(o.t_a, r, o.w_a, id_field) == o.c_a;
}

}  // namespace

GuessResult offline_password_guess(const CardDump& dump, std::span<const Transcript> transcripts,
                                   const Dictionary& dict) {
  std::vector<Observation> obs;
  for (const Transcript& t : transcripts) {
    if (!t.server_accepted || t.request.id != dump.id) continue;
    obs.push_back({t.request.c_a, t.request.w_a, t.request.t_a,
                   protocol::encode_timestamp(t.request.t_a)});
  }
  if (obs.empty()) {
    throw Error(ErrorCode::NoTranscript,
                "no accepted transcript for identity '" + dump.id.value() + "'");
  }

  const Block id_field = protocol::encode_identity(dump.id);
  std::unordered_set<std::string> seen;
  GuessResult result;
  for (const Password& candidate : dict.candidates) {
    if (!seen.insert(candidate.value()).second) continue;
    ++result.trials;
    const auto k = (dump.b_a ^ protocol::hash_password(candidate)).as<crypto::KeyTag>();
    if (!reproduces(obs.front(), k, id_field)) continue;

    std::size_t confirmed = 1;
    while (confirmed < obs.size() && reproduces(obs[confirmed], k, id_field)) ++confirmed;
    if (confirmed == obs.size()) {
      result.password = candidate;
      result.confirmations = confirmed;
      return result;
    }
  }
  return result;
}

Digest long_term_secret_from(const CardDump& dump, const Password& pw) {
  return dump.b_a ^ protocol::hash_password(pw);
}

protocol::SmartCardState clone_card(const Digest& long_term_secret, const protocol::Identity& id,
                                    const Password& chosen_pw) {
  return protocol::SmartCardState{id, long_term_secret ^ protocol::hash_password(chosen_pw)};
}

KeyRecovery recover_past_session_keys(const Digest& long_term_secret,
                                      std::span<const Transcript> transcripts) {
  KeyRecovery out;
  const auto k_a = long_term_secret.as<crypto::KeyTag>();
  for (const Transcript& t : transcripts) {
    if (!t.reply) {
      out.skipped_sessions.push_back(t.session_id);
      continue;
    }
    const protocol::Nonce r_a =
        crypto::decrypt(k_a, t.request.w_a) ^ protocol::encode_timestamp(t.request.t_a);
    out.keys.push_back(
        {t.session_id, protocol::derive_session_key(t.request.id, t.reply->t_s, t.request.t_a, r_a)});
  }
  return out;
}

namespace {

Block padding_block() {
  Block b;
  b.bytes[0] = 0x80;
  return b;
}

}  // namespace

MdState rewind_server_mac(const Digest& c_s, Timestamp t_s) {
  const MdState after_ts = crypto::invert_compress(c_s.as<crypto::StateTag>(), padding_block());
  return crypto::invert_compress(after_ts, protocol::encode_timestamp(t_s));
}

Digest replay_server_mac(const MdState& after_prefix, Timestamp t_s) {
  crypto::MdHasher h(after_prefix);
  h.absorb(protocol::encode_timestamp(t_s));
  h.absorb(padding_block());
  return h.finish(crypto::HashVariant::Raw);
}

ForgedReply forge_server_reply(const protocol::ServerReply& reply, std::int64_t epsilon,
                               crypto::HashVariant variant, std::optional<FreshnessWindow> window) {
  if (variant == crypto::HashVariant::Finalized) {
    throw Error(ErrorCode::Unsupported,
                "finalized hash: the output transform hides the chaining value");
  }

  const std::uint64_t ts = reply.t_s.seconds;
  const std::uint64_t magnitude =
      epsilon < 0 ? std::uint64_t{0} - static_cast<std::uint64_t>(epsilon) : static_cast<std::uint64_t>(epsilon);
  if (epsilon < 0 ? magnitude > ts : magnitude > std::numeric_limits<std::uint64_t>::max() - ts) {
    throw Error(ErrorCode::EpsilonOutOfRange, "forged timestamp would wrap");
  }
  const Timestamp forged_ts{epsilon < 0 ? ts - magnitude : ts + magnitude};
  if (window && !protocol::is_fresh(forged_ts, window->deliver_at, window->delta_t)) {
    throw Error(ErrorCode::EpsilonOutOfRange,
                "forged timestamp " + std::to_string(forged_ts.seconds) +
                    " is not fresh at delivery time " + std::to_string(window->deliver_at.seconds));
  }

  const MdState prefix = rewind_server_mac(reply.c_s, reply.t_s);
  return ForgedReply{protocol::ServerReply{reply.id, replay_server_mac(prefix, forged_ts), forged_ts},
                     epsilon};
}

}  // namespace songlab::attacks
