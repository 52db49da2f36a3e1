#pragma once

// Simulation harness: one shared clock, a channel the adversary fully
// controls, and the session log eavesdroppers read from.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "songlab/protocol.hpp"
#include "songlab/server.hpp"
#include "songlab/transcript.hpp"

namespace songlab::env {

using protocol::LoginRequest;
using protocol::ServerReply;
using protocol::Timestamp;

class SimClock {
 public:
  explicit SimClock(Timestamp start = {}) : now_(start) {}

  Timestamp now() const noexcept { return now_; }

  /// Throws InvalidArgument on negative delta.
  void advance(std::int64_t delta);

 private:
  Timestamp now_;
};

SimClock advance_clock(SimClock clock, std::int64_t delta);

enum class Direction { UserToServer, ServerToUser };
enum class ChannelAction { Deliver, Drop, Modify, Inject };

const char* to_string(ChannelAction a) noexcept;

/// Adversary decision for one in-flight message. Modify and Inject carry the
/// message that reaches the receiver instead of the original; Inject marks it
/// as fabricated rather than edited.
template <class Msg>
struct Interception {
  ChannelAction action = ChannelAction::Deliver;
  std::optional<Msg> replacement;

  static Interception deliver() { return {}; }
  static Interception drop() { return {ChannelAction::Drop, std::nullopt}; }
  static Interception modify(Msg m) { return {ChannelAction::Modify, std::move(m)}; }
  static Interception inject(Msg m) { return {ChannelAction::Inject, std::move(m)}; }
};

using Payload = std::variant<LoginRequest, ServerReply>;

struct ChannelEvent {
  Direction direction;
  Payload payload;                     // as sent
  ChannelAction action;
  std::optional<Payload> replacement;  // Modify / Inject only
  Timestamp at;
};

/// Hooks see each message in flight and may delay delivery by advancing the
/// clock. Unset hooks deliver unchanged.
struct AdversaryHooks {
  std::function<Interception<LoginRequest>(const LoginRequest&, SimClock&)> on_request;
  std::function<Interception<ServerReply>(const ServerReply&, SimClock&)> on_reply;
};

struct SessionOutcome {
  Transcript transcript;
  protocol::Status server_status = protocol::Status::MacMismatch;
  std::optional<protocol::Status> user_status;  // absent if no reply reached the user
  std::optional<protocol::SessionKey> user_key;
  std::optional<protocol::SessionKey> server_key;
  std::vector<ChannelEvent> events;
};

/// Owns the server, the clock and the session log for one scenario.
class Simulation {
 public:
  Simulation(protocol::ServerState server, Timestamp start, std::uint64_t seed);

  protocol::ServerState& server() noexcept { return server_; }
  const protocol::ServerState& server() const noexcept { return server_; }
  SimClock& clock() noexcept { return clock_; }
  Timestamp now() const noexcept { return clock_.now(); }

  protocol::SmartCardState register_user(const protocol::Identity& id,
                                         const protocol::Password& pw);

  protocol::Nonce draw_nonce();
  std::mt19937_64& rng() noexcept { return rng_; }

  /// login -> channel -> verify -> reply -> channel -> verify -> keys.
  /// Rejections end up in the outcome and transcript, never as exceptions.
  SessionOutcome run_session(const protocol::SmartCardState& card, const protocol::Password& pw,
                             const AdversaryHooks& hooks = {});

  const std::vector<Transcript>& session_log() const noexcept { return log_; }

 private:
  protocol::ServerState server_;
  SimClock clock_;
  std::mt19937_64 rng_;
  std::vector<Transcript> log_;
  std::uint64_t next_session_ = 0;
};

}  // namespace songlab::env
