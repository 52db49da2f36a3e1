#include "songlab/environment.hpp"

#include "songlab/error.hpp"

namespace songlab::env {

void SimClock::advance(std::int64_t delta) {
  if (delta < 0) throw Error(ErrorCode::InvalidArgument, "clock cannot move backwards");
  now_.seconds += static_cast<std::uint64_t>(delta);
}

SimClock advance_clock(SimClock clock, std::int64_t delta) {
  clock.advance(delta);
  return clock;
}

const char* to_string(ChannelAction a) noexcept {
  switch (a) {
    case ChannelAction::Deliver: return "deliver";
    case ChannelAction::Drop: return "drop";
    case ChannelAction::Modify: return "modify";
    case ChannelAction::Inject: return "inject";
  }
  return "unknown";
}

namespace {

// Runs the hook (if any), records the event, and returns what arrives.
template <class Msg, class Hook>
std::optional<Msg> transit(const Msg& sent, const Hook& hook, Direction dir, SimClock& clock,
                           std::vector<ChannelEvent>& events) {
  Interception<Msg> decision = hook ? hook(sent, clock) : Interception<Msg>::deliver();
  ChannelEvent ev{dir, sent, decision.action, std::nullopt, clock.now()};
  std::optional<Msg> arrives;
  switch (decision.action) {
    case ChannelAction::Deliver:
      arrives = sent;
      break;
    case ChannelAction::Drop:
      break;
    case ChannelAction::Modify:
    case ChannelAction::Inject:
      if (!decision.replacement) {
        throw Error(ErrorCode::InvalidArgument, "modify/inject without a replacement message");
      }
      ev.replacement = *decision.replacement;
      arrives = std::move(decision.replacement);
      break;
  }
  events.push_back(std::move(ev));
  return arrives;
}

}  // namespace

Simulation::Simulation(protocol::ServerState server, Timestamp start, std::uint64_t seed)
    : server_(std::move(server)), clock_(start), rng_(seed) {}

protocol::SmartCardState Simulation::register_user(const protocol::Identity& id,
                                                   const protocol::Password& pw) {
  return server_.register_user(id, pw);
}

protocol::Nonce Simulation::draw_nonce() {
  protocol::Nonce n;
  for (std::size_t half = 0; half < 2; ++half) {
    const std::uint64_t w = rng_();
    for (std::size_t i = 0; i < 8; ++i) n.bytes[half * 8 + i] = static_cast<std::uint8_t>(w >> (56 - 8 * i));
  }
  return n;
}

SessionOutcome Simulation::run_session(const protocol::SmartCardState& card,
                                       const protocol::Password& pw, const AdversaryHooks& hooks) {
  const protocol::Nonce nonce = draw_nonce();
  const protocol::LoginRequest sent = protocol::build_login_request(card, pw, nonce, clock_.now());
  SessionOutcome out{Transcript{next_session_++, sent, std::nullopt, false, false},
                     protocol::Status::MacMismatch, std::nullopt, std::nullopt, std::nullopt, {}};

  auto delivered_req =
      transit(sent, hooks.on_request, Direction::UserToServer, clock_, out.events);
  if (delivered_req) {
    out.transcript.request = *delivered_req;
    const protocol::LoginCheck check =
        protocol::server_verify_login(server_, *delivered_req, clock_.now());
    out.server_status = check.status;
    if (check.accepted()) {
      const protocol::ServerReply reply =
          protocol::build_server_reply(server_, delivered_req->id, check.recovered, clock_.now());
      out.transcript.server_accepted = true;
      out.transcript.reply = reply;
      out.server_key = protocol::derive_session_key(delivered_req->id, reply.t_s,
                                                    delivered_req->t_a, check.recovered);

      auto delivered_reply =
          transit(reply, hooks.on_reply, Direction::ServerToUser, clock_, out.events);
      if (delivered_reply) {
        out.user_status =
            protocol::user_verify_reply(card.id, nonce, *delivered_reply, clock_.now(),
                                        server_.delta_t(), server_.hash_variant());
        if (*out.user_status == protocol::Status::Accepted) {
          out.transcript.user_accepted = true;
          out.user_key =
              protocol::derive_session_key(card.id, delivered_reply->t_s, sent.t_a, nonce);
        }
      }
    }
  }

  log_.push_back(out.transcript);
  return out;
}

}  // namespace songlab::env
