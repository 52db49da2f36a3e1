#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "songlab/attacks.hpp"
#include "songlab/environment.hpp"
#include "songlab/error.hpp"

using namespace songlab;
using namespace songlab::attacks;
using crypto::HashVariant;
using protocol::Identity;
using protocol::Status;

namespace {

constexpr std::uint64_t kDelta = 30;

env::Simulation make_sim(std::uint64_t seed, HashVariant v = HashVariant::Raw) {
  std::mt19937_64 rng(seed);
  return env::Simulation(protocol::ServerState(crypto::GroupParams::generate(64, rng), kDelta, v),
                         protocol::Timestamp{1'700'000'000}, rng());
}

std::vector<Password> filler(std::size_t n, const std::string& prefix = "cand") {
  std::vector<Password> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(prefix + std::to_string(i));
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::InvalidArgument;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("attack code only sees the adversary's view") {
  const std::string root = SONGLAB_SOURCE_DIR;
  for (const char* f : {"/include/songlab/attacks.hpp", "/src/attacks.cpp"}) {
    CAPTURE(f);
    const std::string text = read_file(root + f);
    CHECK(text.find("#include \"songlab/server.hpp\"") == std::string::npos);
    CHECK(text.find("ServerState") == std::string::npos);
    CHECK(text.find("card_key") == std::string::npos);
  }
}

TEST_CASE("dictionary parsing") {
  std::istringstream in("one\r\n\ntwo\nthree");
  const auto d = Dictionary::parse(in);
  REQUIRE(d.candidates.size() == 3);
  CHECK(d.candidates[0].value() == "one");
  CHECK(d.candidates[2].value() == "three");
  std::istringstream blank("\n\r\n");
  CHECK_THROWS_AS(Dictionary::parse(blank), Error);
  CHECK_THROWS_AS(Dictionary::from({}), Error);
  CHECK(code_of([] { Dictionary::load("/nonexistent/dict.txt"); }) == ErrorCode::IoError);
}

TEST_CASE("offline password guessing") {
  auto sim = make_sim(1);
  const Password pw("hunter2");
  const auto card = sim.register_user(Identity("bob"), pw);
  const auto other = sim.register_user(Identity("alice"), Password("alice-pw"));
  sim.run_session(card, pw);
  sim.run_session(other, Password("alice-pw"));
  sim.clock().advance(5);
  sim.run_session(card, pw);
  const auto dump = dump_card(card);
  const auto& log = sim.session_log();

  SUBCASE("found at position k uses at most k trials") {
    for (std::size_t k : {1u, 2u, 50u, 500u}) {
      auto cands = filler(k - 1);
      cands.push_back(pw);
      for (auto& c : filler(20, "after")) cands.push_back(c);
      const auto r = offline_password_guess(dump, log, Dictionary::from(cands));
      REQUIRE(r.password);
      CHECK(*r.password == pw);
      CHECK(r.trials <= k);
      CHECK(r.confirmations == 2);
    }
  }

  SUBCASE("absent password exhausts the dictionary") {
    const auto r = offline_password_guess(dump, log, Dictionary::from(filler(1000)));
    CHECK_FALSE(r.password);
    CHECK(r.trials == 1000);
  }

  SUBCASE("duplicates are tested once") {
    auto cands = filler(10);
    for (auto& c : filler(10)) cands.push_back(c);
    const auto r = offline_password_guess(dump, log, Dictionary::from(cands));
    CHECK(r.trials == 10);
  }

  SUBCASE("large dictionary, two transcripts, unique confirmation") {
    auto cands = filler(10'000);
    cands[7'777] = pw;
    const auto r = offline_password_guess(dump, log, Dictionary::from(cands));
    REQUIRE(r.password);
    CHECK(*r.password == pw);
    CHECK(r.confirmations == 2);
  }

  SUBCASE("no usable transcript") {
    const std::vector<Transcript> none;
    CHECK(code_of([&] { offline_password_guess(dump, none, Dictionary::from(filler(3))); }) ==
          ErrorCode::NoTranscript);
    // Only another user's session recorded.
    const std::vector<Transcript> foreign{log[1]};
    CHECK(code_of([&] { offline_password_guess(dump, foreign, Dictionary::from(filler(3))); }) ==
          ErrorCode::NoTranscript);
  }
}

TEST_CASE("card cloning survives the victim's password change") {
  auto sim = make_sim(2);
  const Identity id("carol");
  const Password old_pw("opensesame"), new_pw("n3w-and-better");
  auto card = sim.register_user(id, old_pw);
  const auto dump = dump_card(card);
  const auto secret = long_term_secret_from(dump, old_pw);
  CHECK(secret == sim.server().card_key(id).as<crypto::DigestTag>());

  card = protocol::change_password(card, old_pw, new_pw);
  REQUIRE(sim.run_session(card, new_pw).transcript.user_accepted);

  const Password mine("attacker-chosen");
  const auto clone = clone_card(secret, id, mine);
  const auto o = sim.run_session(clone, mine);
  CHECK(o.transcript.server_accepted);
  CHECK(o.transcript.user_accepted);
  CHECK(*o.user_key == *o.server_key);

  auto wrong = secret;
  wrong.bytes[0] ^= 1;
  const auto bad = clone_card(wrong, id, mine);
  CHECK(sim.run_session(bad, mine).server_status == Status::MacMismatch);
}

TEST_CASE("past session keys from the long-term secret") {
  auto sim = make_sim(3);
  const Identity id("alice");
  Password pw("first-pw");
  auto card = sim.register_user(id, pw);
  const auto secret = long_term_secret_from(dump_card(card), pw);

  std::vector<protocol::SessionKey> honest;
  for (int i = 0; i < 10; ++i) {
    if (i == 5) {
      const Password next("second-pw");
      card = protocol::change_password(card, pw, next);
      pw = next;
    }
    const auto o = sim.run_session(card, pw);
    REQUIRE(o.user_key);
    honest.push_back(*o.user_key);
    sim.clock().advance(2);
  }
  // One aborted session: no reply, nothing to recover.
  env::AdversaryHooks drop;
  drop.on_request = [](const protocol::LoginRequest&, env::SimClock&) {
    return env::Interception<protocol::LoginRequest>::drop();
  };
  sim.run_session(card, pw, drop);

  const auto rec = recover_past_session_keys(secret, sim.session_log());
  REQUIRE(rec.keys.size() == honest.size());
  for (std::size_t i = 0; i < honest.size(); ++i) {
    CHECK(rec.keys[i].session_id == i);
    CHECK(rec.keys[i].key == honest[i]);
  }
  REQUIRE(rec.skipped_sessions.size() == 1);
  CHECK(rec.skipped_sessions[0] == 10);

  CHECK(recover_past_session_keys(secret, std::vector<Transcript>{}).keys.empty());
}

TEST_CASE("server MAC rewind matches the forward state") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Identity id("user" + std::to_string(i));
    protocol::Nonce r;
    for (auto& b : r.bytes) b = static_cast<std::uint8_t>(rng());
    const protocol::Timestamp t_s{rng() >> 2};
    const auto field = protocol::encode_identity(id);

    crypto::MdHasher h;
    h.absorb(field);
    h.absorb(r);
    const auto c_s = protocol::server_mac(field, r, t_s, HashVariant::Raw);
    REQUIRE(rewind_server_mac(c_s, t_s) == h.state());
    REQUIRE(replay_server_mac(h.state(), t_s) == c_s);
  }
}

TEST_CASE("reply forgery") {
  SUBCASE("Raw: shifted stamps are accepted with a different key") {
    auto sim = make_sim(5, HashVariant::Raw);
    const Password pw("pw");
    const auto card = sim.register_user(Identity("bob"), pw);
    for (std::int64_t eps = -3; eps <= 3; ++eps) {
      if (eps == 0) continue;
      CAPTURE(eps);
      env::AdversaryHooks h;
      h.on_reply = [eps](const protocol::ServerReply& r, env::SimClock& clock) {
        clock.advance(std::max<std::int64_t>(eps, 0));
        const auto f = forge_server_reply(r, eps, HashVariant::Raw,
                                          FreshnessWindow{clock.now(), kDelta});
        return env::Interception<protocol::ServerReply>::modify(f.reply);
      };
      const auto o = sim.run_session(card, pw, h);
      REQUIRE(o.user_status);
      CHECK(*o.user_status == Status::Accepted);
      CHECK(*o.user_key != *o.server_key);
      sim.clock().advance(4);
    }
  }

  SUBCASE("Finalized: forging refuses, naive shift never verifies") {
    protocol::ServerReply r{Identity("bob"), {}, protocol::Timestamp{1000}};
    CHECK(code_of([&] { forge_server_reply(r, 1, HashVariant::Finalized); }) ==
          ErrorCode::Unsupported);

    auto sim = make_sim(6, HashVariant::Finalized);
    const Password pw("pw");
    const auto card = sim.register_user(Identity("bob"), pw);
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
      env::AdversaryHooks h;
      h.on_reply = [](const protocol::ServerReply& rep, env::SimClock& clock) {
        clock.advance(1);
        auto m = rep;
        m.t_s.seconds += 1;
        return env::Interception<protocol::ServerReply>::modify(m);
      };
      if (sim.run_session(card, pw, h).transcript.user_accepted) ++accepted;
    }
    CHECK(accepted == 0);
  }

  SUBCASE("epsilon range") {
    const protocol::ServerReply r{Identity("bob"), {}, protocol::Timestamp{1000}};
    CHECK(code_of([&] { forge_server_reply(r, -1001, HashVariant::Raw); }) ==
          ErrorCode::EpsilonOutOfRange);
    const protocol::ServerReply top{Identity("bob"), {},
                                    protocol::Timestamp{std::numeric_limits<std::uint64_t>::max()}};
    CHECK(code_of([&] { forge_server_reply(top, 1, HashVariant::Raw); }) ==
          ErrorCode::EpsilonOutOfRange);
    // Future stamp, and a stamp older than the window.
    CHECK(code_of([&] {
            forge_server_reply(r, 5, HashVariant::Raw, FreshnessWindow{protocol::Timestamp{1002}, 30});
          }) == ErrorCode::EpsilonOutOfRange);
    CHECK(code_of([&] {
            forge_server_reply(r, -2, HashVariant::Raw, FreshnessWindow{protocol::Timestamp{1040}, 30});
          }) == ErrorCode::EpsilonOutOfRange);
    CHECK(forge_server_reply(r, 0, HashVariant::Raw).reply == r);
  }
}
