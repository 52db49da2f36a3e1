#include <doctest.h>

#include <random>

#include "songlab/error.hpp"
#include "songlab/protocol.hpp"
#include "songlab/server.hpp"

using namespace songlab;
using namespace songlab::protocol;
using crypto::HashVariant;

namespace {

constexpr std::uint64_t kDelta = 30;

ServerState make_server(std::uint64_t seed = 1, HashVariant v = HashVariant::Finalized) {
  std::mt19937_64 rng(seed);
  return ServerState(crypto::GroupParams::generate(64, rng), kDelta, v);
}

Nonce random_nonce(std::mt19937_64& rng) {
  Nonce n;
  for (auto& b : n.bytes) b = static_cast<std::uint8_t>(rng());
  return n;
}

std::string random_text(std::mt19937_64& rng, std::size_t min_len) {
  std::string s(min_len + rng() % 12, 'a');
  for (auto& c : s) c = static_cast<char>('!' + rng() % 94);
  return s;
}

}  // namespace

TEST_CASE("domain type validation") {
  CHECK_THROWS_AS(Identity(""), Error);
  CHECK_THROWS_AS(Identity(std::string("a\nb")), Error);
  CHECK_NOTHROW(Identity("alice smith"));
  CHECK_THROWS_AS(Password(""), Error);
  CHECK_NOTHROW(Password("\x01\x02"));
  CHECK_THROWS_AS(ServerState(crypto::GroupParams::make(23, 11, 3), 0, HashVariant::Raw), Error);
}

TEST_CASE("timestamp encoding is left-padded big-endian") {
  const Block b = encode_timestamp(Timestamp{0x0102030405060708ull});
  CHECK(b.hex() == "00000000000000000102030405060708");
}

TEST_CASE("freshness window") {
  CHECK(is_fresh({100}, {100}, 30));
  CHECK(is_fresh({100}, {130}, 30));
  CHECK_FALSE(is_fresh({100}, {131}, 30));
  CHECK_FALSE(is_fresh({101}, {100}, 30));
}

TEST_CASE("registration") {
  ServerState server = make_server();
  const Identity alice("alice");
  const Password pw("hunter2");
  const SmartCardState card = register_user(server, alice, pw);

  SUBCASE("B_A XOR h(pw) is h(ID^x mod p)") {
    const auto& g = server.params();
    const auto base = crypto::map_identity_to_group(alice.bytes(), g);
    const auto y = crypto::mod_exp(base, g.x, g.p);
    const auto expected = crypto::md_hash(crypto::encode_group_element(y, g), HashVariant::Finalized);
    CHECK((card.b_a ^ hash_password(pw)) == expected);
    CHECK(card.b_a == (expected ^ hash_password(pw)));
  }

  SUBCASE("same password, different identities") {
    const SmartCardState bob = register_user(server, Identity("bob"), pw);
    CHECK(bob.b_a != card.b_a);
  }

  SUBCASE("duplicate identity") {
    try {
      register_user(server, alice, Password("other"));
      FAIL("expected DuplicateIdentity");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DuplicateIdentity);
    }
    CHECK(server.registered_count() == 1);
  }
}

TEST_CASE("login request and server verification") {
  ServerState server = make_server(2);
  const Identity id("alice");
  const Password pw("correct horse");
  const SmartCardState card = register_user(server, id, pw);
  std::mt19937_64 rng(3);
  const Nonce nonce = random_nonce(rng);
  const Timestamp t{1'700'000'000};
  const LoginRequest req = build_login_request(card, pw, nonce, t);

  CHECK(req.id == id);
  CHECK(req.t_a == t);
  CHECK(build_login_request(card, pw, nonce, t) == req);

  SUBCASE("honest request accepted, nonce recovered") {
    const auto check = server_verify_login(server, req, t);
    CHECK(check.status == Status::Accepted);
    CHECK(check.recovered == nonce);
    CHECK(server_verify_login(server, req, Timestamp{t.seconds + kDelta}).accepted());
  }

  SUBCASE("wrong password") {
    const auto bad = build_login_request(card, Password("correct horsf"), nonce, t);
    CHECK(server_verify_login(server, bad, t).status == Status::MacMismatch);
  }

  SUBCASE("stale and future stamps") {
    CHECK(server_verify_login(server, req, Timestamp{t.seconds + kDelta + 1}).status ==
          Status::StaleTimestamp);
    CHECK(server_verify_login(server, req, Timestamp{t.seconds - 1}).status ==
          Status::StaleTimestamp);
  }

  SUBCASE("unknown identity is checked first") {
    LoginRequest other = req;
    other.id = Identity("mallory");
    CHECK(server_verify_login(server, other, Timestamp{t.seconds + 1000}).status ==
          Status::UnknownIdentity);
  }

  SUBCASE("single bit flips anywhere in C_A, W_A or T_A are rejected") {
    for (int bit = 0; bit < 128; ++bit) {
      LoginRequest m = req;
      m.c_a.bytes[static_cast<std::size_t>(bit / 8)] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      REQUIRE_FALSE(server_verify_login(server, m, t).accepted());
      m = req;
      m.w_a.bytes[static_cast<std::size_t>(bit / 8)] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      REQUIRE(server_verify_login(server, m, t).status == Status::MacMismatch);
    }
    for (int bit = 0; bit < 64; ++bit) {
      LoginRequest m = req;
      m.t_a.seconds ^= std::uint64_t{1} << bit;
      // Check at the tampered stamp itself so freshness passes and the MAC
      // has to catch it.
      REQUIRE(server_verify_login(server, m, m.t_a).status == Status::MacMismatch);
    }
  }
}

TEST_CASE("server reply and user verification") {
  for (HashVariant v : {HashVariant::Raw, HashVariant::Finalized}) {
    CAPTURE(crypto::to_string(v));
    ServerState server = make_server(4, v);
    const Identity id("bob");
    std::mt19937_64 rng(5);
    const Nonce nonce = random_nonce(rng);
    const Timestamp t_s{1'700'000'100};
    const ServerReply reply = build_server_reply(server, id, nonce, t_s);

    CHECK(build_server_reply(server, id, nonce, t_s) == reply);
    CHECK(user_verify_reply(id, nonce, reply, t_s, kDelta, v) == Status::Accepted);

    const ServerReply wrong = build_server_reply(server, id, random_nonce(rng), t_s);
    CHECK(user_verify_reply(id, nonce, wrong, t_s, kDelta, v) == Status::MacMismatch);

    ServerReply shifted = reply;
    shifted.t_s.seconds += 1;
    CHECK(user_verify_reply(id, nonce, shifted, Timestamp{t_s.seconds + 1}, kDelta, v) ==
          Status::MacMismatch);

    CHECK(user_verify_reply(id, nonce, reply, Timestamp{t_s.seconds + kDelta + 1}, kDelta, v) ==
          Status::StaleTimestamp);
    CHECK(user_verify_reply(Identity("carol"), nonce, reply, t_s, kDelta, v) ==
          Status::IdentityMismatch);
  }
}

TEST_CASE("session keys") {
  std::mt19937_64 rng(6);
  const Identity id("alice");
  const Nonce n = random_nonce(rng);
  const Timestamp t_a{1000}, t_s{1003};
  const SessionKey k = derive_session_key(id, t_s, t_a, n);
  CHECK(derive_session_key(id, t_s, t_a, n) == k);
  CHECK(derive_session_key(id, Timestamp{1004}, t_a, n) != k);
  CHECK(derive_session_key(id, t_a, t_s, n) != k);
}

TEST_CASE("password change") {
  ServerState server = make_server(7);
  const Identity id("alice");
  const Password old_pw("first"), new_pw("second");
  const SmartCardState card = register_user(server, id, old_pw);
  const SmartCardState changed = change_password(card, old_pw, new_pw);
  const Timestamp t{5000};
  std::mt19937_64 rng(8);

  CHECK(changed.id == card.id);
  CHECK((changed.b_a ^ hash_password(new_pw)) == (card.b_a ^ hash_password(old_pw)));
  CHECK(server_verify_login(server, build_login_request(changed, new_pw, random_nonce(rng), t), t)
            .accepted());
  CHECK(server_verify_login(server, build_login_request(changed, old_pw, random_nonce(rng), t), t)
            .status == Status::MacMismatch);

  SUBCASE("wrong old password corrupts the card") {
    const SmartCardState broken = change_password(card, Password("guess"), new_pw);
    CHECK(server_verify_login(server, build_login_request(broken, new_pw, random_nonce(rng), t), t)
              .status == Status::MacMismatch);
  }

  SUBCASE("K_A is invariant over a chain of changes") {
    const auto k_a = card.b_a ^ hash_password(old_pw);
    SmartCardState c = card;
    Password current = old_pw;
    for (int i = 0; i < 50; ++i) {
      Password next(random_text(rng, 1));
      c = change_password(c, current, next);
      current = next;
      REQUIRE((c.b_a ^ hash_password(current)) == k_a);
    }
    CHECK(server_verify_login(server, build_login_request(c, current, random_nonce(rng), t), t)
              .accepted());
  }
}

TEST_CASE("completeness over random users") {
  ServerState server = make_server(9, HashVariant::Raw);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 300; ++i) {
    const Identity id("u" + std::to_string(i) + "-" + random_text(rng, 0));
    const Password pw(random_text(rng, 1));
    const SmartCardState card = register_user(server, id, pw);
    const Nonce n = random_nonce(rng);
    const Timestamp t_a{rng() % 4'000'000'000ull};
    const LoginRequest req = build_login_request(card, pw, n, t_a);
    const Timestamp t_srv{t_a.seconds + rng() % (kDelta + 1)};
    const auto check = server_verify_login(server, req, t_srv);
    REQUIRE(check.accepted());
    REQUIRE(check.recovered == n);
    const ServerReply reply = build_server_reply(server, id, check.recovered, t_srv);
    const Timestamp t_user{t_srv.seconds + rng() % (kDelta + 1)};
    REQUIRE(user_verify_reply(id, n, reply, t_user, kDelta, server.hash_variant()) ==
            Status::Accepted);
    REQUIRE(derive_session_key(id, reply.t_s, req.t_a, n) ==
            derive_session_key(req.id, reply.t_s, req.t_a, check.recovered));
  }
}
