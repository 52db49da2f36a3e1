#include "songlab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "songlab/attacks.hpp"
#include "songlab/environment.hpp"
#include "songlab/error.hpp"
#include "songlab/server.hpp"
#include "songlab/transcript.hpp"

namespace songlab::scenario {

namespace {

using protocol::Identity;
using protocol::Password;
using protocol::SmartCardState;

// Simulated wall clock at scenario start.
constexpr std::uint64_t kEpoch = 1'700'000'000;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

std::string normalize_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  const std::string s(text);
  try {
    std::size_t used = 0;
    long long v = 0;
    unsigned long long u = 0;
    if constexpr (std::is_signed_v<Int>) {
      v = std::stoll(s, &used, 0);
    } else {
      if (!s.empty() && s.front() == '-') throw std::invalid_argument("negative");
      u = std::stoull(s, &used, 0);
    }
    if (used != s.size()) throw std::invalid_argument("trailing");
    if constexpr (std::is_signed_v<Int>) {
      return static_cast<Int>(v);
    } else {
      if (u > std::numeric_limits<Int>::max()) throw std::out_of_range("range");
      return static_cast<Int>(u);
    }
  } catch (const std::exception&) {
    config_error("invalid integer for " + std::string(key) + ": '" + s + "'");
  }
}

AttackKind parse_attack(std::string_view s) {
  if (s == "none") return AttackKind::None;
  if (s == "guess") return AttackKind::Guess;
  if (s == "clone") return AttackKind::Clone;
  if (s == "pfs") return AttackKind::Pfs;
  if (s == "forge") return AttackKind::Forge;
  config_error("unknown attack '" + std::string(s) + "' (none|guess|clone|pfs|forge)");
}

Expectation parse_expectation(std::string_view s) {
  if (s == "auto") return Expectation::Auto;
  if (s == "success") return Expectation::Success;
  if (s == "failure") return Expectation::Failure;
  config_error("unknown expectation '" + std::string(s) + "' (auto|success|failure)");
}

crypto::HashVariant parse_variant(std::string_view s) {
  try {
    return crypto::parse_hash_variant(s);
  } catch (const Error&) {
    config_error("unknown hash variant '" + std::string(s) + "' (raw|finalized)");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* to_string(AttackKind a) noexcept {
  switch (a) {
    case AttackKind::None: return "none";
    case AttackKind::Guess: return "guess";
    case AttackKind::Clone: return "clone";
    case AttackKind::Pfs: return "pfs";
    case AttackKind::Forge: return "forge";
  }
  return "unknown";
}

const char* to_string(Expectation e) noexcept {
  switch (e) {
    case Expectation::Auto: return "auto";
    case Expectation::Success: return "success";
    case Expectation::Failure: return "failure";
  }
  return "unknown";
}

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.users = {{"alice", "tr0ub4dor&3"}, {"bob", "hunter2"}, {"carol", "opensesame"}};
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    c.seed = parse_int<std::uint64_t>(kSeedEnvVar, env);
  }
  return c;
}

ScenarioConfig ScenarioConfig::from_json_text(std::string_view text,
                                              const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");

  ScenarioConfig c = defaults();
  try {
    for (const auto& [raw_key, value] : j.items()) {
      const std::string key = normalize_key(raw_key);
      if (key == "seed") {
        c.seed = value.is_string() ? parse_int<std::uint64_t>(key, value.get<std::string>())
                                   : value.get<std::uint64_t>();
      } else if (key == "prime_bits") {
        c.prime_bits = value.get<unsigned>();
      } else if (key == "delta_t") {
        c.delta_t = value.get<std::uint64_t>();
      } else if (key == "hash_variant") {
        c.hash_variant = parse_variant(value.get<std::string>());
      } else if (key == "users") {
        c.users.clear();
        for (const auto& u : value) c.users.push_back({u.at("id").get<std::string>(), u.at("pw").get<std::string>()});
      } else if (key == "sessions") {
        c.sessions = value.get<std::uint64_t>();
      } else if (key == "dictionary_path") {
        if (!value.is_null()) c.dictionary_path = resolve(base_dir, value.get<std::string>());
      } else if (key == "attack") {
        c.attack = parse_attack(value.get<std::string>());
      } else if (key == "epsilon") {
        c.epsilon = value.get<std::int64_t>();
      } else if (key == "expect_attack") {
        c.expect_attack = parse_expectation(value.get<std::string>());
      } else if (key == "victim") {
        c.victim = value.get<std::string>();
      } else if (key == "new_password") {
        c.new_password = value.get<std::string>();
      } else if (key == "clone_password") {
        c.clone_password = value.get<std::string>();
      } else if (key == "transcript_log") {
        if (!value.is_null()) c.transcript_log = resolve(base_dir, value.get<std::string>());
      } else {
        config_error("unknown config key '" + raw_key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str(), path.parent_path());
}

void ScenarioConfig::set(std::string_view raw_key, std::string_view value) {
  const std::string key = normalize_key(raw_key);
  if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "prime_bits") {
    prime_bits = parse_int<unsigned>(key, value);
  } else if (key == "delta_t") {
    delta_t = parse_int<std::uint64_t>(key, value);
  } else if (key == "hash_variant") {
    hash_variant = parse_variant(value);
  } else if (key == "sessions") {
    sessions = parse_int<std::uint64_t>(key, value);
  } else if (key == "dictionary" || key == "dictionary_path") {
    dictionary_path = std::filesystem::path(std::string(value));
  } else if (key == "attack") {
    attack = parse_attack(value);
  } else if (key == "epsilon") {
    epsilon = parse_int<std::int64_t>(key, value);
  } else if (key == "expect_attack" || key == "expect") {
    expect_attack = parse_expectation(value);
  } else if (key == "victim") {
    victim = std::string(value);
  } else if (key == "transcript_log") {
    transcript_log = std::filesystem::path(std::string(value));
  } else {
    config_error("unknown setting '" + std::string(raw_key) + "'");
  }
}

const UserSpec& ScenarioConfig::victim_spec() const {
  if (users.empty()) config_error("no users configured");
  if (victim.empty()) return users.front();
  auto it = std::find_if(users.begin(), users.end(), [&](const UserSpec& u) { return u.id == victim; });
  if (it == users.end()) config_error("victim '" + victim + "' is not a configured user");
  return *it;
}

void ScenarioConfig::validate() const {
  if (sessions < 1) config_error("sessions must be >= 1");
  if (prime_bits < 5) config_error("prime_bits must be >= 5");
  if (prime_bits > 4096) config_error("prime_bits must be <= 4096");
  if (delta_t == 0) config_error("delta_t must be > 0");
  if (users.empty()) config_error("at least one user is required");
  std::set<std::string> ids;
  for (const auto& u : users) {
    try {
      Identity{u.id};
      Password{u.pw};
    } catch (const Error& e) {
      config_error(std::string("bad user entry: ") + e.what());
    }
    if (!ids.insert(u.id).second) config_error("duplicate user id '" + u.id + "'");
  }
  victim_spec();
  if (attack == AttackKind::Guess && !dictionary_path) {
    config_error("attack=guess requires dictionary_path");
  }
  if (clone_password.empty()) config_error("clone_password must be non-empty");
  if (epsilon < -1'000'000 || epsilon > 1'000'000) config_error("epsilon out of range");
}

// ---------------------------------------------------------------------------

namespace {

struct Account {
  UserSpec spec;
  SmartCardState card;
  Password pw;
};

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, std::ostream& out)
      : cfg_(cfg), out_(out), rng_(cfg.seed), sim_(make_sim()) {}

  bool run();

 private:
  env::Simulation make_sim() {
    auto params = crypto::GroupParams::generate(cfg_.prime_bits, rng_);
    return env::Simulation(protocol::ServerState(std::move(params), cfg_.delta_t, cfg_.hash_variant),
                           protocol::Timestamp{kEpoch}, rng_());
  }

  Account& victim() { return accounts_.at(victim_index_); }

  void idle() { sim_.clock().advance(static_cast<std::int64_t>(1 + rng_() % 5)); }

  env::SessionOutcome honest_session(Account& a, std::string_view tag = "session");
  void rotate_victim_password();
  std::vector<Transcript> eavesdropped_log();

  struct Secret {
    std::optional<crypto::Digest> value;
    std::string source;
  };
  Secret acquire_secret(const std::vector<Transcript>& log);
  void report_guess(const attacks::GuessResult& g);

  bool attack_guess();
  bool attack_clone();
  bool attack_pfs();
  bool attack_forge();

  bool dictionary_has(const std::string& pw) const {
    return dictionary_ && std::any_of(dictionary_->candidates.begin(), dictionary_->candidates.end(),
                                      [&](const Password& c) { return c.value() == pw; });
  }

  void kv(std::string_view key, const std::string& value) { trailer_.emplace_back(key, value); }
  void kv(std::string_view key, std::uint64_t value) { kv(key, std::to_string(value)); }

  const ScenarioConfig& cfg_;
  std::ostream& out_;
  std::mt19937_64 rng_;
  env::Simulation sim_;
  std::vector<Account> accounts_;
  std::size_t victim_index_ = 0;
  std::optional<attacks::Dictionary> dictionary_;
  std::map<std::uint64_t, protocol::SessionKey> honest_keys_;
  std::uint64_t honest_run_ = 0;
  std::uint64_t honest_ok_ = 0;
  std::uint64_t honest_keys_equal_ = 0;
  bool expect_success_ = true;
  std::vector<std::pair<std::string, std::string>> trailer_;
};

env::SessionOutcome Runner::honest_session(Account& a, std::string_view tag) {
  env::SessionOutcome o = sim_.run_session(a.card, a.pw);
  ++honest_run_;
  const bool ok = o.transcript.server_accepted && o.transcript.user_accepted;
  const bool equal = o.user_key && o.server_key && *o.user_key == *o.server_key;
  if (ok) ++honest_ok_;
  if (equal) {
    ++honest_keys_equal_;
    honest_keys_.emplace(o.transcript.session_id, *o.server_key);
  }
  out_ << tag << ' ' << o.transcript.session_id << " user=" << a.spec.id
       << " server=" << protocol::to_string(o.server_status)
       << " client=" << (o.user_status ? protocol::to_string(*o.user_status) : "none")
       << " keys_equal=" << (equal ? 1 : 0) << '\n';
  idle();
  return o;
}

void Runner::rotate_victim_password() {
  Account& v = victim();
  const auto auth = honest_session(v, "auth-for-change");
  if (!auth.transcript.user_accepted) {
    out_ << "password change skipped: authentication failed\n";
    return;
  }
  const std::string next = cfg_.new_password.empty() ? v.pw.value() + "-rotated" : cfg_.new_password;
  v.card = protocol::change_password(v.card, v.pw, Password(next));
  v.pw = Password(next);
  out_ << "password change: user=" << v.spec.id << " after session "
       << auth.transcript.session_id << '\n';
  kv("password_changed_after_session", auth.transcript.session_id);
}

std::vector<Transcript> Runner::eavesdropped_log() {
  if (!cfg_.transcript_log) return sim_.session_log();
  save_transcript_log(*cfg_.transcript_log, sim_.session_log());
  return load_transcript_log(*cfg_.transcript_log);
}

void Runner::report_guess(const attacks::GuessResult& g) {
  out_ << "guess: trials=" << g.trials << " confirmations=" << g.confirmations
       << " password=" << (g.password ? g.password->value() : "<absent>") << '\n';
  kv("guess_found", g.password ? 1u : 0u);
  kv("guess_password", g.password ? g.password->value() : "-");
  kv("guess_trials", g.trials);
  kv("guess_confirmations", g.confirmations);
}

Runner::Secret Runner::acquire_secret(const std::vector<Transcript>& log) {
  const CardDump dump = dump_card(victim().card);
  if (dictionary_) {
    const auto g = attacks::offline_password_guess(dump, log, *dictionary_);
    report_guess(g);
    if (!g.password) return {std::nullopt, "guess"};
    return {attacks::long_term_secret_from(dump, *g.password), "guess"};
  }
  // No dictionary: the password is treated as already compromised.
  return {attacks::long_term_secret_from(dump, victim().pw), "leaked"};
}

bool Runner::attack_guess() {
  expect_success_ = dictionary_has(victim().pw.value());
  const auto log = eavesdropped_log();
  const auto g = attacks::offline_password_guess(dump_card(victim().card), log, *dictionary_);
  report_guess(g);
  return g.password && *g.password == victim().pw;
}

bool Runner::attack_clone() {
  expect_success_ = !dictionary_ || dictionary_has(victim().pw.value());
  const auto secret = acquire_secret(eavesdropped_log());
  kv("password_source", secret.source);
  if (!secret.value) return false;

  rotate_victim_password();
  const auto after = honest_session(victim(), "victim-after-change");

  const SmartCardState clone =
      attacks::clone_card(*secret.value, victim().card.id, Password(cfg_.clone_password));
  const env::SessionOutcome o = sim_.run_session(clone, Password(cfg_.clone_password));
  out_ << "clone session " << o.transcript.session_id
       << " server=" << protocol::to_string(o.server_status)
       << " client=" << (o.user_status ? protocol::to_string(*o.user_status) : "none") << '\n';
  kv("victim_after_change_accepted", after.transcript.user_accepted ? 1u : 0u);
  kv("clone_server_accepted", o.transcript.server_accepted ? 1u : 0u);
  kv("clone_user_accepted", o.transcript.user_accepted ? 1u : 0u);
  return o.transcript.server_accepted && o.transcript.user_accepted;
}

bool Runner::attack_pfs() {
  // The dump happens after the mid-run password change, so the dictionary
  // must contain the current password.
  expect_success_ = !dictionary_ || dictionary_has(victim().pw.value());
  const auto log = eavesdropped_log();
  const auto secret = acquire_secret(log);
  kv("password_source", secret.source);
  if (!secret.value) return false;

  std::vector<Transcript> victim_log;
  for (const auto& t : log) {
    if (t.request.id == victim().card.id) victim_log.push_back(t);
  }
  const auto rec = attacks::recover_past_session_keys(*secret.value, victim_log);
  std::size_t matching = 0;
  for (const auto& k : rec.keys) {
    auto it = honest_keys_.find(k.session_id);
    const bool match = it != honest_keys_.end() && it->second == k.key;
    if (match) ++matching;
    out_ << "recovered session " << k.session_id << " key=" << k.key.bits.hex()
         << " match=" << (match ? 1 : 0) << '\n';
  }
  kv("pfs_transcripts", victim_log.size());
  kv("pfs_keys_recovered", rec.keys.size());
  kv("pfs_keys_matching", matching);
  kv("pfs_skipped", rec.skipped_sessions.size());
  return !rec.keys.empty() && matching == rec.keys.size();
}

bool Runner::attack_forge() {
  expect_success_ = cfg_.hash_variant == crypto::HashVariant::Raw;
  const std::int64_t eps = cfg_.epsilon;
  std::string forge_status = "not-attempted";

  env::AdversaryHooks hooks;
  hooks.on_reply = [&](const protocol::ServerReply& r, env::SimClock& clock) {
    clock.advance(std::max<std::int64_t>(eps, 0));
    try {
      auto forged = attacks::forge_server_reply(
          r, eps, cfg_.hash_variant, attacks::FreshnessWindow{clock.now(), cfg_.delta_t});
      forge_status = "forged";
      return env::Interception<protocol::ServerReply>::modify(std::move(forged.reply));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Unsupported) {
        forge_status = "unsupported";
        // Fall back to shifting T_S and leaving C_S alone.
        protocol::ServerReply naive = r;
        naive.t_s.seconds = static_cast<std::uint64_t>(static_cast<std::int64_t>(r.t_s.seconds) + eps);
        return env::Interception<protocol::ServerReply>::modify(std::move(naive));
      }
      forge_status = "epsilon-out-of-range";
      return env::Interception<protocol::ServerReply>::deliver();
    }
  };

  const env::SessionOutcome o = sim_.run_session(victim().card, victim().pw, hooks);
  const bool user_ok = o.transcript.user_accepted;
  const bool keys_differ = o.user_key && o.server_key && *o.user_key != *o.server_key;
  out_ << "forge session " << o.transcript.session_id << " epsilon=" << eps
       << " status=" << forge_status
       << " client=" << (o.user_status ? protocol::to_string(*o.user_status) : "none")
       << " keys_differ=" << (keys_differ ? 1 : 0) << '\n';
  kv("forge_status", forge_status);
  kv("forge_epsilon", std::to_string(eps));
  kv("forge_user_accepted", user_ok ? 1u : 0u);
  kv("forge_keys_differ", keys_differ ? 1u : 0u);
  return forge_status == "forged" && user_ok && keys_differ;
}

bool Runner::run() {
  if (cfg_.dictionary_path) dictionary_ = attacks::Dictionary::load(*cfg_.dictionary_path);

  const UserSpec& vs = cfg_.victim_spec();
  for (const auto& u : cfg_.users) {
    if (u.id == vs.id) victim_index_ = accounts_.size();
    accounts_.push_back({u, sim_.register_user(Identity(u.id), Password(u.pw)), Password(u.pw)});
  }

  out_ << "== scenario ==\n"
       << "seed: " << cfg_.seed << '\n'
       << "prime_bits: " << cfg_.prime_bits << '\n'
       << "delta_t: " << cfg_.delta_t << '\n'
       << "hash_variant: " << crypto::to_string(cfg_.hash_variant) << '\n'
       << "users: " << accounts_.size() << '\n'
       << "victim: " << vs.id << '\n'
       << "sessions: " << cfg_.sessions << '\n'
       << "attack: " << to_string(cfg_.attack) << '\n'
       << "== sessions ==\n";

  for (std::uint64_t i = 0; i < cfg_.sessions; ++i) {
    if (cfg_.attack == AttackKind::Pfs && i == cfg_.sessions / 2) rotate_victim_password();
    honest_session(accounts_[i % accounts_.size()]);
  }

  bool attack_ok = true;
  if (cfg_.attack != AttackKind::None) {
    out_ << "== attack ==\n";
    switch (cfg_.attack) {
      case AttackKind::Guess: attack_ok = attack_guess(); break;
      case AttackKind::Clone: attack_ok = attack_clone(); break;
      case AttackKind::Pfs: attack_ok = attack_pfs(); break;
      case AttackKind::Forge: attack_ok = attack_forge(); break;
      case AttackKind::None: break;
    }
  }
  // Final log includes any attack sessions run after the eavesdropping.
  if (cfg_.transcript_log) save_transcript_log(*cfg_.transcript_log, sim_.session_log());
  if (cfg_.expect_attack != Expectation::Auto) {
    expect_success_ = cfg_.expect_attack == Expectation::Success;
  }

  const bool honest_ok = honest_ok_ == honest_run_ && honest_keys_equal_ == honest_run_;
  const bool attack_as_expected = cfg_.attack == AttackKind::None || attack_ok == expect_success_;
  const bool met = honest_ok && attack_as_expected;

  out_ << "== summary ==\n"
       << "honest_sessions=" << honest_run_ << '\n'
       << "honest_accepted=" << honest_ok_ << '\n'
       << "honest_keys_equal=" << honest_keys_equal_ << '\n'
       << "attack=" << to_string(cfg_.attack) << '\n';
  if (cfg_.attack != AttackKind::None) {
    out_ << "attack_expected=" << (expect_success_ ? "success" : "failure") << '\n'
         << "attack_outcome=" << (attack_ok ? "success" : "failure") << '\n';
  }
  for (const auto& [k, v] : trailer_) out_ << k << '=' << v << '\n';
  out_ << "expectations_met=" << (met ? 1 : 0) << '\n';
  return met;
}

}  // namespace

Report run_scenario(const ScenarioConfig& config, bool with_header) {
  config.validate();
  std::ostringstream out;
  if (with_header) out << "# songlab report generated " << utc_now() << '\n';
  Runner runner(config, out);
  const bool met = runner.run();
  return Report{out.str(), met, met ? 0 : 1};
}

}  // namespace songlab::scenario
