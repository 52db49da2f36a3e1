#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "songlab/crypto.hpp"

namespace songlab::scenario {

enum class AttackKind { None, Guess, Clone, Pfs, Forge };
enum class Expectation { Auto, Success, Failure };

const char* to_string(AttackKind a) noexcept;
const char* to_string(Expectation e) noexcept;

struct UserSpec {
  std::string id;
  std::string pw;
};

/// Environment variable consulted for the default seed.
inline constexpr const char* kSeedEnvVar = "SONGLAB_SEED";

struct ScenarioConfig {
  std::uint64_t seed = 1;
  unsigned prime_bits = 64;
  std::uint64_t delta_t = 30;
  crypto::HashVariant hash_variant = crypto::HashVariant::Raw;
  std::vector<UserSpec> users;
  std::uint64_t sessions = 10;
  std::optional<std::filesystem::path> dictionary_path;
  AttackKind attack = AttackKind::None;
  std::int64_t epsilon = 1;
  Expectation expect_attack = Expectation::Auto;
  std::string victim;            // empty: first user
  std::string new_password;      // empty: victim pw + "-rotated"
  std::string clone_password = "attacker-chosen";
  std::optional<std::filesystem::path> transcript_log;

  /// Built-in users, seed from $SONGLAB_SEED when set.
  static ScenarioConfig defaults();

  /// JSON object; unknown keys are a ConfigError. Relative paths resolve
  /// against `base_dir`.
  static ScenarioConfig from_json_text(std::string_view text,
                                       const std::filesystem::path& base_dir = {});
  static ScenarioConfig load(const std::filesystem::path& path);

  /// Flag-style override, e.g. set("hash-variant", "finalized"). Keys accept
  /// '-' or '_'. Relative paths stay relative to the working directory.
  void set(std::string_view key, std::string_view value);

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  const UserSpec& victim_spec() const;
};

struct Report {
  std::string text;
  bool expectations_met = false;
  int exit_code = 1;  // 0 met, 1 violated
};

/// Throws Error(ConfigError | IoError) for bad configs or missing files.
Report run_scenario(const ScenarioConfig& config, bool with_header = true);

}  // namespace songlab::scenario
