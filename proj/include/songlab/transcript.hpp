#pragma once

// What an eavesdropper holds: recorded sessions and a dump of the victim's
// card. Attack code builds against this header and protocol.hpp only.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "songlab/protocol.hpp"

namespace songlab {

struct Transcript {
  std::uint64_t session_id = 0;
  protocol::LoginRequest request;
  std::optional<protocol::ServerReply> reply;  // present only if server_accepted
  bool user_accepted = false;
  bool server_accepted = false;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct CardDump {
  protocol::Identity id;
  crypto::Digest b_a;
};

/// Card compromise oracle: copies the two stored fields, nothing else.
CardDump dump_card(const protocol::SmartCardState& card);

// Session log: a header line "songlab-transcripts v1" then one record per
// line of space-separated key=value pairs (see docs/FORMATS.md).
inline constexpr const char* kTranscriptLogHeader = "songlab-transcripts v1";

void write_transcript(std::ostream& out, const Transcript& t);
void write_transcript_log(std::ostream& out, const std::vector<Transcript>& log);
std::vector<Transcript> read_transcript_log(std::istream& in);

void save_transcript_log(const std::filesystem::path& path, const std::vector<Transcript>& log);
std::vector<Transcript> load_transcript_log(const std::filesystem::path& path);

}  // namespace songlab
