#include "songlab/transcript.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "songlab/error.hpp"

namespace songlab {

namespace {

std::string hex_of(const std::string& s) {
  return crypto::to_hex({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string text_of_hex(std::string_view hex) {
  const auto raw = crypto::from_hex(hex);
  return {raw.begin(), raw.end()};
}

std::uint64_t parse_u64(std::string_view s, std::string_view key) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw Error(ErrorCode::FormatError, "transcript log: bad integer for " + std::string(key));
  }
  return v;
}

bool parse_flag(std::string_view s, std::string_view key) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw Error(ErrorCode::FormatError, "transcript log: bad flag for " + std::string(key));
}

Transcript parse_record(const std::string& line, std::size_t line_no) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream fields(line);
  std::string tok;
  while (fields >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::FormatError,
                  "transcript log line " + std::to_string(line_no) + ": expected key=value");
    }
    kv.emplace(tok.substr(0, eq), tok.substr(eq + 1));
  }
  auto get = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw Error(ErrorCode::FormatError, "transcript log line " + std::to_string(line_no) +
                                              ": missing " + std::string(key));
    }
    return it->second;
  };

  Transcript t{
      parse_u64(get("session"), "session"),
      protocol::LoginRequest{protocol::Identity(text_of_hex(get("id"))),
                             crypto::Digest::from_hex(get("c_a")),
                             crypto::Block::from_hex(get("w_a")),
                             protocol::Timestamp{parse_u64(get("t_a"), "t_a")}},
      std::nullopt,
      parse_flag(get("user_accepted"), "user_accepted"),
      parse_flag(get("server_accepted"), "server_accepted"),
  };
  if (get("c_s") != "-") {
    t.reply = protocol::ServerReply{protocol::Identity(text_of_hex(get("reply_id"))),
                                    crypto::Digest::from_hex(get("c_s")),
                                    protocol::Timestamp{parse_u64(get("t_s"), "t_s")}};
  }
  if (t.reply.has_value() != t.server_accepted) {
    throw Error(ErrorCode::FormatError, "transcript log line " + std::to_string(line_no) +
                                            ": reply present iff server_accepted");
  }
  return t;
}

}  // namespace

CardDump dump_card(const protocol::SmartCardState& card) { return CardDump{card.id, card.b_a}; }

void write_transcript(std::ostream& out, const Transcript& t) {
  out << "session=" << t.session_id << " id=" << hex_of(t.request.id.value())
      << " t_a=" << t.request.t_a.seconds << " c_a=" << t.request.c_a.hex()
      << " w_a=" << t.request.w_a.hex() << " server_accepted=" << (t.server_accepted ? 1 : 0)
      << " user_accepted=" << (t.user_accepted ? 1 : 0);
  if (t.reply) {
    out << " reply_id=" << hex_of(t.reply->id.value()) << " t_s=" << t.reply->t_s.seconds
        << " c_s=" << t.reply->c_s.hex();
  } else {
    out << " reply_id=- t_s=- c_s=-";
  }
  out << '\n';
}

void write_transcript_log(std::ostream& out, const std::vector<Transcript>& log) {
  out << kTranscriptLogHeader << '\n';
  for (const auto& t : log) write_transcript(out, t);
}

std::vector<Transcript> read_transcript_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTranscriptLogHeader) {
    throw Error(ErrorCode::FormatError, "transcript log: missing or unknown header line");
  }
  std::vector<Transcript> log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      log.push_back(parse_record(line, line_no));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::FormatError) throw;
      throw Error(ErrorCode::FormatError,
                  "transcript log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

void save_transcript_log(const std::filesystem::path& path, const std::vector<Transcript>& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write transcript log " + path.string());
  write_transcript_log(out, log);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<Transcript> load_transcript_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open transcript log " + path.string());
  return read_transcript_log(in);
}

}  // namespace songlab
