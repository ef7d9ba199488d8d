#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "alienzoo/game.hpp"
#include "alienzoo/payment.hpp"

namespace alienzoo {

/// Kinds: created, started, fed, continued, attention, survey, payment_issued, payment_deleted.
struct EventRecord {
  std::string session_id;
  std::uint64_t seq = 0;  // per session, from 1
  std::int64_t ts = 0;    // UTC ms
  std::string kind;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

std::string event_to_line(const EventRecord& e);
EventRecord event_from_line(const std::string& line);

/// Append-only JSONL file. Each append writes and flushes one whole line.
class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& path);
  void append(const EventRecord& e);
  std::size_t appended() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::size_t appended_ = 0;
};

/// Reads a log; a torn final line (crash mid-write) is dropped, any other bad line throws.
std::vector<EventRecord> read_event_log(const std::filesystem::path& path);

/// Sessions, payment records and sequence counters rebuilt from events.
struct ReplayState {
  std::map<std::string, Session> sessions;
  std::map<std::string, std::uint64_t> last_seq;
  std::map<std::string, std::uint64_t> creation_index;
  PaymentStore payments;

  nlohmann::json to_json() const;
  static ReplayState from_json(const nlohmann::json& j);
};

/// Applies one event. Throws ParseError on sequence gaps or unknown sessions/kinds.
void apply_event(const Game& game, ReplayState& state, const EventRecord& e);

ReplayState replay(const Game& game, const std::vector<EventRecord>& events,
                   ReplayState start = {});

}  // namespace alienzoo
