#include "alienzoo/event_log.hpp"

#include "alienzoo/errors.hpp"
#include "alienzoo/game_json.hpp"

namespace alienzoo {

using nlohmann::json;

std::string event_to_line(const EventRecord& e) {
  json j = {{"session_id", e.session_id},
            {"seq", e.seq},
            {"ts", e.ts},
            {"kind", e.kind},
            {"payload", e.payload}};
  return j.dump();
}

EventRecord event_from_line(const std::string& line) {
  try {
    const auto j = json::parse(line);
    EventRecord e;
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::uint64_t>();
    e.ts = j.at("ts").get<std::int64_t>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("bad event line: ") + ex.what());
  }
}

EventLog::EventLog(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw Error("cannot open event log " + path.string());
}

void EventLog::append(const EventRecord& e) {
  const auto line = event_to_line(e) + "\n";
  std::lock_guard lock(mu_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error("write to event log " + path_.string() + " failed");
  ++appended_;
}

std::size_t EventLog::appended() const {
  std::lock_guard lock(mu_);
  return appended_;
}

std::vector<EventRecord> read_event_log(const std::filesystem::path& path) {
  std::vector<EventRecord> events;
  std::ifstream in(path, std::ios::binary);
  if (!in) return events;
  std::string line;
  std::vector<std::string> lines;
  bool last_terminated = true;
  while (std::getline(in, line)) {
    last_terminated = !in.eof();
    if (!line.empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      events.push_back(event_from_line(lines[i]));
    } catch (const ParseError&) {
      if (i + 1 == lines.size() && !last_terminated) break;
      throw;
    }
  }
  return events;
}

json ReplayState::to_json() const {
  json sj = json::array();
  for (const auto& [id, s] : sessions) {
    json js;
    alienzoo::to_json(js, s);
    sj.push_back({{"session", js}, {"last_seq", last_seq.at(id)},
                  {"creation_index", creation_index.at(id)}});
  }
  json pj = json::object();
  for (const auto& [id, rec] : payments.records()) {
    pj[id] = {{"code_hash", rec.code_hash}, {"issued_at_ms", rec.issued_at_ms},
              {"deleted", rec.deleted}};
  }
  return {{"sessions", sj}, {"payments", pj}};
}

ReplayState ReplayState::from_json(const json& j) {
  ReplayState st;
  try {
    for (const auto& e : j.at("sessions")) {
      auto s = e.at("session").get<Session>();
      st.last_seq[s.id] = e.at("last_seq").get<std::uint64_t>();
      st.creation_index[s.id] = e.at("creation_index").get<std::uint64_t>();
      st.sessions.emplace(s.id, std::move(s));
    }
    for (const auto& [id, p] : j.at("payments").items()) {
      st.payments.restore(id, {p.at("code_hash").get<std::string>(),
                               p.at("issued_at_ms").get<std::int64_t>(),
                               p.at("deleted").get<bool>()});
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("bad snapshot: ") + ex.what());
  }
  return st;
}

void apply_event(const Game& game, ReplayState& state, const EventRecord& e) {
  const auto expected = state.last_seq[e.session_id] + 1;
  if (e.seq < expected) return;  // already covered by the snapshot
  if (e.seq != expected) {
    throw ParseError("event gap for session " + e.session_id + ": expected seq " +
                     std::to_string(expected) + ", got " + std::to_string(e.seq));
  }
  try {
    if (e.kind == "created") {
      auto s = game.create_session(e.session_id,
                                   condition_from_string(e.payload.at("condition").get<std::string>()),
                                   e.payload.at("seed").get<std::uint64_t>(), e.ts);
      state.sessions[e.session_id] = std::move(s);
      state.creation_index[e.session_id] = e.payload.at("index").get<std::uint64_t>();
    } else {
      auto it = state.sessions.find(e.session_id);
      if (it == state.sessions.end()) {
        throw ParseError("event for unknown session " + e.session_id);
      }
      auto& s = it->second;
      if (e.kind == "started") {
        game.start(s, e.ts);
      } else if (e.kind == "fed") {
        game.submit_feeding(s, e.payload.at("leaves").get<PlantVector>(),
                            e.payload.at("decision_time_ms").get<std::int64_t>(), e.ts);
      } else if (e.kind == "continued") {
        game.continue_after_feedback(s, e.ts);
      } else if (e.kind == "attention") {
        game.submit_attention(s, e.payload.at("answer").get<int>(), e.ts);
      } else if (e.kind == "survey") {
        game.submit_survey(s, survey_from_json(e.payload), e.ts);
      } else if (e.kind == "payment_issued") {
        state.payments.restore(e.session_id,
                               {e.payload.at("code_hash").get<std::string>(), e.ts, false});
      } else if (e.kind == "payment_deleted") {
        state.payments.remove(e.session_id);
      } else {
        throw ParseError("unknown event kind '" + e.kind + "'");
      }
    }
  } catch (const json::exception& ex) {
    throw ParseError("bad payload in " + e.kind + " event: " + ex.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& ex) {
    throw ParseError("event " + e.kind + " for " + e.session_id + " does not replay: " + ex.what());
  }
  state.last_seq[e.session_id] = e.seq;
}

ReplayState replay(const Game& game, const std::vector<EventRecord>& events, ReplayState start) {
  for (const auto& e : events) apply_event(game, start, e);
  return start;
}

}  // namespace alienzoo
