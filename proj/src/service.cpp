#include "alienzoo/service.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include <sodium.h>

#include "alienzoo/errors.hpp"
#include "alienzoo/game_json.hpp"

namespace alienzoo {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string random_session_id() {
  if (sodium_init() < 0) throw Error("libsodium failed to initialize");
  unsigned char raw[8];
  randombytes_buf(raw, sizeof raw);
  char hex[2 * sizeof raw + 1];
  sodium_bin2hex(hex, sizeof hex, raw, sizeof raw);
  return hex;
}

}  // namespace

ConditionAssigner::ConditionAssigner(AssignmentKind kind, std::uint64_t seed, Condition fixed)
    : kind_(kind), seed_(seed), fixed_(fixed) {}

Condition ConditionAssigner::at(std::uint64_t index) const {
  if (kind_ == AssignmentKind::Fixed) return fixed_;
  const bool control_first = splitmix64(seed_ ^ splitmix64(index / 2)) & 1;
  const bool first = index % 2 == 0;
  return first == control_first ? Condition::Control : Condition::Cfe;
}

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

StudyService::StudyService(StudyConfig config, GameConfig game, Clock clock)
    : config_(std::move(config)),
      game_(std::move(game)),
      clock_(std::move(clock)),
      assigner_(config_.assignment, config_.master_seed, config_.fixed_condition),
      log_((std::filesystem::create_directories(config_.data_dir), config_.data_dir / "events.jsonl")) {
  ReplayState state;
  if (std::filesystem::exists(snapshot_path())) {
    std::ifstream in(snapshot_path());
    try {
      state = ReplayState::from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad snapshot: ") + e.what());
    }
  }
  state = replay(game_, read_event_log(log_.path()), std::move(state));
  for (auto& [id, s] : state.sessions) {
    auto e = std::make_shared<Entry>();
    e->session = std::move(s);
    e->last_seq = state.last_seq[id];
    e->creation_index = state.creation_index[id];
    created_ = std::max(created_, e->creation_index + 1);
    entries_.emplace(id, std::move(e));
  }
  payments_ = std::move(state.payments);
}

std::filesystem::path StudyService::snapshot_path() const {
  return config_.data_dir / "snapshot.json";
}

std::shared_ptr<StudyService::Entry> StudyService::find(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

void StudyService::append(Entry& e, const char* kind, json payload, std::int64_t now) {
  EventRecord rec{e.session.id, e.last_seq + 1, now, kind, std::move(payload)};
  log_.append(rec);
  e.last_seq = rec.seq;
  ++since_snapshot_;
}

template <typename Op>
auto StudyService::mutate(const std::string& id, const char* kind, Op op) {
  auto entry = find(id);
  std::unique_lock lock(entry->mu);
  const auto now = clock_();
  Session copy = entry->session;
  json payload = json::object();
  auto result = op(copy, payload, now);
  append(*entry, kind, std::move(payload), now);
  entry->session = std::move(copy);
  lock.unlock();
  maybe_snapshot();
  return result;
}

StudyService::Created StudyService::create_session(bool consent) {
  if (!consent) throw ValidationError("consent is required to start a session", {"consent"});
  auto entry = std::make_shared<Entry>();
  std::string id;
  {
    std::unique_lock lock(map_mu_);
    do {
      id = random_session_id();
    } while (entries_.count(id));
    entry->creation_index = created_++;
    const auto condition = assigner_.at(entry->creation_index);
    const auto seed = splitmix64(config_.master_seed + entry->creation_index + 1);
    const auto now = clock_();
    std::lock_guard elock(entry->mu);
    entry->session = game_.create_session(id, condition, seed, now);
    append(*entry, "created",
           {{"condition", to_string(condition)}, {"seed", seed}, {"index", entry->creation_index}},
           now);
    entries_.emplace(id, entry);
  }
  maybe_snapshot();
  return {id, scene(id)};
}

SceneDescriptor StudyService::scene(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  return game_.scene_descriptor(entry->session, clock_());
}

SceneDescriptor StudyService::start(const std::string& id) {
  return mutate(id, "started", [&](Session& s, json&, std::int64_t now) {
    game_.start(s, now);
    return game_.scene_descriptor(s, now);
  });
}

TrialRecord StudyService::feed(const std::string& id, const PlantVector& leaves,
                               std::int64_t decision_time_ms) {
  return mutate(id, "fed", [&](Session& s, json& payload, std::int64_t now) {
    auto rec = game_.submit_feeding(s, leaves, decision_time_ms, now);
    payload = {{"leaves", leaves}, {"decision_time_ms", decision_time_ms}};
    return rec;
  });
}

FeedbackBlock StudyService::feedback(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  return game_.feedback_payload(entry->session);
}

SceneDescriptor StudyService::continue_after_feedback(const std::string& id) {
  return mutate(id, "continued", [&](Session& s, json&, std::int64_t now) {
    game_.continue_after_feedback(s, now);
    return game_.scene_descriptor(s, now);
  });
}

AttentionRecord StudyService::attention(const std::string& id, int answer) {
  return mutate(id, "attention", [&](Session& s, json& payload, std::int64_t now) {
    auto rec = game_.submit_attention(s, answer, now);
    payload = {{"answer", answer}};
    return rec;
  });
}

void StudyService::survey(const std::string& id, const SurveyResponse& response) {
  mutate(id, "survey", [&](Session& s, json& payload, std::int64_t now) {
    game_.submit_survey(s, response, now);
    payload = response;
    return 0;
  });
}

std::string StudyService::payment_code(const std::string& id) {
  return mutate(id, "payment_issued", [&](Session& s, json& payload, std::int64_t now) {
    if (!s.completed()) throw ProtocolError("session " + s.id + " has not finished");
    std::lock_guard plock(payment_mu_);
    auto token = payments_.issue(s.id, now);
    payload = {{"code_hash", payments_.records().at(s.id).code_hash}};
    return token;
  });
}

std::optional<std::string> StudyService::verify_payment(const std::string& token) const {
  std::lock_guard plock(payment_mu_);
  return payments_.verify(token);
}

void StudyService::delete_payment(const std::string& id) {
  mutate(id, "payment_deleted", [&](Session&, json&, std::int64_t) {
    std::lock_guard plock(payment_mu_);
    payments_.remove(id);
    return 0;
  });
}

Session StudyService::session(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  return entry->session;
}

std::vector<Session> StudyService::sessions() const {
  std::vector<std::shared_ptr<Entry>> snapshot;
  {
    std::shared_lock lock(map_mu_);
    for (const auto& [id, e] : entries_) snapshot.push_back(e);
  }
  std::vector<Session> out;
  for (const auto& e : snapshot) {
    std::lock_guard lock(e->mu);
    out.push_back(e->session);
  }
  return out;
}

std::vector<Session> StudyService::completed_sessions() const {
  auto all = sessions();
  std::erase_if(all, [](const Session& s) { return !s.completed(); });
  return all;
}

json StudyService::state_json() const {
  ReplayState st;
  std::vector<std::shared_ptr<Entry>> snapshot;
  {
    std::shared_lock lock(map_mu_);
    for (const auto& [id, e] : entries_) snapshot.push_back(e);
  }
  for (const auto& e : snapshot) {
    std::lock_guard lock(e->mu);
    st.sessions[e->session.id] = e->session;
    st.last_seq[e->session.id] = e->last_seq;
    st.creation_index[e->session.id] = e->creation_index;
  }
  {
    std::lock_guard plock(payment_mu_);
    st.payments = payments_;
  }
  return st.to_json();
}

void StudyService::write_snapshot() {
  std::lock_guard lock(snapshot_mu_);
  since_snapshot_ = 0;
  const auto text = state_json().dump();
  const auto tmp = snapshot_path().string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write snapshot " + tmp);
  }
  std::filesystem::rename(tmp, snapshot_path());
}

void StudyService::maybe_snapshot() {
  if (config_.snapshot_every > 0 &&
      since_snapshot_.load() >= static_cast<std::size_t>(config_.snapshot_every)) {
    write_snapshot();
  }
}

}  // namespace alienzoo
