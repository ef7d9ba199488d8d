#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "alienzoo/event_log.hpp"
#include "alienzoo/game.hpp"
#include "alienzoo/payment.hpp"
#include "alienzoo/quality.hpp"
#include "alienzoo/study_config.hpp"

namespace alienzoo {

/// Condition for the n-th created session (0-based). BlockRandom shuffles each consecutive
/// pair, so the two groups never differ by more than one.
class ConditionAssigner {
 public:
  ConditionAssigner(AssignmentKind kind, std::uint64_t seed, Condition fixed = Condition::Cfe);
  Condition at(std::uint64_t index) const;

 private:
  AssignmentKind kind_;
  std::uint64_t seed_;
  Condition fixed_;
};

std::int64_t system_clock_ms();

class StudyService {
 public:
  using Clock = std::function<std::int64_t()>;

  /// Recovers from data_dir (snapshot, then the event log) if it holds earlier state.
  StudyService(StudyConfig config, GameConfig game, Clock clock = system_clock_ms);

  struct Created {
    std::string session_id;
    SceneDescriptor scene;
  };
  Created create_session(bool consent);
  SceneDescriptor scene(const std::string& id) const;
  SceneDescriptor start(const std::string& id);
  TrialRecord feed(const std::string& id, const PlantVector& leaves, std::int64_t decision_time_ms);
  FeedbackBlock feedback(const std::string& id) const;
  SceneDescriptor continue_after_feedback(const std::string& id);
  AttentionRecord attention(const std::string& id, int answer);
  void survey(const std::string& id, const SurveyResponse& response);
  /// Plaintext code, once per finished session.
  std::string payment_code(const std::string& id);
  std::optional<std::string> verify_payment(const std::string& token) const;
  void delete_payment(const std::string& id);

  Session session(const std::string& id) const;
  /// Copies of every session, ordered by id.
  std::vector<Session> sessions() const;
  std::vector<Session> completed_sessions() const;
  /// Canonical dump of the live state; equals replay(...).to_json() of the same log.
  nlohmann::json state_json() const;

  void write_snapshot();
  std::size_t events_appended() const { return log_.appended(); }
  const std::filesystem::path& event_log_path() const { return log_.path(); }
  std::filesystem::path snapshot_path() const;
  const Game& game() const { return game_; }
  const StudyConfig& config() const { return config_; }

 private:
  struct Entry {
    mutable std::mutex mu;
    Session session;
    std::uint64_t last_seq = 0;
    std::uint64_t creation_index = 0;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  template <typename Op>
  auto mutate(const std::string& id, const char* kind, Op op);
  void append(Entry& e, const char* kind, nlohmann::json payload, std::int64_t now);
  void maybe_snapshot();

  StudyConfig config_;
  Game game_;
  Clock clock_;
  ConditionAssigner assigner_;
  EventLog log_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  std::uint64_t created_ = 0;  // guarded by map_mu_
  mutable std::mutex payment_mu_;
  PaymentStore payments_;
  std::mutex snapshot_mu_;
  std::atomic<std::size_t> since_snapshot_{0};
};

}  // namespace alienzoo
