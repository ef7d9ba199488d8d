#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "alienzoo/cfe.hpp"
#include "alienzoo/game.hpp"

namespace alienzoo {

enum class AssignmentKind { BlockRandom, Fixed };

struct StudyConfig {
  int experiment = 1;
  std::filesystem::path model_path;
  int trials = kTrialsPerSession;
  Timings timings;
  CfeConfig cfe;
  AssignmentKind assignment = AssignmentKind::BlockRandom;
  Condition fixed_condition = Condition::Cfe;
  std::uint64_t master_seed = 0;
  std::string bind = "127.0.0.1:8080";
  std::filesystem::path data_dir = "alienzoo-data";  // event log and snapshots
  int snapshot_every = 500;                           // events between snapshots; 0 = never
  std::string admin_token;                            // from ALIENZOO_ADMIN_TOKEN only

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// JSON document; relative model_path and data_dir resolve against the file's directory.
StudyConfig load_study_config(const std::filesystem::path& path);
StudyConfig study_config_from_json(const std::string& text,
                                   const std::filesystem::path& base_dir = {});

/// ALIENZOO_BIND and ALIENZOO_ADMIN_TOKEN.
void apply_env_overrides(StudyConfig& config);

/// Splits "host:port".
std::pair<std::string, int> parse_bind(const std::string& bind);

/// Loads the model and checks it was trained for the configured experiment.
GameConfig game_config(const StudyConfig& config);

}  // namespace alienzoo
