#include "alienzoo/study_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "alienzoo/csv.hpp"
#include "alienzoo/errors.hpp"

namespace alienzoo {

using nlohmann::json;

void StudyConfig::validate() const {
  if (experiment != 1 && experiment != 2) throw ConfigError("experiment must be 1 or 2");
  if (trials != kTrialsPerSession) {
    throw ConfigError("trials must be " + std::to_string(kTrialsPerSession));
  }
  if (timings.start_delay_s <= 0 || timings.continue_delay_s <= 0 || timings.progress_s <= 0) {
    throw ConfigError("timings must be positive");
  }
  if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  try {
    cfe.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  parse_bind(bind);
}

StudyConfig study_config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  StudyConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    c.experiment = j.value("experiment", c.experiment);
    if (j.contains("model_path")) c.model_path = resolve(j["model_path"].get<std::string>());
    c.trials = j.value("trials", c.trials);
    if (j.contains("timings")) {
      const auto& t = j["timings"];
      c.timings.start_delay_s = t.value("start_delay_s", c.timings.start_delay_s);
      c.timings.continue_delay_s = t.value("continue_delay_s", c.timings.continue_delay_s);
      c.timings.progress_s = t.value("progress_s", c.timings.progress_s);
    }
    if (j.contains("cfe")) {
      const auto& f = j["cfe"];
      const auto mode = f.value("mode", std::string("max_target"));
      if (mode == "max_target") c.cfe.mode = CfeMode::MaxTarget;
      else if (mode == "strict_improve") c.cfe.mode = CfeMode::StrictImprove;
      else throw ConfigError("unknown cfe mode '" + mode + "'");
      c.cfe.epsilon = f.value("epsilon", c.cfe.epsilon);
      c.cfe.delta_improve = f.value("delta_improve", c.cfe.delta_improve);
    }
    const auto assignment = j.value("assignment", std::string("block_random"));
    if (assignment == "block_random") {
      c.assignment = AssignmentKind::BlockRandom;
    } else if (assignment == "fixed") {
      c.assignment = AssignmentKind::Fixed;
      c.fixed_condition = condition_from_string(j.value("fixed_condition", std::string("cfe")));
    } else {
      throw ConfigError("unknown assignment '" + assignment + "'");
    }
    c.master_seed = j.value("master_seed", c.master_seed);
    c.bind = j.value("bind", c.bind);
    if (j.contains("data_dir")) c.data_dir = resolve(j["data_dir"].get<std::string>());
    c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return study_config_from_json(ss.str(), path.parent_path());
}

void apply_env_overrides(StudyConfig& config) {
  if (const char* bind = std::getenv("ALIENZOO_BIND"); bind && *bind) config.bind = bind;
  if (const char* token = std::getenv("ALIENZOO_ADMIN_TOKEN"); token) config.admin_token = token;
  parse_bind(config.bind);
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ConfigError("bind address must be host:port, got '" + bind + "'");
  }
  try {
    const auto port = parse_int(bind.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("port out of range in '" + bind + "'");
    return {bind.substr(0, colon), static_cast<int>(port)};
  } catch (const ParseError&) {
    throw ConfigError("bad port in bind address '" + bind + "'");
  }
}

GameConfig game_config(const StudyConfig& config) {
  if (config.model_path.empty()) throw ConfigError("config has no model_path");
  GameConfig g;
  g.experiment = config.experiment;
  g.model = std::make_shared<const GrowthModel>(load_model(config.model_path.string()));
  g.cfe = config.cfe;
  g.timings = config.timings;
  return g;
}

}  // namespace alienzoo
