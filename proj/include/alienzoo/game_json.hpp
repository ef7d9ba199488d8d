#pragma once

#include <json.hpp>

#include "alienzoo/game.hpp"

namespace alienzoo {

void to_json(nlohmann::json& j, const PlantVector& p);
void from_json(const nlohmann::json& j, PlantVector& p);
void to_json(nlohmann::json& j, const Counterfactual& c);
void from_json(const nlohmann::json& j, Counterfactual& c);
void to_json(nlohmann::json& j, const TrialRecord& t);
void from_json(const nlohmann::json& j, TrialRecord& t);
void to_json(nlohmann::json& j, const AttentionRecord& a);
void from_json(const nlohmann::json& j, AttentionRecord& a);
void to_json(nlohmann::json& j, const TimingFlag& f);
void from_json(const nlohmann::json& j, TimingFlag& f);
void to_json(nlohmann::json& j, const SurveyResponse& r);
void to_json(nlohmann::json& j, const Session& s);
void from_json(const nlohmann::json& j, Session& s);

/// Client-facing payloads. Control blocks carry no counterfactual keys at all.
nlohmann::json feedback_to_json(const FeedbackBlock& block);
nlohmann::json scene_to_json(const SceneDescriptor& scene);

/// Lenient structural parse: absent items stay absent so validate_survey can name them.
/// Throws ValidationError for values of the wrong shape.
SurveyResponse survey_from_json(const nlohmann::json& j);

}  // namespace alienzoo
