#include "alienzoo/http_api.hpp"

#include <httplib.h>
#include <json.hpp>

#include <sodium.h>

#include "alienzoo/errors.hpp"
#include "alienzoo/export.hpp"
#include "alienzoo/game_json.hpp"
#include "alienzoo/quality.hpp"
#include "alienzoo/service.hpp"

namespace alienzoo {

using nlohmann::json;

namespace {

constexpr const char* kSessionPath = R"(/api/session/([0-9a-f]{16}))";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::vector<std::string>& fields = {}) {
  json body = {{"error", message}};
  if (!fields.empty()) body["fields"] = fields;
  send_json(res, status, body);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
  }
}

/// Maps domain errors to status codes.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 409, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 422, e.what(), e.fields());
    } catch (const ParseError& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

bool authorized(const httplib::Request& req, const std::string& token) {
  if (token.empty()) return false;
  const auto header = req.get_header_value("Authorization");
  const std::string expected = "Bearer " + token;
  return header.size() == expected.size() &&
         sodium_memcmp(header.data(), expected.data(), expected.size()) == 0;
}

template <typename F>
httplib::Server::Handler admin(const std::string& token, F f) {
  return guarded([token, f](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, token)) {
      res.set_header("WWW-Authenticate", "Bearer");
      send_error(res, 401, "admin token required");
      return;
    }
    f(req, res);
  });
}

int require_int(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_number_integer()) {
    throw ValidationError(std::string(key) + " must be an integer", {key});
  }
  return body[key].get<int>();
}

}  // namespace

void register_routes(httplib::Server& server, StudyService& service, std::string admin_token) {
  StudyService* svc = &service;
  const std::string base = kSessionPath;

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"ok", true}});
  });

  server.Post("/api/session", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const bool consent = body.contains("consent") && body["consent"].is_boolean() &&
                         body["consent"].get<bool>();
    auto created = svc->create_session(consent);
    send_json(res, 201, {{"session_id", created.session_id}, {"scene", scene_to_json(created.scene)}});
  }));

  server.Get(base + "/scene", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, scene_to_json(svc->scene(req.matches[1])));
  }));

  server.Post(base + "/start", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, {{"scene", scene_to_json(svc->start(req.matches[1]))}});
  }));

  server.Post(base + "/feed", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto body = parse_body(req);
    if (!body.contains("leaves") || !body["leaves"].is_array() || body["leaves"].size() != 5) {
      throw ValidationError("leaves must be an array of 5 integers", {"leaves"});
    }
    std::array<int, kNumPlants> v{};
    for (int i = 0; i < kNumPlants; ++i) {
      if (!body["leaves"][i].is_number_integer()) {
        throw ValidationError("leaves must be an array of 5 integers", {"leaves"});
      }
      v[i] = body["leaves"][i].get<int>();
    }
    PlantVector leaves;
    try {
      leaves = PlantVector(v);
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), {"leaves"});
    }
    if (!body.contains("decision_time_ms") || !body["decision_time_ms"].is_number_integer()) {
      throw ValidationError("decision_time_ms must be an integer", {"decision_time_ms"});
    }
    const auto rec = svc->feed(id, leaves, body["decision_time_ms"].get<std::int64_t>());
    send_json(res, 200, {{"trial", rec.trial},
                         {"pack_before", rec.pack_before},
                         {"pack_after", rec.pack_after},
                         {"delta", rec.delta},
                         {"scene", scene_to_json(svc->scene(id))}});
  }));

  server.Get(base + "/feedback", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, feedback_to_json(svc->feedback(req.matches[1])));
  }));

  server.Post(base + "/continue", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, {{"scene", scene_to_json(svc->continue_after_feedback(req.matches[1]))}});
  }));

  server.Post(base + "/attention", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto rec = svc->attention(req.matches[1], require_int(body, "answer"));
    send_json(res, 200, {{"correct", rec.correct}});
  }));

  server.Post(base + "/survey", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    svc->survey(req.matches[1], survey_from_json(parse_body(req)));
    send_json(res, 200, {{"ok", true}});
  }));

  server.Get(base + "/payment-code", guarded([svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, {{"code", svc->payment_code(req.matches[1])}});
  }));

  server.Get("/admin/export", admin(admin_token, [svc](const httplib::Request& req, httplib::Response& res) {
    const auto format = req.get_param_value("format");
    if (format == "long-csv") {
      res.set_content(export_long_csv(svc->completed_sessions()), "text/csv");
    } else if (format == "survey-csv") {
      res.set_content(export_survey_csv(svc->completed_sessions()), "text/csv");
    } else {
      throw ValidationError("format must be long-csv or survey-csv", {"format"});
    }
  }));

  server.Get("/admin/quality", admin(admin_token, [svc](const httplib::Request&, httplib::Response& res) {
    json rows = json::array();
    for (const auto& s : svc->completed_sessions()) {
      const auto f = quality_flags(s);
      rows.push_back({{"session_id", s.id},
                      {"condition", to_string(s.condition)},
                      {"final_pack_size", s.pack_size},
                      {"speeder", f.speeder},
                      {"inattentive", f.inattentive},
                      {"straightliner_game", f.straightliner_game},
                      {"straightliner_survey", f.straightliner_survey},
                      {"excluded", f.any()}});
    }
    send_json(res, 200, rows);
  }));

  server.Post("/admin/payment/verify", admin(admin_token, [svc](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("code") || !body["code"].is_string()) {
      throw ValidationError("code must be a string", {"code"});
    }
    const auto owner = svc->verify_payment(body["code"].get<std::string>());
    json out = {{"valid", owner.has_value()}};
    if (owner) out["session_id"] = *owner;
    send_json(res, 200, out);
  }));

  server.Delete(R"(/admin/payment/([0-9a-f]{16}))", admin(admin_token, [svc](const httplib::Request& req, httplib::Response& res) {
    svc->delete_payment(req.matches[1]);
    send_json(res, 200, {{"ok", true}});
  }));

  server.Post("/admin/snapshot", admin(admin_token, [svc](const httplib::Request&, httplib::Response& res) {
    svc->write_snapshot();
    send_json(res, 200, {{"ok", true}});
  }));
}

}  // namespace alienzoo
