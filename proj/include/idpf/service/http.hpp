#pragma once

#include <httplib.h>

#include <exception>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "idpf/error.hpp"
#include "idpf/service/service.hpp"

namespace idpf::service::http {

using nlohmann::json;

inline int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTerm:
    case ErrorCode::BadRequest:
    case ErrorCode::WeakPassword:
    case ErrorCode::InvalidEncoding:
    case ErrorCode::BadHeader:
    case ErrorCode::SpanOutOfBounds:
    case ErrorCode::OverlappingSpans:
      return 400;
    case ErrorCode::InvalidCredentials:
    case ErrorCode::InvalidSession:
    case ErrorCode::UnknownApiKey:
      return 401;
    case ErrorCode::PermissionNotGranted: return 403;
    case ErrorCode::UnknownUser:
    case ErrorCode::UnknownApp:
    case ErrorCode::FileNotFound:
      return 404;
    case ErrorCode::UsernameTaken: return 409;
    case ErrorCode::TextTooLarge: return 413;
    default: return 500;
  }
}

inline json error_body(ErrorCode code, std::string_view detail) {
  return {{"error", std::string(to_string(code))}, {"detail", std::string(detail)}};
}

inline json to_json(const policy::PolicyList& list) {
  json terms = json::array();
  for (const auto& t : list.terms) terms.push_back(t.surface());
  return {{"owner", list.owner.value},
          {"app_id", list.app.value},
          {"kind", std::string(to_string(list.kind))},
          {"terms", terms},
          {"updated_at", service::detail::to_micros(list.updated_at)}};
}

inline json to_json(const StoredReport& r) {
  json spans = json::array();
  for (const auto& s : r.report.spans) spans.push_back({{"start", s.start}, {"end", s.end}, {"source", s.source}});
  return {{"report_id", r.report_id},
          {"app_id", r.app.value},
          {"sender", r.sender.value},
          {"total_masked", r.report.total_masked},
          {"by_source", r.report.by_source},
          {"spans", spans},
          {"timestamp", service::detail::to_micros(r.report.timestamp)}};
}

inline json to_json(const Notification& n) {
  return {{"report_id", n.report_id},
          {"app_id", n.app.value},
          {"timestamp", service::detail::to_micros(n.timestamp)},
          {"count", n.count}};
}

// {"categories": ["names", ...], "numerals": bool, "placeholder": text}; all
// fields optional.
inline policy::FilterScheme scheme_from_json(const json& j) {
  policy::FilterScheme scheme;
  if (j.is_null()) return scheme;
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "scheme must be an object");
  if (j.contains("categories")) {
    for (const auto& c : j.at("categories")) {
      const auto id = vocab::parse_category(c.get<std::string>());
      if (!id) throw Error(ErrorCode::BadRequest, "unknown category " + c.get<std::string>());
      scheme.categories.insert(*id);
    }
  }
  scheme.numerals = j.value("numerals", false);
  scheme.placeholder = j.value("placeholder", std::string(kDefaultPlaceholder));
  return scheme;
}

namespace detail {

inline json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, e.what());
  }
}

template <class T>
T field(const json& body, const char* name) {
  if (!body.contains(name)) throw Error(ErrorCode::BadRequest, std::string("missing field ") + name);
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::BadRequest, std::string("wrong type for field ") + name);
  }
}

inline std::optional<std::string> bearer(const httplib::Request& req) {
  const std::string h = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (h.rfind(kPrefix, 0) != 0) return std::nullopt;
  return h.substr(kPrefix.size());
}

inline std::string require_bearer(const httplib::Request& req) {
  auto token = bearer(req);
  if (!token) throw Error(ErrorCode::InvalidSession, "missing bearer token");
  return *token;
}

inline policy::ListKind kind_param(const httplib::Request& req) {
  const auto kind = policy::parse_list_kind(req.path_params.at("kind"));
  if (!kind) throw Error(ErrorCode::BadRequest, "list kind must be SRB, ORB or SRW");
  return *kind;
}

inline void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class Handler>
httplib::Server::Handler wrap(Handler h) {
  return [h](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      reply(res, status_for(e.code()), error_body(e.code(), e.detail()));
    } catch (const json::exception& e) {
      reply(res, 400, error_body(ErrorCode::BadRequest, e.what()));
    }
  };
}

}  // namespace detail

// Registers every endpoint on `server`. The service must outlive it.
inline void mount(httplib::Server& server, FilterService& svc) {
  using detail::field;
  using detail::reply;
  using detail::wrap;

  // JSON escaping can grow text up to six-fold; anything past that cannot be
  // a request within the text limit.
  server.set_payload_max_length(svc.config().max_text_bytes * 6 + (64 << 10));
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    detail::reply(res, 500, error_body(ErrorCode::Storage, what));
  });

  server.Post("/users", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req);
                const UserId id =
                    svc.register_user(field<std::string>(body, "username"), field<std::string>(body, "password"));
                reply(res, 201, {{"user_id", id.value}});
              }));

  server.Post("/sessions", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req);
                const auto login = svc.login(field<std::string>(body, "username"), field<std::string>(body, "password"));
                reply(res, 201,
                      {{"token", login.token},
                       {"user_id", login.user.value},
                       {"expires_at", service::detail::to_micros(login.expires_at)}});
              }));

  server.Post("/apps", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req);
                std::optional<MatchStrategy> strategy;
                if (body.contains("strategy")) {
                  strategy = parse_strategy(field<std::string>(body, "strategy"));
                  if (!strategy) throw Error(ErrorCode::BadRequest, "unknown strategy");
                }
                const auto reg = svc.register_app(field<std::string>(body, "name"), strategy);
                reply(res, 201,
                      {{"app_id", reg.app_id.value},
                       {"name", reg.name},
                       {"api_key", reg.api_key},
                       {"strategy", std::string(to_string(reg.strategy))}});
              }));

  server.Post("/grants", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req);
                const AppId app{field<std::string>(body, "app_id")};
                const Grant g{body.value("allow_filtering", true), body.value("allow_others_to_share_me", true)};
                svc.grant_permission(detail::require_bearer(req), app, g);
                reply(res, 200,
                      {{"app_id", app.value},
                       {"allow_filtering", g.allow_filtering},
                       {"allow_others_to_share_me", g.allow_others_to_share_me}});
              }));

  // Body: {"app_id": ..., "term": ...} or {"app_id": ..., "terms": [...]}.
  auto mutate = [&svc](bool insert) {
    return wrap([&svc, insert](const httplib::Request& req, httplib::Response& res) {
      const std::string token = detail::require_bearer(req);
      const auto kind = detail::kind_param(req);
      const json body = detail::parse_body(req);
      const AppId app{field<std::string>(body, "app_id")};
      std::vector<std::string> terms;
      if (body.contains("terms")) terms = field<std::vector<std::string>>(body, "terms");
      if (body.contains("term")) terms.push_back(field<std::string>(body, "term"));
      if (terms.empty()) throw Error(ErrorCode::BadRequest, "missing field term");
      policy::PolicyList list;
      for (const auto& t : terms) {
        list = insert ? svc.upsert_entry(token, app, kind, t) : svc.remove_entry(token, app, kind, t);
      }
      reply(res, 200, to_json(list));
    });
  };
  server.Put("/lists/:kind/terms", mutate(true));
  server.Delete("/lists/:kind/terms", mutate(false));

  server.Get("/lists/:kind/terms", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string token = detail::require_bearer(req);
               if (!req.has_param("app_id")) throw Error(ErrorCode::BadRequest, "missing query parameter app_id");
               reply(res, 200, to_json(svc.list(token, AppId{req.get_param_value("app_id")}, detail::kind_param(req))));
             }));

  // Apps call with X-Api-Key and name the sender; a logged-in user may call
  // with a bearer token and an app_id instead.
  server.Post("/filter", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req);
                const auto text = field<std::string>(body, "text");
                const auto scheme = scheme_from_json(body.contains("scheme") ? body.at("scheme") : json());
                ServiceFilterResult result;
                if (req.has_header("X-Api-Key")) {
                  result = svc.filter_text(req.get_header_value("X-Api-Key"), UserId{field<std::string>(body, "sender")},
                                           text, scheme);
                } else if (auto token = detail::bearer(req)) {
                  result = svc.filter_text_as(*token, AppId{field<std::string>(body, "app_id")}, text, scheme);
                } else {
                  throw Error(ErrorCode::UnknownApiKey, "missing X-Api-Key header");
                }
                reply(res, 200, {{"filtered_text", result.filtered_text}, {"report", to_json(result.report)}});
              }));

  server.Get("/reports", wrap([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string token = detail::require_bearer(req);
               std::optional<AppId> app;
               if (req.has_param("app_id")) app = AppId{req.get_param_value("app_id")};
               std::int64_t since = 0;
               if (req.has_param("since")) {
                 try {
                   since = std::stoll(req.get_param_value("since"));
                 } catch (const std::exception&) {
                   throw Error(ErrorCode::BadRequest, "since must be an integer (microseconds since epoch)");
                 }
               }
               const auto view = svc.get_reports(token, app, service::detail::from_micros(since));
               json reports = json::array();
               for (const auto& r : view.reports) reports.push_back(to_json(r));
               json notifications = json::array();
               for (const auto& n : view.notifications) notifications.push_back(to_json(n));
               reply(res, 200, {{"reports", reports}, {"notifications", notifications}});
             }));

  server.Get("/categories", wrap([&svc](const httplib::Request&, httplib::Response& res) {
               json out = json::array();
               for (const auto& c : svc.categories()) {
                 out.push_back({{"id", std::string(vocab::to_string(c.id))}, {"size", c.size}, {"source", c.source}});
               }
               reply(res, 200, {{"categories", out}});
             }));
}

}  // namespace idpf::service::http
