#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "idpf/crypto.hpp"
#include "idpf/error.hpp"
#include "idpf/filter.hpp"
#include "idpf/match.hpp"
#include "idpf/policy.hpp"
#include "idpf/service/datastore.hpp"
#include "idpf/unicode.hpp"
#include "idpf/vocab.hpp"

namespace idpf::service {

using policy::AppId;
using policy::Timestamp;
using policy::UserId;

struct ServiceConfig {
  std::filesystem::path db_path = "idpf.sqlite3";
  std::filesystem::path data_dir = vocab::default_data_dir();
  std::uint32_t pbkdf2_iterations = 210000;
  MatchStrategy default_strategy = MatchStrategy::TrieKeywordProcessor;
  std::size_t max_text_bytes = 1 << 20;
  std::chrono::seconds session_ttl = std::chrono::hours(24);
};

inline constexpr std::size_t kSaltBytes = 16;
inline constexpr std::size_t kTokenBytes = 16;
inline constexpr std::size_t kApiKeyBytes = 32;
inline constexpr std::size_t kMinPasswordChars = 8;

struct PasswordRecord {
  crypto::Bytes salt;
  std::uint32_t iterations = 0;
  crypto::Bytes hash;
};

inline PasswordRecord make_password_record(std::string_view password, std::uint32_t iterations) {
  PasswordRecord r{crypto::random_bytes(kSaltBytes), iterations, {}};
  r.hash = crypto::pbkdf2_sha256(password, r.salt, iterations);
  return r;
}

inline bool verify_password(std::string_view password, const PasswordRecord& record) {
  return crypto::constant_time_equal(crypto::pbkdf2_sha256(password, record.salt, record.iterations), record.hash);
}

struct AppRegistration {
  AppId app_id;
  std::string name;
  // Only populated in the register_app result; the store keeps a digest.
  std::string api_key;
  MatchStrategy strategy = MatchStrategy::TrieKeywordProcessor;
};

struct LoginResult {
  std::string token;
  UserId user;
  Timestamp expires_at{};
};

struct Grant {
  bool allow_filtering = false;
  bool allow_others_to_share_me = true;
};

struct StoredReport {
  std::int64_t report_id = 0;
  AppId app;
  UserId sender;
  filter::FilterReport report;
};

// Tells an SRB owner that their entries masked something in someone else's
// message. Carries a count only.
struct Notification {
  std::int64_t report_id = 0;
  AppId app;
  Timestamp timestamp{};
  std::size_t count = 0;
};

struct ReportView {
  std::vector<StoredReport> reports;
  std::vector<Notification> notifications;
};

struct ServiceFilterResult {
  std::string filtered_text;
  StoredReport report;
};

struct CategoryInfo {
  vocab::CategoryId id;
  std::size_t size = 0;
  std::string source;
};

namespace detail {

inline std::int64_t to_micros(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_micros(std::int64_t us) { return Timestamp(std::chrono::microseconds(us)); }

inline std::string new_id(std::string_view prefix) { return std::string(prefix) + crypto::to_hex(crypto::random_bytes(8)); }

}  // namespace detail

// The filter service without its transport. Every state change is written to
// the datastore in a transaction before the in-memory policy store reflects
// it, and the policy store is rebuilt from the datastore on construction.
class FilterService {
 public:
  explicit FilterService(ServiceConfig config)
      : config_(std::move(config)),
        db_(config_.db_path),
        registry_(config_.data_dir),
        dummy_record_(make_password_record("dummy-password", config_.pbkdf2_iterations)) {
    load();
  }

  const ServiceConfig& config() const noexcept { return config_; }
  policy::PolicyStore& policy_store() noexcept { return policy_; }
  vocab::Registry& registry() noexcept { return registry_; }

  UserId register_user(std::string_view username, std::string_view password) {
    if (username.empty() || !unicode::is_valid_utf8(username)) throw Error(ErrorCode::BadRequest, "username required");
    if (!unicode::is_valid_utf8(password) || unicode::count_chars(password) < kMinPasswordChars) {
      throw Error(ErrorCode::WeakPassword, "password must have at least 8 characters");
    }
    const PasswordRecord record = make_password_record(password, config_.pbkdf2_iterations);
    const UserId user{detail::new_id("u_")};
    {
      Transaction tx(db_);
      Statement exists(db_, "SELECT 1 FROM users WHERE username = ?");
      if (exists.bind(username).step()) throw Error(ErrorCode::UsernameTaken, std::string(username));
      Statement(db_, "INSERT INTO users(user_id, username, salt, iterations, hash) VALUES (?, ?, ?, ?, ?)")
          .bind(user.value, username, record.salt, record.iterations, record.hash)
          .run();
      tx.commit();
    }
    policy_.add_user(user);
    return user;
  }

  // Unknown usernames go through a PBKDF2 derivation against a dummy record,
  // so both failure paths cost the same and return the same error.
  LoginResult login(std::string_view username, std::string_view password) {
    std::optional<std::pair<UserId, PasswordRecord>> found;
    {
      std::lock_guard lock(db_.mutex());
      Statement q(db_, "SELECT user_id, salt, iterations, hash FROM users WHERE username = ?");
      if (q.bind(username).step()) {
        found.emplace(UserId{q.text(0)},
                      PasswordRecord{q.blob(1), static_cast<std::uint32_t>(q.integer(2)), q.blob(3)});
      }
    }
    const bool ok = verify_password(password, found ? found->second : dummy_record_) && found.has_value();
    if (!ok) throw Error(ErrorCode::InvalidCredentials, "invalid username or password");

    LoginResult out{crypto::to_hex(crypto::random_bytes(kTokenBytes)), found->first,
                    policy::now() + std::chrono::duration_cast<std::chrono::microseconds>(config_.session_ttl)};
    std::unique_lock lock(sessions_mutex_);
    sessions_[out.token] = {out.user, out.expires_at};
    return out;
  }

  UserId authenticate(std::string_view token) {
    {
      std::shared_lock lock(sessions_mutex_);
      auto it = sessions_.find(std::string(token));
      if (it != sessions_.end() && it->second.expires_at > policy::now()) return it->second.user;
      if (it == sessions_.end()) throw Error(ErrorCode::InvalidSession, "unknown or expired session");
    }
    std::unique_lock lock(sessions_mutex_);
    sessions_.erase(std::string(token));
    throw Error(ErrorCode::InvalidSession, "unknown or expired session");
  }

  AppRegistration register_app(std::string_view name, std::optional<MatchStrategy> strategy = std::nullopt) {
    if (name.empty() || !unicode::is_valid_utf8(name)) throw Error(ErrorCode::BadRequest, "app name required");
    AppRegistration reg{AppId{detail::new_id("a_")}, std::string(name),
                        crypto::to_hex(crypto::random_bytes(kApiKeyBytes)), strategy.value_or(config_.default_strategy)};
    const std::string key_hash = crypto::sha256_hex(reg.api_key);
    {
      Transaction tx(db_);
      Statement(db_, "INSERT INTO apps(app_id, name, api_key_hash, strategy) VALUES (?, ?, ?, ?)")
          .bind(reg.app_id.value, reg.name, key_hash, to_string(reg.strategy))
          .run();
      tx.commit();
    }
    policy_.add_app(reg.app_id);
    std::unique_lock lock(apps_mutex_);
    apps_[reg.app_id] = {reg.name, reg.strategy};
    api_keys_[key_hash] = reg.app_id;
    return reg;
  }

  AppRegistration app(const AppId& id) const {
    std::shared_lock lock(apps_mutex_);
    auto it = apps_.find(id);
    if (it == apps_.end()) throw Error(ErrorCode::UnknownApp, id.value);
    return {id, it->second.name, "", it->second.strategy};
  }

  void grant_permission(std::string_view token, const AppId& app_id, const Grant& grant) {
    const UserId user = authenticate(token);
    (void)app(app_id);
    {
      Transaction tx(db_);
      Statement(db_,
                "INSERT INTO grants(user_id, app_id, allow_filtering, allow_others_to_share_me) VALUES (?, ?, ?, ?) "
                "ON CONFLICT(user_id, app_id) DO UPDATE SET allow_filtering = excluded.allow_filtering, "
                "allow_others_to_share_me = excluded.allow_others_to_share_me")
          .bind(user.value, app_id.value, grant.allow_filtering, grant.allow_others_to_share_me)
          .run();
      tx.commit();
    }
    policy_.set_share_consent(user, app_id, grant.allow_others_to_share_me);
    std::unique_lock lock(grants_mutex_);
    grants_[{user, app_id}] = grant;
  }

  std::optional<Grant> grant(const UserId& user, const AppId& app_id) const {
    std::shared_lock lock(grants_mutex_);
    auto it = grants_.find({user, app_id});
    if (it == grants_.end()) return std::nullopt;
    return it->second;
  }

  policy::PolicyList upsert_entry(std::string_view token, const AppId& app_id, policy::ListKind kind,
                                  std::string_view term) {
    return mutate_list(authenticate(token), app_id, kind, Term::make(term), true);
  }

  policy::PolicyList remove_entry(std::string_view token, const AppId& app_id, policy::ListKind kind,
                                  std::string_view term) {
    return mutate_list(authenticate(token), app_id, kind, Term::make(term), false);
  }

  policy::PolicyList list(std::string_view token, const AppId& app_id, policy::ListKind kind) {
    return policy_.list(authenticate(token), app_id, kind);
  }

  // App-originated call: the app presents its API key and names the sender.
  ServiceFilterResult filter_text(std::string_view api_key, const UserId& sender, std::string_view text,
                                  const policy::FilterScheme& scheme) {
    const AppId app_id = app_for_key(api_key);
    return run_filter(app_id, sender, text, scheme);
  }

  // Session-originated call used by the dashboard's try-it pane.
  ServiceFilterResult filter_text_as(std::string_view token, const AppId& app_id, std::string_view text,
                                     const policy::FilterScheme& scheme) {
    const UserId sender = authenticate(token);
    (void)app(app_id);
    return run_filter(app_id, sender, text, scheme);
  }

  ReportView get_reports(std::string_view token, const std::optional<AppId>& app_id, Timestamp since) {
    const UserId user = authenticate(token);
    ReportView view;
    std::lock_guard lock(db_.mutex());
    Statement own(db_,
                  "SELECT report_id, app_id, timestamp, total_masked, spans FROM reports "
                  "WHERE sender = ?1 AND timestamp >= ?2 AND (?3 = '' OR app_id = ?3) ORDER BY report_id");
    own.bind(user.value, detail::to_micros(since), app_id ? app_id->value : std::string());
    while (own.step()) {
      StoredReport r;
      r.report_id = own.integer(0);
      r.app = AppId{own.text(1)};
      r.sender = user;
      r.report.timestamp = detail::from_micros(own.integer(2));
      r.report.total_masked = static_cast<std::size_t>(own.integer(3));
      for (const auto& s : nlohmann::json::parse(own.text(4))) {
        r.report.spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), s.at(2).get<std::string>()});
      }
      Statement sources(db_, "SELECT source, count FROM report_sources WHERE report_id = ?");
      sources.bind(r.report_id);
      while (sources.step()) r.report.by_source[sources.text(0)] = static_cast<std::size_t>(sources.integer(1));
      view.reports.push_back(std::move(r));
    }

    Statement stubs(db_,
                    "SELECT r.report_id, r.app_id, r.timestamp, s.count FROM reports r "
                    "JOIN report_sources s ON s.report_id = r.report_id "
                    "WHERE s.source = ?1 AND r.sender <> ?2 AND r.timestamp >= ?3 AND (?4 = '' OR r.app_id = ?4) "
                    "ORDER BY r.report_id");
    stubs.bind("SRB:" + user.value, user.value, detail::to_micros(since), app_id ? app_id->value : std::string());
    while (stubs.step()) {
      view.notifications.push_back({stubs.integer(0), AppId{stubs.text(1)}, detail::from_micros(stubs.integer(2)),
                                    static_cast<std::size_t>(stubs.integer(3))});
    }
    return view;
  }

  std::vector<CategoryInfo> categories() {
    std::vector<CategoryInfo> out;
    for (vocab::CategoryId id : vocab::kAllCategories) {
      const auto c = registry_.get(id);
      out.push_back({id, c->terms.size(), c->source});
    }
    return out;
  }

 private:
  struct SessionEntry {
    UserId user;
    Timestamp expires_at{};
  };

  struct AppEntry {
    std::string name;
    MatchStrategy strategy = MatchStrategy::TrieKeywordProcessor;
  };

  void load() {
    std::lock_guard lock(db_.mutex());
    Statement users(db_, "SELECT user_id FROM users");
    while (users.step()) policy_.add_user(UserId{users.text(0)});

    Statement apps(db_, "SELECT app_id, name, api_key_hash, strategy FROM apps");
    while (apps.step()) {
      const AppId id{apps.text(0)};
      policy_.add_app(id);
      apps_[id] = {apps.text(1), parse_strategy(apps.text(3)).value_or(config_.default_strategy)};
      api_keys_[apps.text(2)] = id;
    }

    Statement grants(db_, "SELECT user_id, app_id, allow_filtering, allow_others_to_share_me FROM grants");
    while (grants.step()) {
      const UserId u{grants.text(0)};
      const AppId a{grants.text(1)};
      const Grant g{grants.integer(2) != 0, grants.integer(3) != 0};
      grants_[{u, a}] = g;
      policy_.set_share_consent(u, a, g.allow_others_to_share_me);
    }

    Statement lists(db_, "SELECT owner, app_id, kind, updated_at FROM lists");
    while (lists.step()) {
      policy::PolicyList list{UserId{lists.text(0)}, AppId{lists.text(1)},
                              policy::parse_list_kind(lists.text(2)).value_or(policy::ListKind::SRB),
                              {},
                              detail::from_micros(lists.integer(3))};
      Statement terms(db_, "SELECT surface FROM list_terms WHERE owner = ? AND app_id = ? AND kind = ?");
      terms.bind(list.owner.value, list.app.value, lists.text(2));
      while (terms.step()) list.terms.push_back(Term::make(terms.text(0)));
      policy_.restore_list(list);
    }
  }

  policy::PolicyList mutate_list(const UserId& owner, const AppId& app_id, policy::ListKind kind, const Term& term,
                                 bool insert) {
    Transaction tx(db_);
    const policy::PolicyList before = policy_.list(owner, app_id, kind);
    policy::PolicyList after = insert ? policy_.upsert_entry(owner, app_id, kind, term)
                                      : policy_.remove_entry(owner, app_id, kind, term);
    try {
      Statement(db_,
                "INSERT INTO lists(owner, app_id, kind, updated_at) VALUES (?, ?, ?, ?) "
                "ON CONFLICT(owner, app_id, kind) DO UPDATE SET updated_at = excluded.updated_at")
          .bind(owner.value, app_id.value, to_string(kind), detail::to_micros(after.updated_at))
          .run();
      if (insert) {
        Statement(db_,
                  "INSERT OR REPLACE INTO list_terms(owner, app_id, kind, normalized, surface) VALUES (?, ?, ?, ?, ?)")
            .bind(owner.value, app_id.value, to_string(kind), term.normalized(), term.surface())
            .run();
      } else {
        Statement(db_, "DELETE FROM list_terms WHERE owner = ? AND app_id = ? AND kind = ? AND normalized = ?")
            .bind(owner.value, app_id.value, to_string(kind), term.normalized())
            .run();
      }
      tx.commit();
    } catch (...) {
      policy_.restore_list(before);
      throw;
    }
    return after;
  }

  AppId app_for_key(std::string_view api_key) const {
    const std::string digest = crypto::sha256_hex(api_key);
    std::shared_lock lock(apps_mutex_);
    auto it = api_keys_.find(digest);
    if (it == api_keys_.end()) throw Error(ErrorCode::UnknownApiKey, "API key not recognized");
    return it->second;
  }

  ServiceFilterResult run_filter(const AppId& app_id, const UserId& sender, std::string_view text,
                                 const policy::FilterScheme& scheme) {
    const auto g = grant(sender, app_id);
    if (!g || !g->allow_filtering) {
      throw Error(ErrorCode::PermissionNotGranted, sender.value + " has not granted filtering for " + app_id.value);
    }
    if (text.size() > config_.max_text_bytes) {
      throw Error(ErrorCode::TextTooLarge, std::to_string(text.size()) + " bytes exceeds the limit of " +
                                               std::to_string(config_.max_text_bytes));
    }
    if (!unicode::is_valid_utf8(text)) throw Error(ErrorCode::InvalidEncoding, "text is not valid UTF-8");

    const auto effective = policy_.compile_effective(sender, app_id, scheme, registry_);
    filter::FilterResult result = filter::filter_text(effective, text, app(app_id).strategy);

    ServiceFilterResult out{std::move(result.filtered_text), {0, app_id, sender, std::move(result.report)}};
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& s : out.report.report.spans) spans.push_back({s.start, s.end, s.source});
    Transaction tx(db_);
    Statement(db_, "INSERT INTO reports(app_id, sender, timestamp, total_masked, spans) VALUES (?, ?, ?, ?, ?)")
        .bind(app_id.value, sender.value, detail::to_micros(out.report.report.timestamp),
              out.report.report.total_masked, spans.dump())
        .run();
    out.report.report_id = sqlite3_last_insert_rowid(db_.handle());
    for (const auto& [source, count] : out.report.report.by_source) {
      Statement(db_, "INSERT INTO report_sources(report_id, source, count) VALUES (?, ?, ?)")
          .bind(out.report.report_id, source, count)
          .run();
    }
    tx.commit();
    return out;
  }

  ServiceConfig config_;
  Database db_;
  policy::PolicyStore policy_;
  vocab::Registry registry_;
  PasswordRecord dummy_record_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, SessionEntry> sessions_;

  mutable std::shared_mutex apps_mutex_;
  std::map<AppId, AppEntry> apps_;
  std::map<std::string, AppId> api_keys_;

  mutable std::shared_mutex grants_mutex_;
  std::map<std::pair<UserId, AppId>, Grant> grants_;
};

}  // namespace idpf::service
