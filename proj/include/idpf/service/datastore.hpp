#pragma once

#include <sqlite3.h>

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idpf/error.hpp"

namespace idpf::service {

// Schema of the single-file store. Passwords are kept only as PBKDF2
// records, API keys only as SHA-256 digests, and reports only as offsets and
// counts; request text is never written.
inline constexpr std::string_view kSchema = R"sql(
CREATE TABLE IF NOT EXISTS users (
  user_id    TEXT PRIMARY KEY,
  username   TEXT NOT NULL UNIQUE,
  salt       BLOB NOT NULL,
  iterations INTEGER NOT NULL,
  hash       BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS apps (
  app_id       TEXT PRIMARY KEY,
  name         TEXT NOT NULL,
  api_key_hash TEXT NOT NULL UNIQUE,
  strategy     TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS grants (
  user_id                  TEXT NOT NULL REFERENCES users(user_id),
  app_id                   TEXT NOT NULL REFERENCES apps(app_id),
  allow_filtering          INTEGER NOT NULL,
  allow_others_to_share_me INTEGER NOT NULL,
  PRIMARY KEY (user_id, app_id)
);
CREATE TABLE IF NOT EXISTS lists (
  owner      TEXT NOT NULL REFERENCES users(user_id),
  app_id     TEXT NOT NULL REFERENCES apps(app_id),
  kind       TEXT NOT NULL,
  updated_at INTEGER NOT NULL,
  PRIMARY KEY (owner, app_id, kind)
);
CREATE TABLE IF NOT EXISTS list_terms (
  owner      TEXT NOT NULL,
  app_id     TEXT NOT NULL,
  kind       TEXT NOT NULL,
  normalized TEXT NOT NULL,
  surface    TEXT NOT NULL,
  PRIMARY KEY (owner, app_id, kind, normalized),
  FOREIGN KEY (owner, app_id, kind) REFERENCES lists(owner, app_id, kind)
);
CREATE TABLE IF NOT EXISTS reports (
  report_id    INTEGER PRIMARY KEY AUTOINCREMENT,
  app_id       TEXT NOT NULL REFERENCES apps(app_id),
  sender       TEXT NOT NULL REFERENCES users(user_id),
  timestamp    INTEGER NOT NULL,
  total_masked INTEGER NOT NULL,
  spans        TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS report_sources (
  report_id INTEGER NOT NULL REFERENCES reports(report_id),
  source    TEXT NOT NULL,
  count     INTEGER NOT NULL,
  PRIMARY KEY (report_id, source)
);
CREATE INDEX IF NOT EXISTS reports_by_sender ON reports(sender, timestamp);
CREATE INDEX IF NOT EXISTS report_sources_by_source ON report_sources(source);
)sql";

using Blob = std::span<const std::uint8_t>;

class Database {
 public:
  explicit Database(const std::filesystem::path& path) {
    if (sqlite3_open_v2(path.string().c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw Error(ErrorCode::Storage, "cannot open " + path.string() + ": " + msg);
    }
    exec("PRAGMA foreign_keys = ON; PRAGMA journal_mode = WAL; PRAGMA synchronous = NORMAL;");
    exec(kSchema);
  }

  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;
  ~Database() { sqlite3_close(db_); }

  void exec(std::string_view sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, std::string(sql).c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error(ErrorCode::Storage, msg);
    }
  }

  sqlite3* handle() const noexcept { return db_; }

  // Serializes access for multi-statement sequences and transactions.
  std::recursive_mutex& mutex() noexcept { return mutex_; }

 private:
  sqlite3* db_ = nullptr;
  std::recursive_mutex mutex_;
};

class Statement {
 public:
  Statement(Database& db, std::string_view sql) : db_(db.handle()) {
    if (sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::Storage, sqlite3_errmsg(db_));
    }
  }

  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement() { sqlite3_finalize(stmt_); }

  template <class... Args>
  Statement& bind(Args&&... args) {
    int i = 1;
    (bind_one(i++, std::forward<Args>(args)), ...);
    return *this;
  }

  // Advances to the next row; false when done.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) throw Error(ErrorCode::Storage, std::string("constraint: ") + sqlite3_errmsg(db_));
    throw Error(ErrorCode::Storage, sqlite3_errmsg(db_));
  }

  void run() {
    while (step()) {
    }
  }

  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }

  std::vector<std::uint8_t> blob(int col) const {
    const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt_, col));
    return p ? std::vector<std::uint8_t>(p, p + sqlite3_column_bytes(stmt_, col)) : std::vector<std::uint8_t>();
  }

 private:
  void bind_one(int i, std::string_view v) { check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT)); }
  void bind_one(int i, const std::string& v) { bind_one(i, std::string_view(v)); }
  void bind_one(int i, const char* v) { bind_one(i, std::string_view(v)); }
  void bind_one(int i, Blob v) { check(sqlite3_bind_blob(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT)); }
  void bind_one(int i, const std::vector<std::uint8_t>& v) { bind_one(i, Blob(v)); }
  void bind_one(int i, std::int64_t v) { check(sqlite3_bind_int64(stmt_, i, v)); }
  void bind_one(int i, int v) { bind_one(i, static_cast<std::int64_t>(v)); }
  void bind_one(int i, std::uint32_t v) { bind_one(i, static_cast<std::int64_t>(v)); }
  void bind_one(int i, std::size_t v) { bind_one(i, static_cast<std::int64_t>(v)); }
  void bind_one(int i, bool v) { bind_one(i, static_cast<std::int64_t>(v ? 1 : 0)); }

  void check(int rc) const {
    if (rc != SQLITE_OK) throw Error(ErrorCode::Storage, sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

// BEGIN IMMEDIATE ... COMMIT, rolled back if the scope exits by exception.
class Transaction {
 public:
  explicit Transaction(Database& db) : db_(db), lock_(db.mutex()) { db_.exec("BEGIN IMMEDIATE"); }
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  void commit() {
    db_.exec("COMMIT");
    done_ = true;
  }

  ~Transaction() {
    if (!done_) sqlite3_exec(db_.handle(), "ROLLBACK", nullptr, nullptr, nullptr);
  }

 private:
  Database& db_;
  std::unique_lock<std::recursive_mutex> lock_;
  bool done_ = false;
};

}  // namespace idpf::service
