#pragma once

#include <boost/tokenizer.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "idpf/error.hpp"
#include "idpf/unicode.hpp"

namespace idpf::audit {

enum class Platform { Android, Firefox, Opera, Workspace, Zoom };
enum class PermissionClass { IDP, PIDP, NIDP };

inline constexpr std::array<Platform, 5> kAllPlatforms = {Platform::Android, Platform::Firefox, Platform::Opera,
                                                          Platform::Workspace, Platform::Zoom};

constexpr std::string_view to_string(Platform p) {
  switch (p) {
    case Platform::Android: return "android";
    case Platform::Firefox: return "firefox";
    case Platform::Opera: return "opera";
    case Platform::Workspace: return "workspace";
    case Platform::Zoom: return "zoom";
  }
  return "android";
}

constexpr std::string_view to_string(PermissionClass c) {
  switch (c) {
    case PermissionClass::IDP: return "IDP";
    case PermissionClass::PIDP: return "PIDP";
    case PermissionClass::NIDP: return "NIDP";
  }
  return "NIDP";
}

inline std::optional<Platform> parse_platform(std::string_view s) {
  for (Platform p : kAllPlatforms) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline std::filesystem::path default_mapping_path() {
  if (const char* env = std::getenv("IDPF_DATA_DIR"); env && *env) {
    return std::filesystem::path(env) / "mapping" / "permission_classes.toml";
  }
#ifdef IDPF_DATA_DIR
  return std::filesystem::path(IDPF_DATA_DIR) / "mapping" / "permission_classes.toml";
#else
  return "data/mapping/permission_classes.toml";
#endif
}

// Permission string -> class per platform. Zoom strings are keyed with their
// scope prefix ("view:Settings", "manage:Participants").
class PermissionMapping {
 public:
  static PermissionMapping load(const std::filesystem::path& path = default_mapping_path()) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::FileNotFound, path.string());
    std::ifstream in(path, std::ios::binary);
    std::stringstream content;
    content << in.rdbuf();
    return parse(content.str(), path.string());
  }

  static PermissionMapping parse(std::string_view text, std::string_view source = "<mapping>") {
    toml::table root;
    try {
      root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
      throw Error(ErrorCode::BadMapping, std::string(e.description()));
    }
    PermissionMapping m;
    const auto version = root["version"].value<std::string>();
    if (!version) throw Error(ErrorCode::BadMapping, "missing version");
    m.version_ = *version;
    for (Platform p : kAllPlatforms) {
      if (p == Platform::Zoom) {
        for (std::string_view scope : {"view", "manage"}) {
          m.read_table(p, root["zoom"][scope].as_table(), std::string(scope) + ":");
        }
      } else {
        m.read_table(p, root[to_string(p)].as_table(), "");
      }
    }
    return m;
  }

  const std::string& version() const noexcept { return version_; }

  bool contains(Platform p, std::string_view permission) const {
    return classes_.contains({p, std::string(permission)});
  }

  // Unknown strings are NIDP; each is logged once.
  PermissionClass classify(Platform p, std::string_view permission) const {
    auto it = classes_.find({p, std::string(permission)});
    if (it != classes_.end()) return it->second;
    std::lock_guard lock(unknown_mutex_);
    if (unknown_.insert({p, std::string(permission)}).second) {
      spdlog::warn("unknown {} permission \"{}\" classified as NIDP", to_string(p), permission);
    }
    return PermissionClass::NIDP;
  }

  std::vector<std::string> unknown_seen(Platform p) const {
    std::lock_guard lock(unknown_mutex_);
    std::vector<std::string> out;
    for (const auto& [plat, perm] : unknown_) {
      if (plat == p) out.push_back(perm);
    }
    return out;
  }

  std::size_t size() const noexcept { return classes_.size(); }

  PermissionMapping() = default;
  PermissionMapping(const PermissionMapping& o) : version_(o.version_), classes_(o.classes_) {}
  PermissionMapping& operator=(const PermissionMapping& o) {
    version_ = o.version_;
    classes_ = o.classes_;
    return *this;
  }

 private:
  void read_table(Platform p, const toml::table* table, const std::string& prefix) {
    if (!table) throw Error(ErrorCode::BadMapping, "missing table for " + std::string(to_string(p)) + " " + prefix);
    static constexpr std::pair<std::string_view, PermissionClass> kColumns[] = {
        {"idp", PermissionClass::IDP}, {"pidp", PermissionClass::PIDP}, {"nidp", PermissionClass::NIDP}};
    for (const auto& [column, cls] : kColumns) {
      const auto* arr = (*table)[column].as_array();
      if (!arr) continue;
      for (const auto& node : *arr) {
        const auto value = node.value<std::string>();
        if (!value) throw Error(ErrorCode::BadMapping, "non-string entry in " + std::string(column));
        const auto [it, inserted] = classes_.emplace(std::pair{p, prefix + *value}, cls);
        if (!inserted && it->second != cls) {
          throw Error(ErrorCode::BadMapping, std::string(to_string(p)) + " permission \"" + prefix + *value +
                                                 "\" listed as both " + std::string(to_string(it->second)) + " and " +
                                                 std::string(to_string(cls)));
        }
      }
    }
  }

  std::string version_;
  std::map<std::pair<Platform, std::string>, PermissionClass> classes_;
  mutable std::mutex unknown_mutex_;
  mutable std::set<std::pair<Platform, std::string>> unknown_;
};

struct AppRecord {
  Platform platform = Platform::Android;
  std::string name;
  std::string category;
  // Distinct permission strings in the order first listed.
  std::vector<std::string> permissions;
  std::optional<std::uint64_t> users;
  std::optional<double> rating;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct Dataset {
  std::vector<AppRecord> records;
  std::vector<RowError> errors;
};

inline constexpr std::array<std::string_view, 5> kRequiredColumns = {"name", "category", "permissions", "users",
                                                                     "rating"};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  Tokenizer tok(line, boost::escaped_list_separator<char>('\0', ',', '"'));
  return {tok.begin(), tok.end()};
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// CSV with header columns name, category, permissions (';'-separated),
// users, rating in any order; extra columns are ignored. Rows that cannot be
// read are reported in `errors` with their line number.
inline Dataset parse_dataset(std::istream& in, Platform platform) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadHeader, "empty file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::map<std::string_view, std::size_t> column;
  std::vector<std::string> header;
  try {
    header = detail::split_csv_line(line);
  } catch (const boost::escaped_list_error& e) {
    throw Error(ErrorCode::BadHeader, e.what());
  }
  for (std::size_t i = 0; i < header.size(); ++i) header[i] = std::string(detail::trim(header[i]));
  for (std::string_view required : kRequiredColumns) {
    auto it = std::find(header.begin(), header.end(), required);
    if (it == header.end()) throw Error(ErrorCode::BadHeader, "missing column \"" + std::string(required) + "\"");
    column[required] = static_cast<std::size_t>(it - header.begin());
  }

  Dataset out;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fail = [&](std::string message) { out.errors.push_back({line_no, std::move(message)}); };
    if (!unicode::is_valid_utf8(line)) {
      fail("invalid UTF-8");
      continue;
    }
    std::vector<std::string> fields;
    try {
      fields = detail::split_csv_line(line);
    } catch (const boost::escaped_list_error& e) {
      fail(e.what());
      continue;
    }
    if (fields.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    AppRecord r;
    r.platform = platform;
    r.name = std::string(detail::trim(fields[column["name"]]));
    r.category = std::string(detail::trim(fields[column["category"]]));
    std::set<std::string> seen;
    std::string_view perms = fields[column["permissions"]];
    while (!perms.empty()) {
      const std::size_t cut = perms.find(';');
      const std::string p(detail::trim(perms.substr(0, cut)));
      if (!p.empty() && seen.insert(p).second) r.permissions.push_back(p);
      if (cut == std::string_view::npos) break;
      perms.remove_prefix(cut + 1);
    }
    const std::string_view users = detail::trim(fields[column["users"]]);
    if (!users.empty()) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(users.data(), users.data() + users.size(), v);
      if (ec != std::errc() || ptr != users.data() + users.size()) {
        fail("users is not a count: \"" + std::string(users) + "\"");
        continue;
      }
      r.users = v;
    }
    const std::string_view rating = detail::trim(fields[column["rating"]]);
    if (!rating.empty()) {
      double v = 0;
      const auto [ptr, ec] = std::from_chars(rating.data(), rating.data() + rating.size(), v);
      if (ec != std::errc() || ptr != rating.data() + rating.size()) {
        fail("rating is not a number: \"" + std::string(rating) + "\"");
        continue;
      }
      r.rating = v;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

inline Dataset load_dataset(const std::filesystem::path& path, Platform platform) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return parse_dataset(in, platform);
}

struct PlatformSummary {
  std::size_t total_apps = 0;
  std::size_t apps_with_idp = 0;
  std::size_t apps_with_pidp = 0;
  std::size_t apps_with_either = 0;
  double ratio_either = 0;
  double mean_idp_pidp_per_app = 0;
  double mean_total_per_app = 0;
  // mean_idp_pidp_per_app / mean_total_per_app; 0 when no permissions at all.
  double proportion = 0;
};

inline PlatformSummary summarize(const std::vector<AppRecord>& records, const PermissionMapping& mapping) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no app records");
  PlatformSummary s;
  s.total_apps = records.size();
  std::size_t idp_pidp = 0;
  std::size_t total = 0;
  for (const auto& r : records) {
    bool has_idp = false;
    bool has_pidp = false;
    for (const auto& p : r.permissions) {
      const auto c = mapping.classify(r.platform, p);
      has_idp = has_idp || c == PermissionClass::IDP;
      has_pidp = has_pidp || c == PermissionClass::PIDP;
      if (c != PermissionClass::NIDP) ++idp_pidp;
    }
    total += r.permissions.size();
    s.apps_with_idp += has_idp;
    s.apps_with_pidp += has_pidp;
    s.apps_with_either += has_idp || has_pidp;
  }
  const auto n = static_cast<double>(s.total_apps);
  s.ratio_either = static_cast<double>(s.apps_with_either) / n;
  s.mean_idp_pidp_per_app = static_cast<double>(idp_pidp) / n;
  s.mean_total_per_app = static_cast<double>(total) / n;
  s.proportion = total ? static_cast<double>(idp_pidp) / static_cast<double>(total) : 0.0;
  return s;
}

struct CategoryStats {
  std::size_t apps = 0;
  double mean_total = 0;
  double mean_idp_pidp = 0;
  // Per-app IDP/PIDP permission count -> number of apps.
  std::map<std::size_t, std::size_t> histogram;
};

// Keyed by category label, so iteration is alphabetical.
inline std::map<std::string, CategoryStats> category_histogram(const std::vector<AppRecord>& records,
                                                               const PermissionMapping& mapping) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no app records");
  std::map<std::string, CategoryStats> out;
  std::map<std::string, std::pair<std::size_t, std::size_t>> sums;
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(std::count_if(r.permissions.begin(), r.permissions.end(), [&](const auto& p) {
      return mapping.classify(r.platform, p) != PermissionClass::NIDP;
    }));
    auto& stats = out[r.category];
    ++stats.apps;
    ++stats.histogram[k];
    sums[r.category].first += r.permissions.size();
    sums[r.category].second += k;
  }
  for (auto& [category, stats] : out) {
    stats.mean_total = static_cast<double>(sums[category].first) / static_cast<double>(stats.apps);
    stats.mean_idp_pidp = static_cast<double>(sums[category].second) / static_cast<double>(stats.apps);
  }
  return out;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Long format, one row per (category, per-app IDP/PIDP count).
inline std::string histogram_csv(const std::map<std::string, CategoryStats>& hist) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "category,apps,mean_total,mean_idp_pidp,idp_pidp_count,apps_with_count\n";
  for (const auto& [category, stats] : hist) {
    for (const auto& [count, apps] : stats.histogram) {
      out << detail::csv_field(category) << ',' << stats.apps << ',' << stats.mean_total << ',' << stats.mean_idp_pidp
          << ',' << count << ',' << apps << '\n';
    }
  }
  return out.str();
}

// summary.json document written by `idp-audit summarize`.
inline nlohmann::json summary_json(Platform platform, const PlatformSummary& s, const PermissionMapping& mapping,
                                   const std::vector<RowError>& errors = {}) {
  nlohmann::json malformed = nlohmann::json::array();
  for (const auto& e : errors) malformed.push_back({{"line", e.line}, {"message", e.message}});
  return {{"platform", to_string(platform)},
          {"mapping_version", mapping.version()},
          {"total_apps", s.total_apps},
          {"apps_with_idp", s.apps_with_idp},
          {"apps_with_pidp", s.apps_with_pidp},
          {"apps_with_either", s.apps_with_either},
          {"ratio_either", s.ratio_either},
          {"mean_idp_pidp_per_app", s.mean_idp_pidp_per_app},
          {"mean_total_per_app", s.mean_total_per_app},
          {"proportion", s.proportion},
          {"unknown_permissions", mapping.unknown_seen(platform)},
          {"malformed_rows", malformed}};
}

}  // namespace idpf::audit
