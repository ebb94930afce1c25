#pragma once

#include <algorithm>
#include <chrono>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "idpf/error.hpp"
#include "idpf/match/mask.hpp"
#include "idpf/term.hpp"
#include "idpf/vocab.hpp"

namespace idpf::policy {

template <class Tag>
struct Id {
  std::string value;
  friend auto operator<=>(const Id&, const Id&) = default;
};
using UserId = Id<struct UserTag>;
using AppId = Id<struct AppTag>;

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

inline Timestamp now() { return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now()); }

enum class ListKind { SRB, ORB, SRW };

constexpr std::string_view to_string(ListKind k) {
  switch (k) {
    case ListKind::SRB: return "SRB";
    case ListKind::ORB: return "ORB";
    case ListKind::SRW: return "SRW";
  }
  return "SRB";
}

inline std::optional<ListKind> parse_list_kind(std::string_view s) {
  if (s == "SRB" || s == "srb") return ListKind::SRB;
  if (s == "ORB" || s == "orb") return ListKind::ORB;
  if (s == "SRW" || s == "srw") return ListKind::SRW;
  return std::nullopt;
}

struct PolicyList {
  UserId owner;
  AppId app;
  ListKind kind = ListKind::SRB;
  // Ordered by normalized form, one entry per normalized form.
  std::vector<Term> terms;
  Timestamp updated_at{};

  bool contains(std::string_view normalized) const {
    return std::any_of(terms.begin(), terms.end(), [&](const Term& t) { return t.normalized() == normalized; });
  }
};

struct FilterScheme {
  std::set<vocab::CategoryId> categories;
  bool numerals = false;
  std::string placeholder = std::string(kDefaultPlaceholder);

  bool numerals_enabled() const { return numerals || categories.contains(vocab::CategoryId::Numerals); }
};

// Who a blacklist entry protects. User entries come from that user's SRB,
// SenderOrb from the sender's own ORB, System from a selected category (or
// a pattern: digit runs, link prefixes).
enum class OwnerKind { User, SenderOrb, System };

struct OwnedEntry {
  Term term;
  OwnerKind kind = OwnerKind::System;
  UserId owner;                               // set when kind == User
  std::optional<vocab::CategoryId> category;  // set when kind == System
};

inline std::string source_label(const OwnedEntry& e) {
  switch (e.kind) {
    case OwnerKind::User: return "SRB:" + e.owner.value;
    case OwnerKind::SenderOrb: return "ORB";
    case OwnerKind::System:
      if (e.category == vocab::CategoryId::Numerals) return "NUMERAL";
      return std::string(vocab::to_string(e.category.value_or(vocab::CategoryId::Names)));
  }
  return "";
}

struct EffectivePolicy {
  AppId app;
  UserId sender;
  // Deduplicated by normalized term; when a term has several sources only the
  // highest-priority kind survives (User > SenderOrb > System). Several users
  // may own the same term.
  std::vector<OwnedEntry> blacklist;
  std::set<std::string> sender_whitelist;
  std::map<UserId, std::set<std::string>> per_owner_whitelists;
  FilterScheme scheme;
};

// A located match with every blacklist entry whose term it matched.
struct AttributedSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<OwnedEntry> entries;
};

// `entry` is the entry that decided the outcome: the first masking entry for
// a masked span, the first entry for a preserved one.
struct ResolvedSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  OwnedEntry entry;
};

struct Resolution {
  std::vector<ResolvedSpan> masked;
  std::vector<ResolvedSpan> preserved;
};

inline bool whitelisted(const EffectivePolicy& policy, const OwnedEntry& entry) {
  const std::string& key = entry.term.normalized();
  if (entry.kind == OwnerKind::User) {
    auto it = policy.per_owner_whitelists.find(entry.owner);
    return it != policy.per_owner_whitelists.end() && it->second.contains(key);
  }
  return policy.sender_whitelist.contains(key);
}

// An owner's SRW only overrides matches on that owner's SRB entries; the
// sender's SRW overrides category and own-ORB matches. A span is masked if
// any of its entries is not whitelisted.
inline Resolution resolve(const EffectivePolicy& policy, const std::vector<AttributedSpan>& spans) {
  Resolution out;
  for (const auto& span : spans) {
    if (span.entries.empty()) continue;
    const OwnedEntry* masking = nullptr;
    for (const auto& e : span.entries) {
      if (!whitelisted(policy, e)) {
        masking = &e;
        break;
      }
    }
    if (masking) {
      out.masked.push_back({span.start, span.end, *masking});
    } else {
      out.preserved.push_back({span.start, span.end, span.entries.front()});
    }
  }
  return out;
}

// The Interdependent Privacy Settings Collector's state: one SRB, ORB and SRW
// per (user, app), plus each user's per-app consent to being shared. Writers
// are serialized; readers get a consistent snapshot.
class PolicyStore {
 public:
  void add_user(const UserId& user) {
    std::unique_lock lock(mutex_);
    users_.insert(user);
  }

  void add_app(const AppId& app) {
    std::unique_lock lock(mutex_);
    apps_.insert(app);
  }

  bool has_user(const UserId& user) const {
    std::shared_lock lock(mutex_);
    return users_.contains(user);
  }

  bool has_app(const AppId& app) const {
    std::shared_lock lock(mutex_);
    return apps_.contains(app);
  }

  PolicyList upsert_entry(const UserId& owner, const AppId& app, ListKind kind, const Term& term) {
    std::unique_lock lock(mutex_);
    require_known(owner, app);
    auto& list = lists_[{owner, app, kind}];
    list.terms.insert_or_assign(term.normalized(), term);
    touch(list);
    return snapshot(owner, app, kind, list);
  }

  PolicyList remove_entry(const UserId& owner, const AppId& app, ListKind kind, const Term& term) {
    std::unique_lock lock(mutex_);
    require_known(owner, app);
    auto& list = lists_[{owner, app, kind}];
    if (list.terms.erase(term.normalized())) touch(list);
    return snapshot(owner, app, kind, list);
  }

  PolicyList list(const UserId& owner, const AppId& app, ListKind kind) const {
    std::shared_lock lock(mutex_);
    require_known(owner, app);
    auto it = lists_.find({owner, app, kind});
    if (it == lists_.end()) return PolicyList{owner, app, kind, {}, {}};
    return snapshot(owner, app, kind, it->second);
  }

  // Replaces a list wholesale, keeping its timestamp (used when restoring
  // persisted state).
  void restore_list(const PolicyList& list) {
    std::unique_lock lock(mutex_);
    users_.insert(list.owner);
    apps_.insert(list.app);
    auto& stored = lists_[{list.owner, list.app, list.kind}];
    stored.terms.clear();
    for (const auto& t : list.terms) stored.terms.insert_or_assign(t.normalized(), t);
    stored.updated_at = list.updated_at;
  }

  std::vector<PolicyList> all_lists() const {
    std::shared_lock lock(mutex_);
    std::vector<PolicyList> out;
    for (const auto& [key, list] : lists_) {
      const auto& [owner, app, kind] = key;
      out.push_back(snapshot(owner, app, kind, list));
    }
    return out;
  }

  // allow_others_to_share_me == false puts the owner in strict mode for this
  // app: their SRW is ignored during resolution.
  void set_share_consent(const UserId& owner, const AppId& app, bool allow_others_to_share_me) {
    std::unique_lock lock(mutex_);
    if (allow_others_to_share_me) {
      strict_.erase({owner, app});
    } else {
      strict_.insert({owner, app});
    }
  }

  bool is_strict(const UserId& owner, const AppId& app) const {
    std::shared_lock lock(mutex_);
    return strict_.contains({owner, app});
  }

  EffectivePolicy compile_effective(const UserId& sender, const AppId& app, const FilterScheme& scheme,
                                    vocab::Registry& categories) const {
    // Category terms are fetched before taking the lock; the registry has its
    // own synchronization.
    std::vector<std::shared_ptr<const vocab::VocabularyCategory>> selected;
    for (vocab::CategoryId id : scheme.categories) {
      if (id != vocab::CategoryId::Numerals) selected.push_back(categories.get(id));
    }

    std::shared_lock lock(mutex_);
    require_known(sender, app);
    EffectivePolicy policy;
    policy.app = app;
    policy.sender = sender;
    policy.scheme = scheme;

    // normalized term -> entries, keeping only the highest-priority kind.
    std::map<std::string, std::vector<OwnedEntry>> by_term;
    auto offer = [&](OwnedEntry entry) {
      auto& slot = by_term[entry.term.normalized()];
      if (!slot.empty() && slot.front().kind < entry.kind) return;
      if (!slot.empty() && entry.kind < slot.front().kind) slot.clear();
      if (entry.kind == OwnerKind::System && !slot.empty()) return;
      slot.push_back(std::move(entry));
    };

    for (const auto& [key, list] : lists_) {
      const auto& [owner, list_app, kind] = key;
      if (list_app != app) continue;
      if (kind == ListKind::SRB) {
        for (const auto& [norm, term] : list.terms) offer({term, OwnerKind::User, owner, std::nullopt});
      } else if (kind == ListKind::ORB && owner == sender) {
        for (const auto& [norm, term] : list.terms) offer({term, OwnerKind::SenderOrb, {}, std::nullopt});
      } else if (kind == ListKind::SRW && !strict_.contains({owner, app})) {
        auto& wl = policy.per_owner_whitelists[owner];
        for (const auto& [norm, term] : list.terms) wl.insert(norm);
        if (owner == sender) policy.sender_whitelist = wl;
      }
    }
    for (const auto& category : selected) {
      for (const auto& term : category->terms) offer({term, OwnerKind::System, {}, category->id});
    }
    for (auto& [norm, entries] : by_term) {
      for (auto& e : entries) policy.blacklist.push_back(std::move(e));
    }
    return policy;
  }

 private:
  using Key = std::tuple<UserId, AppId, ListKind>;

  struct StoredList {
    std::map<std::string, Term> terms;
    Timestamp updated_at{};
  };

  void require_known(const UserId& owner, const AppId& app) const {
    if (!users_.contains(owner)) throw Error(ErrorCode::UnknownUser, owner.value);
    if (!apps_.contains(app)) throw Error(ErrorCode::UnknownApp, app.value);
  }

  static void touch(StoredList& list) {
    const Timestamp t = now();
    list.updated_at = std::max(t, list.updated_at + std::chrono::microseconds(1));
  }

  static PolicyList snapshot(const UserId& owner, const AppId& app, ListKind kind, const StoredList& list) {
    PolicyList out{owner, app, kind, {}, list.updated_at};
    out.terms.reserve(list.terms.size());
    for (const auto& [norm, term] : list.terms) out.terms.push_back(term);
    return out;
  }

  mutable std::shared_mutex mutex_;
  std::set<UserId> users_;
  std::set<AppId> apps_;
  std::map<Key, StoredList> lists_;
  std::set<std::pair<UserId, AppId>> strict_;
};

// List files: a three-line '#' header naming owner, app and kind, then one
// term per line. The header lines are comments to a plain term-file reader.
inline std::string export_list(const PolicyList& list) {
  std::ostringstream out;
  out << "# owner: " << list.owner.value << "\n# app: " << list.app.value << "\n# kind: " << to_string(list.kind)
      << "\n";
  for (const auto& t : list.terms) out << t.surface() << "\n";
  return out.str();
}

inline PolicyList import_list(std::string_view content) {
  PolicyList list;
  std::istringstream in{std::string(content)};
  std::string line;
  auto header = [&](std::string_view field) {
    if (!std::getline(in, line)) throw Error(ErrorCode::BadHeader, "missing list header line");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string prefix = "# " + std::string(field) + ": ";
    if (line.rfind(prefix, 0) != 0) throw Error(ErrorCode::BadHeader, "expected '" + prefix + "'");
    return line.substr(prefix.size());
  };
  list.owner = UserId{header("owner")};
  list.app = AppId{header("app")};
  const auto kind = parse_list_kind(header("kind"));
  if (!kind) throw Error(ErrorCode::BadHeader, "unknown list kind");
  list.kind = *kind;
  std::map<std::string, Term> terms;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    Term t = Term::make(line);
    terms.insert_or_assign(t.normalized(), std::move(t));
  }
  for (auto& [norm, t] : terms) list.terms.push_back(std::move(t));
  return list;
}

}  // namespace idpf::policy
