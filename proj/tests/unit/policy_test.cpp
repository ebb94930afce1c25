#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "idpf/filter.hpp"
#include "idpf/policy.hpp"

namespace idpf::policy {
namespace {

using vocab::CategoryId;

const AppId kAppA{"appA"};
const AppId kAppB{"appB"};
const UserId kAlice{"alice"};
const UserId kBob{"bob"};
const UserId kJack{"jack"};

class PolicyTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const auto& u : {kAlice, kBob, kJack}) store.add_user(u);
    store.add_app(kAppA);
    store.add_app(kAppB);
  }

  void add(const UserId& u, ListKind kind, std::string_view term, const AppId& app = kAppA) {
    store.upsert_entry(u, app, kind, Term::make(term));
  }

  EffectivePolicy effective(const UserId& sender, FilterScheme scheme = {}, const AppId& app = kAppA) {
    return store.compile_effective(sender, app, scheme, registry);
  }

  std::string filter(const UserId& sender, std::string_view text, FilterScheme scheme = {}) {
    return filter::filter_text(effective(sender, scheme), text).filtered_text;
  }

  PolicyStore store;
  vocab::Registry registry;
};

bool has_entry(const EffectivePolicy& p, std::string_view term, OwnerKind kind, const UserId& owner = {}) {
  for (const auto& e : p.blacklist) {
    if (e.term.normalized() == term && e.kind == kind && (kind != OwnerKind::User || e.owner == owner)) return true;
  }
  return false;
}

TEST_F(PolicyTest, UpsertAddsTermOnce) {
  add(kJack, ListKind::SRB, "jack@x.com");
  const auto list = store.upsert_entry(kJack, kAppA, ListKind::SRB, Term::make("JACK@x.com"));
  ASSERT_EQ(list.terms.size(), 1u);
  EXPECT_TRUE(list.contains("jack@x.com"));
}

TEST_F(PolicyTest, UpdatedAtStrictlyAdvances) {
  const auto a = store.upsert_entry(kAlice, kAppA, ListKind::ORB, Term::make("nick"));
  const auto b = store.upsert_entry(kAlice, kAppA, ListKind::ORB, Term::make("nick"));
  const auto c = store.remove_entry(kAlice, kAppA, ListKind::ORB, Term::make("nick"));
  EXPECT_LT(a.updated_at, b.updated_at);
  EXPECT_LT(b.updated_at, c.updated_at);
}

TEST_F(PolicyTest, UnknownOwnerOrAppIsRejected) {
  try {
    add(UserId{"mallory"}, ListKind::SRB, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownUser);
  }
  try {
    add(kAlice, ListKind::SRB, "x", AppId{"nope"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownApp);
  }
  EXPECT_THROW(effective(UserId{"mallory"}), Error);
}

TEST_F(PolicyTest, RemoveNonMemberIsNoOp) {
  add(kAlice, ListKind::SRB, "one");
  const auto before = store.list(kAlice, kAppA, ListKind::SRB);
  const auto after = store.remove_entry(kAlice, kAppA, ListKind::SRB, Term::make("two"));
  EXPECT_EQ(after.terms, before.terms);
  EXPECT_EQ(after.updated_at, before.updated_at);
}

TEST_F(PolicyTest, EffectiveBlacklistUnionsSourcesPerSender) {
  add(kJack, ListKind::SRB, "x");
  add(kAlice, ListKind::ORB, "y");
  FilterScheme names;
  names.categories = {CategoryId::Names};
  const auto for_alice = effective(kAlice, names);
  EXPECT_TRUE(has_entry(for_alice, "x", OwnerKind::User, kJack));
  EXPECT_TRUE(has_entry(for_alice, "y", OwnerKind::SenderOrb));
  EXPECT_TRUE(has_entry(for_alice, "smith", OwnerKind::System));
  EXPECT_EQ(for_alice.blacklist.size(), 802u);

  const auto for_bob = effective(kBob, names);
  EXPECT_TRUE(has_entry(for_bob, "x", OwnerKind::User, kJack));
  EXPECT_FALSE(has_entry(for_bob, "y", OwnerKind::SenderOrb));
}

TEST_F(PolicyTest, EmptyListsAndSchemeGiveEmptyBlacklist) { EXPECT_TRUE(effective(kAlice).blacklist.empty()); }

TEST_F(PolicyTest, SrbScopeIsPerApp) {
  add(kJack, ListKind::SRB, "x", kAppB);
  EXPECT_TRUE(effective(kAlice).blacklist.empty());
  EXPECT_EQ(filter(kAlice, "x marks"), "x marks");
}

TEST_F(PolicyTest, DedupKeepsHighestPriorityOwner) {
  FilterScheme names;
  names.categories = {CategoryId::Names};
  add(kAlice, ListKind::ORB, "Smith");
  auto p = effective(kAlice, names);
  EXPECT_TRUE(has_entry(p, "smith", OwnerKind::SenderOrb));
  EXPECT_FALSE(has_entry(p, "smith", OwnerKind::System));

  add(kJack, ListKind::SRB, "smith");
  add(kBob, ListKind::SRB, "smith");
  p = effective(kAlice, names);
  EXPECT_TRUE(has_entry(p, "smith", OwnerKind::User, kJack));
  EXPECT_TRUE(has_entry(p, "smith", OwnerKind::User, kBob));
  EXPECT_FALSE(has_entry(p, "smith", OwnerKind::SenderOrb));
  EXPECT_EQ(p.blacklist.size(), 801u);
}

TEST_F(PolicyTest, OwnerWhitelistPreservesOwnTerm) {
  add(kJack, ListKind::SRB, "x");
  add(kJack, ListKind::SRW, "x");
  EXPECT_EQ(filter(kAlice, "x"), "x");
  EXPECT_EQ(filter(kBob, "x"), "x");
}

TEST_F(PolicyTest, SenderWhitelistPreservesCategoryMatch) {
  FilterScheme names;
  names.categories = {CategoryId::Names};
  add(kAlice, ListKind::SRW, "smith");
  add(kBob, ListKind::SRW, "jones");
  EXPECT_EQ(filter(kAlice, "Smith and Jones", names), "Smith and [FILTERED]");
}

TEST_F(PolicyTest, SenderCannotWhitelistOthersProtectedTerm) {
  add(kJack, ListKind::SRB, "x");
  add(kAlice, ListKind::SRW, "x");
  EXPECT_EQ(filter(kAlice, "x"), "[FILTERED]");
}

TEST_F(PolicyTest, AnyMaskingOwnerMasksTheSpan) {
  add(kJack, ListKind::SRB, "x");
  add(kBob, ListKind::SRB, "x");
  add(kJack, ListKind::SRW, "x");
  const auto p = effective(kAlice);
  const auto r = filter::filter_text(p, "x");
  EXPECT_EQ(r.filtered_text, "[FILTERED]");
  EXPECT_EQ(r.report.by_source.at("SRB:bob"), 1u);
}

TEST_F(PolicyTest, StrictModeIgnoresOwnersWhitelist) {
  add(kJack, ListKind::SRB, "x");
  add(kJack, ListKind::SRW, "x");
  store.set_share_consent(kJack, kAppA, false);
  EXPECT_EQ(filter(kAlice, "x"), "[FILTERED]");
  store.set_share_consent(kJack, kAppA, true);
  EXPECT_EQ(filter(kAlice, "x"), "x");
}

TEST_F(PolicyTest, PhoneNumberScenario) {
  add(kJack, ListKind::SRB, "+36301234567");
  const auto r = filter::filter_text(effective(kAlice), "call jack at +36301234567");
  EXPECT_EQ(r.filtered_text, "call jack at [FILTERED]");
  EXPECT_EQ(r.report.total_masked, 1u);
  ASSERT_EQ(r.report.by_source.size(), 1u);
  EXPECT_EQ(r.report.by_source.at("SRB:jack"), 1u);
  ASSERT_EQ(r.report.spans.size(), 1u);
  EXPECT_EQ(r.report.spans[0], (filter::ReportSpan{13, 25, "SRB:jack"}));
}

TEST_F(PolicyTest, NumeralSchemeMasksDigitRuns) {
  FilterScheme numerals;
  numerals.categories = {CategoryId::Numerals};
  const auto r = filter::filter_text(effective(kAlice, numerals), "room 12");
  EXPECT_EQ(r.filtered_text, "room [FILTERED]");
  EXPECT_EQ(r.report.by_source.at("NUMERAL"), 1u);
  add(kAlice, ListKind::SRW, "12");
  EXPECT_EQ(filter(kAlice, "room 12 and 13", numerals), "room 12 and [FILTERED]");
}

TEST_F(PolicyTest, LinksSchemeMasksWholeUrl) {
  FilterScheme links;
  links.categories = {CategoryId::Links};
  const auto r = filter::filter_text(effective(kAlice, links), "see https://example.com/x today");
  EXPECT_EQ(r.filtered_text, "see [FILTERED] today");
  EXPECT_EQ(r.report.by_source.at("links"), 1u);
}

TEST_F(PolicyTest, EmptyTextGivesEmptyReport) {
  add(kJack, ListKind::SRB, "x");
  const auto r = filter::filter_text(effective(kAlice), "");
  EXPECT_EQ(r.filtered_text, "");
  EXPECT_EQ(r.report.total_masked, 0u);
  EXPECT_TRUE(r.report.spans.empty());
}

TEST_F(PolicyTest, CustomPlaceholder) {
  add(kJack, ListKind::SRB, "x");
  FilterScheme scheme;
  scheme.placeholder = "***";
  EXPECT_EQ(filter(kAlice, "a x b", scheme), "a *** b");
}

TEST_F(PolicyTest, ListFileRoundTrip) {
  add(kJack, ListKind::SRB, "Jack Smith");
  add(kJack, ListKind::SRB, "+36301234567");
  const auto list = store.list(kJack, kAppA, ListKind::SRB);
  const std::string text = export_list(list);
  EXPECT_EQ(text.rfind("# owner: jack\n# app: appA\n# kind: SRB\n", 0), 0u);
  const auto back = import_list(text);
  EXPECT_EQ(back.owner, kJack);
  EXPECT_EQ(back.app, kAppA);
  EXPECT_EQ(back.kind, ListKind::SRB);
  EXPECT_EQ(back.terms, list.terms);
}

TEST_F(PolicyTest, ListFileHeaderIsRequired) {
  try {
    (void)import_list("jack\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadHeader);
  }
  EXPECT_THROW((void)import_list("# owner: a\n# app: b\n# kind: XYZ\n"), Error);
}

TEST_F(PolicyTest, ListFileIsReadableAsTermFile) {
  add(kAlice, ListKind::ORB, "nick");
  const auto path = std::filesystem::temp_directory_path() / "idpf_orb_export.txt";
  std::ofstream(path) << export_list(store.list(kAlice, kAppA, ListKind::ORB));
  const auto terms = load_term_file(path);
  ASSERT_EQ(terms.size(), 1u);
  EXPECT_EQ(terms[0].normalized(), "nick");
  std::filesystem::remove(path);
}

TEST_F(PolicyTest, FreshnessAcrossMutations) {
  EXPECT_EQ(filter(kAlice, "x"), "x");
  add(kJack, ListKind::SRB, "x");
  EXPECT_EQ(filter(kAlice, "x"), "[FILTERED]");
  store.remove_entry(kJack, kAppA, ListKind::SRB, Term::make("x"));
  EXPECT_EQ(filter(kAlice, "x"), "x");
}

// Random list configurations over a small single-word vocabulary. Texts are
// space-separated vocabulary words, so every span is exactly one word and
// spans can be compared across configurations by position.
class RandomConfig {
 public:
  static constexpr int kUsers = 4;
  static constexpr int kWords = 10;

  explicit RandomConfig(std::uint64_t seed) : rng_(seed) {}

  static UserId user(int i) { return UserId{"u" + std::to_string(i)}; }
  static std::string word(int i) { return "w" + std::to_string(i); }

  void populate(PolicyStore& store) {
    for (int u = 0; u < kUsers; ++u) store.add_user(user(u));
    store.add_app(kAppA);
    std::bernoulli_distribution pick(0.2);
    for (int u = 0; u < kUsers; ++u) {
      for (ListKind kind : {ListKind::SRB, ListKind::ORB, ListKind::SRW}) {
        for (int w = 0; w < kWords; ++w) {
          if (pick(rng_)) store.upsert_entry(user(u), kAppA, kind, Term::make(word(w)));
        }
      }
      if (pick(rng_)) store.set_share_consent(user(u), kAppA, false);
    }
  }

  std::string text() {
    std::string out;
    for (int i = 0; i < 30; ++i) {
      if (i) out += ' ';
      out += word(std::uniform_int_distribution<int>(0, kWords - 1)(rng_));
    }
    return out;
  }

  int any_user() { return std::uniform_int_distribution<int>(0, kUsers - 1)(rng_); }
  int any_word() { return std::uniform_int_distribution<int>(0, kWords - 1)(rng_); }

 private:
  std::mt19937_64 rng_;
};

std::set<std::pair<std::size_t, std::size_t>> masked_positions(const Resolution& r) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& s : r.masked) out.emplace(s.start, s.end);
  return out;
}

std::set<std::pair<std::size_t, std::size_t>> preserved_positions(const Resolution& r) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& s : r.preserved) out.emplace(s.start, s.end);
  return out;
}

Resolution run(const PolicyStore& store, vocab::Registry& registry, const UserId& sender, const std::string& text) {
  const auto p = store.compile_effective(sender, kAppA, {}, registry);
  return resolve(p, filter::CompiledPolicy::compile(p, MatchStrategy::TrieKeywordProcessor).attribute(text));
}

constexpr int kPropertyCases = 200;

TEST(PolicyProperties, OrbLocality) {
  vocab::Registry registry;
  for (int c = 0; c < kPropertyCases; ++c) {
    RandomConfig cfg(1000 + c);
    PolicyStore store;
    cfg.populate(store);
    const int sender = cfg.any_user();
    const std::string text = cfg.text();
    const auto r = run(store, registry, RandomConfig::user(sender), text);
    for (const auto& s : r.masked) {
      const std::string w = text.substr(s.start, s.end - s.start);
      bool in_other_source = store.list(RandomConfig::user(sender), kAppA, ListKind::ORB).contains(w);
      for (int u = 0; u < RandomConfig::kUsers; ++u) {
        in_other_source = in_other_source || store.list(RandomConfig::user(u), kAppA, ListKind::SRB).contains(w);
      }
      EXPECT_TRUE(in_other_source) << "case " << c << " masked " << w;
    }
  }
}

TEST(PolicyProperties, PublicBlacklistReach) {
  vocab::Registry registry;
  for (int c = 0; c < kPropertyCases; ++c) {
    RandomConfig cfg(2000 + c);
    PolicyStore store;
    cfg.populate(store);
    const auto sender = RandomConfig::user(cfg.any_user());
    const std::string text = cfg.text();
    const auto r = run(store, registry, sender, text);
    const auto masked = masked_positions(r);
    for (int u = 0; u < RandomConfig::kUsers; ++u) {
      const auto owner = RandomConfig::user(u);
      if (owner == sender) continue;
      const bool strict = store.is_strict(owner, kAppA);
      for (const auto& t : store.list(owner, kAppA, ListKind::SRB).terms) {
        if (!strict && store.list(owner, kAppA, ListKind::SRW).contains(t.normalized())) continue;
        for (std::size_t pos = text.find(t.normalized()); pos != std::string::npos;
             pos = text.find(t.normalized(), pos + 1)) {
          const std::size_t end = pos + t.normalized().size();
          if ((pos > 0 && text[pos - 1] != ' ') || (end < text.size() && text[end] != ' ')) continue;
          EXPECT_TRUE(masked.contains({pos, end})) << "case " << c << " term " << t.normalized();
        }
      }
    }
  }
}

TEST(PolicyProperties, ResolvingEntryMatchesWhitelistState) {
  vocab::Registry registry;
  for (int c = 0; c < kPropertyCases; ++c) {
    RandomConfig cfg(3000 + c);
    PolicyStore store;
    cfg.populate(store);
    const auto sender = RandomConfig::user(cfg.any_user());
    const std::string text = cfg.text();
    const auto r = run(store, registry, sender, text);
    auto owner_whitelists = [&](const OwnedEntry& e) {
      const UserId& owner = e.kind == OwnerKind::User ? e.owner : sender;
      return !store.is_strict(owner, kAppA) && store.list(owner, kAppA, ListKind::SRW).contains(e.term.normalized());
    };
    for (const auto& s : r.masked) EXPECT_FALSE(owner_whitelists(s.entry)) << "case " << c;
    for (const auto& s : r.preserved) EXPECT_TRUE(owner_whitelists(s.entry)) << "case " << c;
  }
}

TEST(PolicyProperties, Monotonicity) {
  vocab::Registry registry;
  for (int c = 0; c < kPropertyCases; ++c) {
    RandomConfig cfg(4000 + c);
    PolicyStore store;
    cfg.populate(store);
    const auto sender = RandomConfig::user(cfg.any_user());
    const std::string text = cfg.text();
    const auto before = run(store, registry, sender, text);

    const auto owner = RandomConfig::user(cfg.any_user());
    const auto term = Term::make(RandomConfig::word(cfg.any_word()));
    const ListKind kind = c % 2 ? ListKind::SRB : ListKind::ORB;
    store.upsert_entry(owner, kAppA, kind, term);
    const auto more_black = masked_positions(run(store, registry, sender, text));
    for (const auto& pos : masked_positions(before)) EXPECT_TRUE(more_black.contains(pos)) << "case " << c;

    const auto mid = run(store, registry, sender, text);
    store.upsert_entry(RandomConfig::user(cfg.any_user()), kAppA, ListKind::SRW,
                       Term::make(RandomConfig::word(cfg.any_word())));
    const auto after = run(store, registry, sender, text);
    const auto still_preserved = preserved_positions(after);
    for (const auto& pos : preserved_positions(mid)) EXPECT_TRUE(still_preserved.contains(pos)) << "case " << c;
  }
}

}  // namespace
}  // namespace idpf::policy
