#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <vector>

#include "idpf/filter.hpp"
#include "idpf/service/service.hpp"
#include "service_fixture.hpp"

namespace idpf::service {
namespace {

using idpf::testing::TempDb;
using idpf::testing::test_config;
using policy::ListKind;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Storage;
}

TEST(Pbkdf2, MatchesReferenceVectors) {
  auto hex = [](std::string_view p, std::string_view s, std::uint32_t c) {
    const std::vector<std::uint8_t> salt(s.begin(), s.end());
    return crypto::to_hex(crypto::pbkdf2_sha256(p, salt, c));
  };
  EXPECT_EQ(hex("passwd", "salt", 1), "55ac046e56e3089fec1691c22544b605f94185216dde0465e68b9d57c20dacbc");
  EXPECT_EQ(hex("password", "salt", 4096), "c5e478d59288c841aa530db6845c4c8d962893a001ce4e11a4963873aa98134a");
  EXPECT_EQ(hex("Password", "NaCl", 80000), "4ddcd8f60b98be21830cee5ef22701f9641a4418d04c0414aeff08876b34ab56");
}

TEST(Pbkdf2, RecordVerifiesOnlyItsPassword) {
  const auto r = make_password_record("correcthorse", 1000);
  EXPECT_EQ(r.salt.size(), 16u);
  EXPECT_EQ(r.hash.size(), 32u);
  EXPECT_TRUE(verify_password("correcthorse", r));
  EXPECT_FALSE(verify_password("correcthorsf", r));
  EXPECT_FALSE(verify_password("", r));
}

class ServiceTest : public ::testing::Test {
 protected:
  TempDb db;
  std::unique_ptr<FilterService> svc = std::make_unique<FilterService>(test_config(db.path()));

  void restart() {
    svc.reset();
    svc = std::make_unique<FilterService>(test_config(db.path()));
  }

  std::string user_token(std::string_view name) {
    svc->register_user(name, "correcthorse");
    return svc->login(name, "correcthorse").token;
  }
};

TEST_F(ServiceTest, RegisterUserStoresPbkdf2Record) {
  const UserId alice = svc->register_user("alice", "correcthorse");
  const UserId bob = svc->register_user("bob", "correcthorse");
  EXPECT_NE(alice, bob);

  Database raw(db.path());
  Statement q(raw, "SELECT salt, iterations, hash FROM users ORDER BY username");
  std::vector<std::vector<std::uint8_t>> salts;
  while (q.step()) {
    const PasswordRecord r{q.blob(0), static_cast<std::uint32_t>(q.integer(1)), q.blob(2)};
    EXPECT_EQ(r.salt.size(), 16u);
    EXPECT_EQ(r.iterations, 1000u);
    EXPECT_EQ(r.hash, crypto::pbkdf2_sha256("correcthorse", r.salt, r.iterations));
    salts.push_back(r.salt);
  }
  ASSERT_EQ(salts.size(), 2u);
  EXPECT_NE(salts[0], salts[1]);
}

TEST_F(ServiceTest, RegistrationErrors) {
  svc->register_user("alice", "correcthorse");
  EXPECT_EQ(code_of([&] { svc->register_user("alice", "another-pass"); }), ErrorCode::UsernameTaken);
  EXPECT_EQ(code_of([&] { svc->register_user("bob", "x"); }), ErrorCode::WeakPassword);
  EXPECT_EQ(code_of([&] { svc->register_user("bob", "1234567"); }), ErrorCode::WeakPassword);
  EXPECT_EQ(code_of([&] { svc->register_user("", "correcthorse"); }), ErrorCode::BadRequest);
}

TEST_F(ServiceTest, LoginIssuesRandomTokens) {
  svc->register_user("alice", "correcthorse");
  const auto a = svc->login("alice", "correcthorse");
  const auto b = svc->login("alice", "correcthorse");
  EXPECT_EQ(a.token.size(), 32u);
  EXPECT_NE(a.token, b.token);
  EXPECT_EQ(svc->authenticate(a.token), a.user);
  EXPECT_GT(a.expires_at, policy::now() + std::chrono::hours(23));
}

TEST_F(ServiceTest, BadCredentialsAreIndistinguishable) {
  svc->register_user("alice", "correcthorse");
  std::string wrong, unknown;
  try {
    svc->login("alice", "wrong-password");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCredentials);
    wrong = e.detail();
  }
  try {
    svc->login("nobody", "wrong-password");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCredentials);
    unknown = e.detail();
  }
  EXPECT_FALSE(wrong.empty());
  EXPECT_EQ(wrong, unknown);
  EXPECT_EQ(code_of([&] { svc->authenticate("deadbeef"); }), ErrorCode::InvalidSession);
}

TEST(ServiceTiming, UnknownUserPathTakesAsLongAsWrongPassword) {
  TempDb db;
  FilterService svc(test_config(db.path(), 20000));
  svc.register_user("alice", "correcthorse");
  auto median_ms = [&](std::string_view user) {
    std::vector<double> samples;
    for (int i = 0; i < 15; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        svc.login(user, "wrong-password");
      } catch (const Error&) {
      }
      samples.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::nth_element(samples.begin(), samples.begin() + 7, samples.end());
    return samples[7];
  };
  (void)median_ms("alice");
  const double known = median_ms("alice");
  const double unknown = median_ms("nobody");
  EXPECT_LE(std::max(known, unknown) / std::min(known, unknown), 1.5) << known << " ms vs " << unknown << " ms";
}

TEST(ServiceSessions, ExpiredTokenIsRejected) {
  TempDb db;
  auto config = test_config(db.path());
  config.session_ttl = std::chrono::seconds(0);
  FilterService svc(config);
  svc.register_user("alice", "correcthorse");
  const auto login = svc.login("alice", "correcthorse");
  EXPECT_EQ(code_of([&] { svc.authenticate(login.token); }), ErrorCode::InvalidSession);
}

TEST_F(ServiceTest, RegisterApp) {
  const auto a = svc->register_app("ChatApp");
  const auto b = svc->register_app("ChatApp");
  EXPECT_NE(a.app_id, b.app_id);
  EXPECT_EQ(a.api_key.size(), 64u);
  EXPECT_NE(a.api_key, b.api_key);
  EXPECT_EQ(a.strategy, MatchStrategy::TrieKeywordProcessor);
  EXPECT_EQ(svc->register_app("Other", MatchStrategy::KmpPerKeyword).strategy, MatchStrategy::KmpPerKeyword);
  EXPECT_EQ(code_of([&] { svc->register_app(""); }), ErrorCode::BadRequest);
  EXPECT_EQ(svc->app(a.app_id).api_key, "");
}

TEST_F(ServiceTest, GrantRequiresSessionAndApp) {
  const auto app = svc->register_app("ChatApp");
  EXPECT_EQ(code_of([&] { svc->grant_permission("nope", app.app_id, {true, true}); }), ErrorCode::InvalidSession);
  const auto token = user_token("alice");
  EXPECT_EQ(code_of([&] { svc->grant_permission(token, AppId{"a_missing"}, {true, true}); }), ErrorCode::UnknownApp);
}

TEST_F(ServiceTest, FilterPreconditions) {
  const auto app = svc->register_app("ChatApp");
  const auto alice_token = user_token("alice");
  const UserId alice = svc->authenticate(alice_token);
  EXPECT_EQ(code_of([&] { svc->filter_text("bad-key", alice, "hi", {}); }), ErrorCode::UnknownApiKey);
  EXPECT_EQ(code_of([&] { svc->filter_text(app.api_key, alice, "hi", {}); }), ErrorCode::PermissionNotGranted);
  svc->grant_permission(alice_token, app.app_id, {false, true});
  EXPECT_EQ(code_of([&] { svc->filter_text(app.api_key, alice, "hi", {}); }), ErrorCode::PermissionNotGranted);
  svc->grant_permission(alice_token, app.app_id, {true, true});
  EXPECT_EQ(svc->filter_text(app.api_key, alice, "hi", {}).filtered_text, "hi");
  EXPECT_EQ(code_of([&] { svc->filter_text(app.api_key, alice, std::string((1 << 20) + 1, 'a'), {}); }),
            ErrorCode::TextTooLarge);
  EXPECT_NO_THROW(svc->filter_text(app.api_key, alice, std::string(1 << 20, 'a'), {}));
  EXPECT_EQ(code_of([&] { svc->filter_text(app.api_key, alice, "\xff", {}); }), ErrorCode::InvalidEncoding);
}

TEST_F(ServiceTest, ScenarioAndNotifications) {
  const auto app = svc->register_app("ChatApp");
  const auto alice_token = user_token("alice");
  const auto jack_token = user_token("jack");
  const UserId alice = svc->authenticate(alice_token);
  const UserId jack = svc->authenticate(jack_token);
  svc->grant_permission(alice_token, app.app_id, {true, true});
  svc->grant_permission(jack_token, app.app_id, {true, true});
  svc->upsert_entry(jack_token, app.app_id, ListKind::SRB, "+36301234567");

  const auto before = policy::now();
  const auto r = svc->filter_text(app.api_key, alice, "call jack at +36301234567", {});
  EXPECT_EQ(r.filtered_text, "call jack at [FILTERED]");
  EXPECT_EQ(r.report.report.total_masked, 1u);
  EXPECT_EQ(r.report.report.by_source, (std::map<std::string, std::size_t>{{"SRB:" + jack.value, 1}}));

  const auto jack_view = svc->get_reports(jack_token, app.app_id, before);
  EXPECT_TRUE(jack_view.reports.empty());
  ASSERT_EQ(jack_view.notifications.size(), 1u);
  EXPECT_EQ(jack_view.notifications[0].count, 1u);
  EXPECT_EQ(jack_view.notifications[0].report_id, r.report.report_id);

  const auto alice_view = svc->get_reports(alice_token, std::nullopt, before);
  ASSERT_EQ(alice_view.reports.size(), 1u);
  EXPECT_TRUE(alice_view.notifications.empty());
  const auto& stored = alice_view.reports[0].report;
  EXPECT_EQ(stored.total_masked, 1u);
  EXPECT_EQ(stored.spans, r.report.report.spans);
  EXPECT_EQ(stored.by_source, r.report.report.by_source);
  EXPECT_EQ(stored.timestamp, r.report.report.timestamp);
  EXPECT_EQ(alice_view.reports[0].sender, alice);

  const auto future = policy::now() + std::chrono::hours(1);
  EXPECT_TRUE(svc->get_reports(alice_token, std::nullopt, future).reports.empty());
  EXPECT_TRUE(svc->get_reports(jack_token, std::nullopt, future).notifications.empty());
}

TEST_F(ServiceTest, RemoveThenFilterNoLongerMasks) {
  const auto app = svc->register_app("ChatApp");
  const auto token = user_token("alice");
  svc->grant_permission(token, app.app_id, {true, true});
  const UserId alice = svc->authenticate(token);
  svc->upsert_entry(token, app.app_id, ListKind::ORB, "nickname");
  EXPECT_EQ(svc->filter_text(app.api_key, alice, "my nickname", {}).filtered_text, "my [FILTERED]");
  svc->remove_entry(token, app.app_id, ListKind::ORB, "nickname");
  EXPECT_EQ(svc->filter_text(app.api_key, alice, "my nickname", {}).filtered_text, "my nickname");
}

TEST_F(ServiceTest, MatchesDirectModuleComposition) {
  const auto app = svc->register_app("ChatApp", MatchStrategy::RegexAlternation);
  const auto alice_token = user_token("alice");
  const auto bob_token = user_token("bob");
  const UserId alice = svc->authenticate(alice_token);
  svc->grant_permission(alice_token, app.app_id, {true, true});
  svc->grant_permission(bob_token, app.app_id, {true, false});
  svc->upsert_entry(bob_token, app.app_id, ListKind::SRB, "Bob Kovacs");
  svc->upsert_entry(bob_token, app.app_id, ListKind::SRW, "Bob Kovacs");
  svc->upsert_entry(alice_token, app.app_id, ListKind::ORB, "secret");
  svc->upsert_entry(alice_token, app.app_id, ListKind::SRW, "Hungary");

  policy::FilterScheme scheme;
  scheme.categories = {vocab::CategoryId::Countries, vocab::CategoryId::Names, vocab::CategoryId::Numerals};
  const std::string text = "Bob\tkovacs from Hungary and Austria, secret code 4411, ask Smith";

  const auto via_service = svc->filter_text(app.api_key, alice, text, scheme);

  vocab::Registry registry;
  const auto effective = svc->policy_store().compile_effective(alice, app.app_id, scheme, registry);
  const auto direct = filter::filter_text(effective, text, MatchStrategy::RegexAlternation);
  EXPECT_EQ(via_service.filtered_text, direct.filtered_text);
  EXPECT_EQ(via_service.report.report.spans, direct.report.spans);
  EXPECT_EQ(via_service.report.report.by_source, direct.report.by_source);
  EXPECT_EQ(via_service.filtered_text, "[FILTERED] from Hungary and [FILTERED], [FILTERED] code [FILTERED], ask [FILTERED]");
}

TEST_F(ServiceTest, ReportConservation) {
  const auto app = svc->register_app("ChatApp");
  const auto token = user_token("alice");
  const UserId alice = svc->authenticate(token);
  svc->grant_permission(token, app.app_id, {true, true});
  policy::FilterScheme scheme;
  scheme.categories = {vocab::CategoryId::Names, vocab::CategoryId::Numerals};
  const auto r = svc->filter_text(app.api_key, alice, "Smith met Jones at 10, then Brown at 11.", scheme);
  std::size_t placeholders = 0;
  for (auto pos = r.filtered_text.find("[FILTERED]"); pos != std::string::npos;
       pos = r.filtered_text.find("[FILTERED]", pos + 1)) {
    ++placeholders;
  }
  std::size_t sum = 0;
  for (const auto& [source, count] : r.report.report.by_source) sum += count;
  EXPECT_EQ(r.report.report.total_masked, placeholders);
  EXPECT_EQ(r.report.report.total_masked, sum);
  EXPECT_EQ(r.report.report.total_masked, r.report.report.spans.size());
  EXPECT_EQ(placeholders, 5u);
}

TEST_F(ServiceTest, PersistenceRoundTrip) {
  const auto app = svc->register_app("ChatApp", MatchStrategy::KmpPerKeyword);
  const auto alice_token = user_token("alice");
  const auto jack_token = user_token("jack");
  const UserId alice = svc->authenticate(alice_token);
  const UserId jack = svc->authenticate(jack_token);
  svc->grant_permission(alice_token, app.app_id, {true, true});
  svc->grant_permission(jack_token, app.app_id, {true, false});
  svc->upsert_entry(jack_token, app.app_id, ListKind::SRB, "Jack Smith");
  svc->upsert_entry(jack_token, app.app_id, ListKind::SRW, "Jack Smith");
  svc->upsert_entry(alice_token, app.app_id, ListKind::ORB, "Andrássy út");
  const auto sent = svc->filter_text(app.api_key, alice, "jack smith lives at andrássy út 60", {});
  const auto lists_before = svc->policy_store().all_lists();
  const auto reports_before = svc->get_reports(alice_token, std::nullopt, {});

  restart();

  EXPECT_EQ(svc->app(app.app_id).strategy, MatchStrategy::KmpPerKeyword);
  EXPECT_EQ(svc->grant(jack, app.app_id)->allow_others_to_share_me, false);
  EXPECT_TRUE(svc->policy_store().is_strict(jack, app.app_id));
  const auto lists_after = svc->policy_store().all_lists();
  ASSERT_EQ(lists_after.size(), lists_before.size());
  for (std::size_t i = 0; i < lists_before.size(); ++i) {
    EXPECT_EQ(lists_after[i].owner, lists_before[i].owner);
    EXPECT_EQ(lists_after[i].kind, lists_before[i].kind);
    EXPECT_EQ(lists_after[i].updated_at, lists_before[i].updated_at);
    ASSERT_EQ(lists_after[i].terms.size(), lists_before[i].terms.size());
    for (std::size_t t = 0; t < lists_before[i].terms.size(); ++t) {
      EXPECT_EQ(lists_after[i].terms[t].surface(), lists_before[i].terms[t].surface());
    }
  }
  // Sessions live in memory only.
  EXPECT_EQ(code_of([&] { svc->authenticate(alice_token); }), ErrorCode::InvalidSession);
  const auto token = svc->login("alice", "correcthorse").token;
  const auto reports_after = svc->get_reports(token, std::nullopt, {});
  ASSERT_EQ(reports_after.reports.size(), 1u);
  EXPECT_EQ(reports_after.reports[0].report_id, reports_before.reports[0].report_id);
  EXPECT_EQ(reports_after.reports[0].report.spans, sent.report.report.spans);
  EXPECT_EQ(reports_after.reports[0].report.timestamp, sent.report.report.timestamp);
  EXPECT_EQ(svc->filter_text(app.api_key, alice, "jack smith lives at andrássy út 60", {}).filtered_text,
            sent.filtered_text);
  EXPECT_EQ(sent.filtered_text, "[FILTERED] lives at [FILTERED] 60");
}

TEST_F(ServiceTest, DatastoreHoldsNoPlaintextSecretsOrText) {
  const std::string password = "Tr0ub4dor&3-unique";
  const std::string text = "the quick confidential brown fox 271828";
  const auto app = svc->register_app("ChatApp");
  svc->register_user("alice", password);
  const auto login = svc->login("alice", password);
  svc->grant_permission(login.token, app.app_id, {true, true});
  policy::FilterScheme scheme;
  scheme.categories = {vocab::CategoryId::Numerals};
  svc->filter_text(app.api_key, login.user, text, scheme);
  svc.reset();

  const std::string bytes = db.raw_bytes();
  ASSERT_FALSE(bytes.empty());
  EXPECT_EQ(bytes.find(password), std::string::npos);
  EXPECT_EQ(bytes.find(text), std::string::npos);
  EXPECT_EQ(bytes.find("confidential"), std::string::npos);
  EXPECT_EQ(bytes.find(app.api_key), std::string::npos);
  EXPECT_EQ(bytes.find(login.token), std::string::npos);
}

}  // namespace
}  // namespace idpf::service
