#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "idpf/vocab.hpp"

namespace idpf::vocab {
namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

TEST(Vocab, BundledNamesHave800Terms) {
  const auto names = load_category(CategoryId::Names, std::nullopt);
  EXPECT_EQ(names.terms.size(), 800u);
  EXPECT_EQ(names.source, kBuiltinSource);
}

TEST(Vocab, DeduplicatesUnderCaseFolding) {
  const auto path = write_temp("idpf_countries.txt", "Hungary\nhungary\n");
  const auto countries = load_category(CategoryId::Countries, path);
  ASSERT_EQ(countries.terms.size(), 1u);
  EXPECT_EQ(countries.terms[0].normalized(), "hungary");
  EXPECT_EQ(countries.source, path.string());
  std::filesystem::remove(path);
}

TEST(Vocab, MissingFileIsFileNotFound) {
  try {
    (void)load_category(CategoryId::Diseases, std::filesystem::path("/no/such/diseases.txt"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
  }
}

TEST(Vocab, CommentOnlyFileIsEmptyVocabulary) {
  const auto path = write_temp("idpf_empty_vocab.txt", "# nothing here\n\n");
  try {
    (void)load_category(CategoryId::StreetNames, path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyVocabulary);
  }
  std::filesystem::remove(path);
}

TEST(Vocab, LoadIsIdempotent) {
  const auto a = load_category(CategoryId::Diseases, std::nullopt);
  const auto b = load_category(CategoryId::Diseases, std::nullopt);
  ASSERT_EQ(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < a.terms.size(); ++i) EXPECT_EQ(a.terms[i], b.terms[i]);
}

TEST(Vocab, ListCategoriesReportsSixWithBundledDefaults) {
  Registry registry;
  const auto listed = registry.list_categories();
  ASSERT_EQ(listed.size(), 6u);
  for (const auto& [id, count] : listed) {
    if (id == CategoryId::Numerals) {
      EXPECT_EQ(count, 0u);
    } else {
      EXPECT_GT(count, 0u) << to_string(id);
    }
  }
  EXPECT_EQ(listed[0].first, CategoryId::Names);
  EXPECT_EQ(listed[0].second, 800u);
}

TEST(Vocab, RegistryLoadReplacesCategory) {
  Registry registry;
  const auto path = write_temp("idpf_names_small.txt", "Kovacs\nNagy\n");
  registry.load(CategoryId::Names, path);
  EXPECT_EQ(registry.get(CategoryId::Names)->terms.size(), 2u);
  std::filesystem::remove(path);
}

TEST(Vocab, BundledTermsSatisfyTermInvariants) {
  for (CategoryId id : kAllCategories) {
    const auto category = load_category(id, std::nullopt);
    for (const auto& t : category.terms) {
      EXPECT_FALSE(t.normalized().empty());
      EXPECT_NE(t.normalized().front(), ' ');
      EXPECT_NE(t.normalized().back(), ' ');
      EXPECT_NO_THROW((void)Term::make(t.normalized()));
    }
  }
}

TEST(Vocab, ManifestHashesMatchBundledFiles) {
  EXPECT_TRUE(verify_manifest().empty());
}

TEST(Vocab, NumeralsCarryNoTermList) {
  EXPECT_TRUE(load_category(CategoryId::Numerals, std::nullopt).terms.empty());
  EXPECT_THROW((void)load_category(CategoryId::Numerals, std::filesystem::path("x.txt")), Error);
}

TEST(Vocab, CategoryNamesRoundTrip) {
  for (CategoryId id : kAllCategories) EXPECT_EQ(parse_category(to_string(id)), id);
  EXPECT_FALSE(parse_category("planets").has_value());
}

TEST(Links, PrefixExtendsThroughNonSpaceRun) {
  const TermSet prefixes = TermSet::from_strings({"https://", "www."});
  const std::string text = "see https://example.com/a?b=1 or WWW.x.org, bye";
  const auto spans = find_link_spans(prefixes, text);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(text.substr(spans[0].start, spans[0].length()), "https://example.com/a?b=1");
  EXPECT_EQ(text.substr(spans[1].start, spans[1].length()), "WWW.x.org,");
}

TEST(Links, PrefixMustStartAtWordBoundary) {
  const TermSet prefixes = TermSet::from_strings({"www."});
  EXPECT_TRUE(find_link_spans(prefixes, "awww.example.com").empty());
  EXPECT_EQ(find_link_spans(prefixes, "(www.example.com)").size(), 1u);
}

}  // namespace
}  // namespace idpf::vocab
