#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idpf/crypto.hpp"
#include "idpf/error.hpp"
#include "idpf/match/folded_text.hpp"
#include "idpf/match/span.hpp"
#include "idpf/term.hpp"

namespace idpf::vocab {

enum class CategoryId { Names, Links, Countries, Diseases, StreetNames, Numerals };

inline constexpr std::array<CategoryId, 6> kAllCategories = {CategoryId::Names,    CategoryId::Links,
                                                             CategoryId::Countries, CategoryId::Diseases,
                                                             CategoryId::StreetNames, CategoryId::Numerals};

constexpr std::string_view to_string(CategoryId id) {
  switch (id) {
    case CategoryId::Names: return "names";
    case CategoryId::Links: return "links";
    case CategoryId::Countries: return "countries";
    case CategoryId::Diseases: return "diseases";
    case CategoryId::StreetNames: return "street_names";
    case CategoryId::Numerals: return "numerals";
  }
  return "names";
}

inline std::optional<CategoryId> parse_category(std::string_view name) {
  for (CategoryId id : kAllCategories) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

// Bundled file for each term-list category; Numerals is pattern-based.
constexpr std::string_view bundled_file(CategoryId id) {
  switch (id) {
    case CategoryId::Names: return "names.txt";
    case CategoryId::Links: return "links.txt";
    case CategoryId::Countries: return "countries.txt";
    case CategoryId::Diseases: return "diseases.txt";
    case CategoryId::StreetNames: return "street_names.txt";
    case CategoryId::Numerals: return "";
  }
  return "";
}

inline constexpr std::string_view kBuiltinSource = "BUILTIN";

inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("IDPF_DATA_DIR"); env && *env) return env;
#ifdef IDPF_DATA_DIR
  return IDPF_DATA_DIR;
#else
  return "data";
#endif
}

struct VocabularyCategory {
  CategoryId id = CategoryId::Names;
  // Deduplicated, ordered by normalized form. Empty for Numerals.
  std::vector<Term> terms;
  // File path, or "BUILTIN" for the bundled default.
  std::string source;
};

inline VocabularyCategory load_category(CategoryId id, const std::optional<std::filesystem::path>& path,
                                        const std::filesystem::path& data_dir = default_data_dir()) {
  VocabularyCategory category{id, {}, std::string(kBuiltinSource)};
  if (id == CategoryId::Numerals) {
    if (path) throw Error(ErrorCode::BadRequest, "numerals category takes no term file");
    return category;
  }
  const std::filesystem::path file = path ? *path : data_dir / "vocab" / bundled_file(id);
  if (path) category.source = path->string();
  TermSet deduped(load_term_file(file));
  if (deduped.empty()) throw Error(ErrorCode::EmptyVocabulary, file.string());
  category.terms.assign(deduped.begin(), deduped.end());
  return category;
}

// Current category set. Categories not explicitly loaded resolve to the
// bundled defaults on first use.
class Registry {
 public:
  explicit Registry(std::filesystem::path data_dir = default_data_dir()) : data_dir_(std::move(data_dir)) {}

  std::shared_ptr<const VocabularyCategory> load(CategoryId id,
                                                 const std::optional<std::filesystem::path>& path = std::nullopt) {
    auto loaded = std::make_shared<const VocabularyCategory>(load_category(id, path, data_dir_));
    std::lock_guard lock(mutex_);
    categories_[id] = loaded;
    return loaded;
  }

  std::shared_ptr<const VocabularyCategory> get(CategoryId id) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = categories_.find(id); it != categories_.end()) return it->second;
    }
    return load(id);
  }

  std::vector<std::pair<CategoryId, std::size_t>> list_categories() {
    std::vector<std::pair<CategoryId, std::size_t>> out;
    for (CategoryId id : kAllCategories) out.emplace_back(id, get(id)->terms.size());
    return out;
  }

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

 private:
  std::filesystem::path data_dir_;
  std::mutex mutex_;
  std::map<CategoryId, std::shared_ptr<const VocabularyCategory>> categories_;
};

// Checks every "<sha256>  <file>" line of vocab/MANIFEST.sha256; returns the
// files whose content hash differs (or that are missing).
inline std::vector<std::string> verify_manifest(const std::filesystem::path& data_dir = default_data_dir()) {
  const auto dir = data_dir / "vocab";
  std::ifstream manifest(dir / "MANIFEST.sha256");
  if (!manifest) throw Error(ErrorCode::FileNotFound, (dir / "MANIFEST.sha256").string());
  std::vector<std::string> mismatched;
  std::string digest, name;
  while (manifest >> digest >> name) {
    std::ifstream in(dir / name, std::ios::binary);
    std::stringstream content;
    content << in.rdbuf();
    if (!in || crypto::sha256_hex(content.str()) != digest) mismatched.push_back(name);
  }
  return mismatched;
}

// Links post-pass. A prefix ("https://", "www.") matches where a term could
// start and the span runs through the end of the following non-space run.
// `term` in the returned spans indexes `prefixes`.
inline std::vector<MatchSpan> find_link_spans(const TermSet& prefixes, std::string_view text) {
  std::vector<MatchSpan> spans;
  if (prefixes.empty()) return spans;
  const match::FoldedText folded(text, prefixes.case_sensitive());
  const std::size_t n = folded.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t matched = prefixes.size();
    if (folded.can_start(i)) {
      for (std::size_t p = 0; p < prefixes.size() && matched == prefixes.size(); ++p) {
        const std::u32string& key = prefixes.chars(p);
        if (folded.chars().compare(i, key.size(), key) == 0) matched = p;
      }
    }
    if (matched == prefixes.size()) {
      ++i;
      continue;
    }
    std::size_t j = i + prefixes.chars(matched).size();
    while (j < n && folded[j] != U' ') ++j;
    spans.push_back({folded.byte_offset(i), folded.byte_offset(j), static_cast<std::uint32_t>(matched)});
    i = j;
  }
  return spans;
}

}  // namespace idpf::vocab
