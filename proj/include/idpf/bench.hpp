#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <unordered_set>
#include <limits>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "idpf/error.hpp"
#include "idpf/match.hpp"
#include "idpf/term.hpp"
#include "idpf/unicode.hpp"
#include "idpf/vocab.hpp"

namespace idpf::bench {

inline constexpr int kMaxSentenceWords = 60;
inline constexpr double kDefaultHitRate = 0.015;

// Target sentence-length distribution: f(L) = 1.1 * L * 0.9^L on [1, 60],
// normalized. Index 0 is unused.
inline std::vector<double> target_length_pmf(int max_len = kMaxSentenceWords) {
  std::vector<double> pmf(static_cast<std::size_t>(max_len) + 1, 0.0);
  double total = 0;
  for (int L = 1; L <= max_len; ++L) {
    pmf[L] = 1.1 * L * std::pow(0.9, L);
    total += pmf[L];
  }
  for (auto& p : pmf) p /= total;
  return pmf;
}

// Sampling helpers with fixed algorithms so that generated sets (and the
// golden counts recorded from them) do not depend on the standard library's
// distribution implementations.
namespace detail {

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace detail

struct GeneratorOptions {
  // Fraction of word slots filled with a blacklist term instead of a word.
  double hit_rate = kDefaultHitRate;
  // Systematic sampling of lengths: sentence i takes the inverse-CDF value
  // at (i + U) / n for one uniform U, and the lengths are then shuffled. Every
  // sentence's length is still distributed as the target, but the set's
  // histogram stays within one sentence of n * pmf(L) for every L. When false,
  // lengths are drawn independently.
  bool stratified_lengths = true;
};

struct SentenceSet {
  std::vector<std::string> sentences;
  // Empirical relative frequency of each sentence length in words.
  std::map<int, double> length_distribution;
  std::uint64_t seed = 0;
};

// Sentences of space-separated words, first letter capitalized, ending in '.'.
// Lengths follow target_length_pmf (see GeneratorOptions); each slot takes a uniformly drawn word
// from `words`, or with probability hit_rate a uniformly drawn `inject` term.
inline SentenceSet generate_sentences(std::size_t n, std::uint64_t seed, const std::vector<std::string>& words,
                                      const std::vector<std::string>& inject = {}, GeneratorOptions options = {}) {
  if (words.empty()) throw Error(ErrorCode::EmptyWordSource, "word source has no words");
  const auto pmf = target_length_pmf();
  std::vector<double> cdf(pmf.size(), 0.0);
  for (std::size_t L = 1; L < pmf.size(); ++L) cdf[L] = cdf[L - 1] + pmf[L];

  std::mt19937_64 rng(seed);
  SentenceSet set;
  set.seed = seed;
  set.sentences.reserve(n);
  std::map<int, std::size_t> counts;
  auto length_at = [&](double u) {
    const int len = static_cast<int>(std::upper_bound(cdf.begin() + 1, cdf.end(), u) - cdf.begin());
    return std::clamp(len, 1, kMaxSentenceWords);
  };
  std::vector<int> lengths;
  if (options.stratified_lengths) {
    lengths.reserve(n);
    const double offset = detail::unit(rng);
    for (std::size_t i = 0; i < n; ++i) lengths.push_back(length_at((static_cast<double>(i) + offset) / static_cast<double>(n)));
    for (std::size_t i = n; i > 1; --i) std::swap(lengths[i - 1], lengths[detail::below(rng, i)]);
  }
  for (std::size_t s = 0; s < n; ++s) {
    const int len = options.stratified_lengths ? lengths[s] : length_at(detail::unit(rng));
    ++counts[len];
    std::string sentence;
    for (int w = 0; w < len; ++w) {
      if (w) sentence += ' ';
      if (!inject.empty() && detail::unit(rng) < options.hit_rate) {
        sentence += inject[detail::below(rng, inject.size())];
      } else {
        sentence += words[detail::below(rng, words.size())];
      }
    }
    if (!sentence.empty() && sentence[0] >= 'a' && sentence[0] <= 'z') sentence[0] = static_cast<char>(sentence[0] - 32);
    sentence += '.';
    set.sentences.push_back(std::move(sentence));
  }
  for (const auto& [len, c] : counts) set.length_distribution[len] = static_cast<double>(c) / static_cast<double>(n);
  return set;
}

// Total-variation distance between the set's empirical length distribution
// and the target.
inline double length_tv_distance(const SentenceSet& set) {
  const auto pmf = target_length_pmf();
  double tv = 0;
  for (int L = 1; L <= kMaxSentenceWords; ++L) {
    auto it = set.length_distribution.find(L);
    tv += std::abs((it == set.length_distribution.end() ? 0.0 : it->second) - pmf[L]);
  }
  for (const auto& [L, p] : set.length_distribution) {
    if (L < 1 || L > kMaxSentenceWords) tv += p;
  }
  return tv / 2;
}

inline int length_mode(const SentenceSet& set) {
  int mode = 0;
  double best = -1;
  for (const auto& [L, p] : set.length_distribution) {
    if (p > best) {
      best = p;
      mode = L;
    }
  }
  return mode;
}

inline void save_sentence_set(const SentenceSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, path.string());
  for (const auto& s : set.sentences) out << s << '\n';
}

// One sentence per line; the length distribution is recounted from the text.
inline SentenceSet load_sentence_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  SentenceSet set;
  std::map<int, std::size_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int words = 0;
    bool in_word = false;
    for (char c : line) {
      const bool space = c == ' ' || c == '\t';
      if (!space && !in_word) ++words;
      in_word = !space;
    }
    ++counts[words];
    set.sentences.push_back(std::move(line));
  }
  for (const auto& [len, c] : counts) {
    set.length_distribution[len] = static_cast<double>(c) / static_cast<double>(set.sentences.size());
  }
  return set;
}

// One word per line, '#' comments and blank lines skipped.
inline std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.push_back(line);
  }
  if (words.empty()) throw Error(ErrorCode::EmptyWordSource, path.string());
  return words;
}

inline std::vector<std::string> bundled_words(const std::filesystem::path& data_dir = vocab::default_data_dir()) {
  return load_word_list(data_dir / "vocab" / "words.txt");
}

// Brown corpus in its tagged distribution form: whitespace-separated
// "word/tag" tokens across files named like ca01. Returns the word tokens
// (lowercased ASCII, tag stripped) that contain at least one letter, in
// corpus order, so sampling from the result follows corpus frequencies.
inline std::vector<std::string> load_brown_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::FileNotFound, dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() == 4 && name[0] == 'c' && std::isdigit(static_cast<unsigned char>(name[2]))) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> words;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::string token;
    while (in >> token) {
      const auto slash = token.rfind('/');
      std::string word = token.substr(0, slash);
      if (!std::any_of(word.begin(), word.end(), [](unsigned char c) { return std::isalpha(c); })) continue;
      std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
      words.push_back(std::move(word));
    }
  }
  if (words.empty()) throw Error(ErrorCode::EmptyWordSource, dir.string());
  return words;
}

// Distinct lowercase ASCII pseudo-words of 4..12 letters, deterministic in
// the seed; used as large blacklists for initialization timing.
inline std::vector<std::string> synthetic_terms(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(n);
  std::unordered_set<std::string> seen;
  while (out.size() < n) {
    std::string w(4 + detail::below(rng, 9), 'a');
    for (auto& c : w) c = static_cast<char>('a' + detail::below(rng, 26));
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<Term> to_terms(const std::vector<std::string>& words) {
  std::vector<Term> terms;
  terms.reserve(words.size());
  for (const auto& w : words) terms.push_back(Term::make(w));
  return terms;
}

// First n terms of the bundled surname list (file order is census rank).
inline std::vector<std::string> surname_blacklist(std::size_t n,
                                                  const std::filesystem::path& data_dir = vocab::default_data_dir()) {
  auto words = load_word_list(data_dir / "vocab" / "names.txt");
  if (n < words.size()) words.resize(n);
  return words;
}

struct InitSample {
  std::size_t size = 0;
  double init_seconds = 0;
  double seconds_per_term = 0;
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

// Time to build the strategy's structure from an already-normalized term
// set; median of `repetitions` builds per size.
inline std::vector<InitSample> measure_init(const std::vector<std::size_t>& sizes, MatchStrategy strategy,
                                            int repetitions = 5, std::uint64_t seed = 7) {
  std::vector<InitSample> out;
  for (std::size_t size : sizes) {
    const auto terms = std::make_shared<const TermSet>(to_terms(synthetic_terms(size, seed)));
    std::vector<double> runs;
    for (int r = 0; r < std::max(repetitions, 1); ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const Matcher m = Matcher::compile(terms, strategy);
      runs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      (void)m;
    }
    const double med = median(runs);
    out.push_back({size, med, med / static_cast<double>(size)});
  }
  return out;
}

struct BenchResult {
  MatchStrategy strategy = MatchStrategy::TrieKeywordProcessor;
  std::size_t blacklist_size = 0;
  std::size_t set_size = 0;
  // Averages over the repetitions.
  double total_seconds = 0;
  double init_seconds = 0;
  bool per_invocation_reinit = false;
  std::size_t masked = 0;
};

// Filters every sentence (match + mask). With reinit the matcher is rebuilt
// for every sentence, as a service reloading settings per call would.
inline BenchResult measure_filter(MatchStrategy strategy, const std::vector<Term>& blacklist, const SentenceSet& set,
                                  bool per_invocation_reinit, int repetitions = 3) {
  using Clock = std::chrono::steady_clock;
  const auto terms = std::make_shared<const TermSet>(blacklist);
  BenchResult result{strategy, terms->size(), set.sentences.size(), 0, 0, per_invocation_reinit, 0};
  repetitions = std::max(repetitions, 1);
  for (int r = 0; r < repetitions; ++r) {
    std::size_t masked = 0;
    Clock::duration init{};
    const auto t0 = Clock::now();
    std::optional<Matcher> shared;
    if (!per_invocation_reinit) {
      const auto i0 = Clock::now();
      shared.emplace(Matcher::compile(terms, strategy));
      init += Clock::now() - i0;
    }
    for (const auto& sentence : set.sentences) {
      std::optional<Matcher> local;
      if (per_invocation_reinit) {
        const auto i0 = Clock::now();
        local.emplace(Matcher::compile(terms, strategy));
        init += Clock::now() - i0;
      }
      const Matcher& m = per_invocation_reinit ? *local : *shared;
      const auto spans = m.find_matches(sentence);
      const std::string out = apply_mask(sentence, spans);
      masked += spans.size();
      (void)out;
    }
    result.total_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
    result.init_seconds += std::chrono::duration<double>(init).count();
    result.masked = masked;
  }
  result.total_seconds /= repetitions;
  result.init_seconds /= repetitions;
  return result;
}

struct ComparisonRow {
  std::size_t set_index = 0;
  std::map<MatchStrategy, std::size_t> masked;
};

// Masked-span counts per set and strategy. Throws StrategyMismatch, naming
// the first differing span, when two strategies disagree on any sentence.
inline std::vector<ComparisonRow> compare_strategies(const std::vector<SentenceSet>& sets,
                                                     const std::vector<Term>& blacklist,
                                                     const std::vector<MatchStrategy>& strategies) {
  if (strategies.size() < 2) throw Error(ErrorCode::BadRequest, "need at least two strategies to compare");
  const auto terms = std::make_shared<const TermSet>(blacklist);
  std::vector<Matcher> matchers;
  for (auto s : strategies) matchers.push_back(Matcher::compile(terms, s));

  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    ComparisonRow row{i, {}};
    for (auto s : strategies) row.masked[s] = 0;
    for (const auto& sentence : sets[i].sentences) {
      const auto reference = matchers[0].find_matches(sentence);
      row.masked[strategies[0]] += reference.size();
      for (std::size_t k = 1; k < matchers.size(); ++k) {
        const auto spans = matchers[k].find_matches(sentence);
        if (spans != reference) {
          std::size_t d = 0;
          while (d < spans.size() && d < reference.size() && spans[d] == reference[d]) ++d;
          auto describe = [&](const std::vector<MatchSpan>& v) {
            return d < v.size() ? std::to_string(v[d].start) + ".." + std::to_string(v[d].end) : std::string("none");
          };
          throw Error(ErrorCode::StrategyMismatch,
                      "set " + std::to_string(i) + ", sentence \"" + sentence + "\": " +
                          std::string(to_string(strategies[0])) + " has " + describe(reference) + ", " +
                          std::string(to_string(strategies[k])) + " has " + describe(spans));
        }
        row.masked[strategies[k]] += spans.size();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace idpf::bench
