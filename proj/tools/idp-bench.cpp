// idp-bench: sentence-set generation and matching-strategy timing.
#include <CLI11.hpp>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "idpf/bench.hpp"

namespace bench = idpf::bench;

namespace {

std::vector<idpf::MatchStrategy> parse_strategies(const std::vector<std::string>& names) {
  std::vector<idpf::MatchStrategy> out;
  for (const auto& n : names) {
    if (n == "all") return {std::begin(idpf::kAllStrategies), std::end(idpf::kAllStrategies)};
    const auto s = idpf::parse_strategy(n);
    if (!s) throw idpf::Error(idpf::ErrorCode::BadRequest, "unknown strategy: " + n);
    out.push_back(*s);
  }
  return out;
}

std::vector<std::string> blacklist_terms(const std::filesystem::path& file, std::size_t size) {
  return file.empty() ? bench::surname_blacklist(size) : bench::load_word_list(file);
}

// set.txt with --sets 3 becomes set-1.txt, set-2.txt, set-3.txt.
std::filesystem::path numbered(const std::filesystem::path& out, std::size_t i, std::size_t count) {
  if (count == 1) return out;
  auto p = out;
  p.replace_filename(out.stem().string() + "-" + std::to_string(i + 1) + out.extension().string());
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filtering benchmark harness"};
  app.require_subcommand(1);

  // gen
  std::size_t n = 10000;
  std::uint64_t seed = 42;
  std::filesystem::path out = "set.txt", words_file, brown_dir, inject_file;
  std::size_t inject_size = 800, sets = 1;
  unsigned jobs = 1;
  bool no_inject = false;
  bool iid_lengths = false;
  double hit_rate = bench::kDefaultHitRate;
  auto* gen = app.add_subcommand("gen", "Generate sentence sets with the target length distribution");
  gen->add_option("--n", n, "Sentences per set")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed", seed, "Seed of the first set; set i uses seed + i")->capture_default_str();
  gen->add_option("--out", out, "Output file, one sentence per line")->capture_default_str();
  auto* words_opt = gen->add_option("--words", words_file, "Word list, one per line (default: bundled)");
  gen->add_option("--brown", brown_dir, "Tagged Brown corpus directory")->excludes(words_opt);
  gen->add_option("--inject", inject_file, "Terms to inject (default: bundled surnames)");
  gen->add_option("--inject-size", inject_size, "Bundled surnames to inject")->capture_default_str();
  gen->add_flag("--no-inject", no_inject, "Do not inject blacklist terms");
  gen->add_option("--hit-rate", hit_rate, "Fraction of word slots holding an injected term")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->add_flag("--iid-lengths", iid_lengths, "Draw sentence lengths independently instead of stratified");
  gen->add_option("--sets", sets, "Number of sets")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--jobs", jobs, "Parallel generator threads")->check(CLI::PositiveNumber)->capture_default_str();

  // blacklist
  std::size_t bl_size = 400;
  std::filesystem::path bl_out;
  auto* bl = app.add_subcommand("blacklist", "Write the first N bundled surnames as a blacklist file");
  bl->add_option("--size", bl_size, "Number of terms")->check(CLI::Range(1, 800))->capture_default_str();
  bl->add_option("--out", bl_out, "Output file")->required();

  // time
  std::vector<std::string> time_strategies{"trie"};
  std::filesystem::path time_blacklist, time_set;
  std::size_t time_size = 400;
  bool reinit = false;
  int repeat = 3;
  auto* time = app.add_subcommand("time", "Filter a set and report wall-clock totals");
  time->add_option("--strategy", time_strategies, "regex, kmp, trie or all")->capture_default_str();
  auto* time_bl_opt = time->add_option("--blacklist", time_blacklist, "Blacklist file, one term per line");
  time->add_option("--blacklist-size", time_size, "Bundled surnames when no file is given")
      ->excludes(time_bl_opt)
      ->capture_default_str();
  time->add_option("--set", time_set, "Sentence set file")->required();
  time->add_flag("--reinit", reinit, "Rebuild the matcher for every sentence");
  time->add_option("--repeat", repeat, "Repetitions averaged")->check(CLI::PositiveNumber)->capture_default_str();

  // init
  std::vector<std::string> init_strategies{"trie"};
  std::vector<std::size_t> sizes{10000, 20000, 30000, 40000, 50000, 60000, 70000, 80000, 90000, 100000};
  int reps = 5;
  auto* init = app.add_subcommand("init", "Matcher build time per blacklist size");
  init->add_option("--strategy", init_strategies, "regex, kmp, trie or all")->capture_default_str();
  init->add_option("--sizes", sizes, "Blacklist sizes")->check(CLI::Range(1000, 200000))->delimiter(',');
  init->add_option("--reps", reps, "Builds per size; the median is reported")
      ->check(CLI::Range(5, 1000))
      ->capture_default_str();

  // compare
  std::vector<std::filesystem::path> compare_sets;
  std::filesystem::path compare_blacklist;
  std::size_t compare_size = 800;
  std::vector<std::string> compare_strategies{"all"};
  auto* compare = app.add_subcommand("compare", "Masked counts per set and strategy, cross-checked");
  compare->add_option("--set", compare_sets, "Sentence set files")->required();
  auto* cmp_bl_opt = compare->add_option("--blacklist", compare_blacklist, "Blacklist file");
  compare->add_option("--blacklist-size", compare_size, "Bundled surnames when no file is given")
      ->excludes(cmp_bl_opt)
      ->capture_default_str();
  compare->add_option("--strategies", compare_strategies, "Strategies to compare")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto words = !brown_dir.empty()  ? bench::load_brown_corpus(brown_dir)
                         : !words_file.empty() ? bench::load_word_list(words_file)
                                               : bench::bundled_words();
      std::vector<std::string> inject;
      if (!no_inject) inject = inject_file.empty() ? bench::surname_blacklist(inject_size) : bench::load_word_list(inject_file);
      std::vector<std::future<void>> pending;
      for (std::size_t i = 0; i < sets; ++i) {
        if (pending.size() >= jobs) {
          pending.front().get();
          pending.erase(pending.begin());
        }
        pending.push_back(std::async(std::launch::async, [&, i] {
          const auto set = bench::generate_sentences(n, seed + i, words, inject, {hit_rate, !iid_lengths});
          bench::save_sentence_set(set, numbered(out, i, sets));
        }));
      }
      for (auto& f : pending) f.get();
      for (std::size_t i = 0; i < sets; ++i) {
        const auto set = bench::load_sentence_set(numbered(out, i, sets));
        std::cerr << numbered(out, i, sets).string() << ": " << set.sentences.size() << " sentences, seed "
                  << seed + i << ", length mode " << bench::length_mode(set) << ", TV distance " << std::fixed
                  << std::setprecision(4) << bench::length_tv_distance(set) << "\n";
      }
    } else if (*bl) {
      std::ofstream f(bl_out, std::ios::binary);
      if (!f) throw idpf::Error(idpf::ErrorCode::FileNotFound, bl_out.string());
      for (const auto& t : bench::surname_blacklist(bl_size)) f << t << '\n';
    } else if (*time) {
      const auto terms = bench::to_terms(blacklist_terms(time_blacklist, time_size));
      const auto set = bench::load_sentence_set(time_set);
      std::vector<bench::BenchResult> results;
      for (auto s : parse_strategies(time_strategies)) results.push_back(bench::measure_filter(s, terms, set, reinit, repeat));
      std::cout << "strategy,size,seconds\n";
      for (const auto& r : results) {
        std::cout << idpf::to_string(r.strategy) << ',' << r.blacklist_size << ',' << std::setprecision(6)
                  << r.total_seconds << '\n';
      }
      std::cerr << std::left << std::setw(8) << "strategy" << std::right << std::setw(8) << "terms" << std::setw(10)
                << "sentences" << std::setw(12) << "total_s" << std::setw(12) << "init_s" << std::setw(10) << "masked"
                << "  reinit\n";
      for (const auto& r : results) {
        std::cerr << std::left << std::setw(8) << idpf::to_string(r.strategy) << std::right << std::setw(8)
                  << r.blacklist_size << std::setw(10) << r.set_size << std::fixed << std::setprecision(4)
                  << std::setw(12) << r.total_seconds << std::setw(12) << r.init_seconds << std::setw(10) << r.masked
                  << "  " << (r.per_invocation_reinit ? "yes" : "no") << "\n";
      }
    } else if (*init) {
      std::cout << "strategy,size,seconds,seconds_per_term\n";
      for (auto s : parse_strategies(init_strategies)) {
        for (const auto& sample : bench::measure_init(sizes, s, reps)) {
          std::cout << idpf::to_string(s) << ',' << sample.size << ',' << std::setprecision(6) << sample.init_seconds
                    << ',' << sample.seconds_per_term << '\n';
          std::cerr << std::left << std::setw(8) << idpf::to_string(s) << std::right << std::setw(8) << sample.size
                    << std::scientific << std::setprecision(3) << std::setw(12) << sample.init_seconds
                    << std::setw(12) << sample.seconds_per_term << std::defaultfloat << "\n";
        }
      }
    } else if (*compare) {
      std::vector<bench::SentenceSet> loaded;
      for (const auto& p : compare_sets) loaded.push_back(bench::load_sentence_set(p));
      const auto strategies = parse_strategies(compare_strategies);
      const auto rows = bench::compare_strategies(loaded, bench::to_terms(blacklist_terms(compare_blacklist, compare_size)),
                                                  strategies);
      std::cout << "strategy";
      for (const auto& row : rows) std::cout << ",set" << row.set_index + 1;
      std::cout << '\n';
      for (auto s : strategies) {
        std::cout << idpf::to_string(s);
        for (const auto& row : rows) std::cout << ',' << row.masked.at(s);
        std::cout << '\n';
      }
      std::cerr << "all strategies agree on every sentence\n";
    }
  } catch (const idpf::Error& e) {
    std::cerr << "idp-bench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
