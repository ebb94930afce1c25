// idp-audit: permission-dataset statistics.
#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "idpf/audit.hpp"

namespace audit = idpf::audit;

namespace {

struct Common {
  std::string platform = "android";
  std::filesystem::path input;
  std::filesystem::path mapping = audit::default_mapping_path();
  std::filesystem::path out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--platform", c.platform, "android, firefox, opera, workspace or zoom")->capture_default_str();
  cmd->add_option("--input", c.input, "Dataset CSV (name,category,permissions,users,rating)")->required();
  cmd->add_option("--mapping", c.mapping, "Permission class mapping (TOML)")->capture_default_str();
  cmd->add_option("--out", c.out, "Output file; stdout when omitted");
}

audit::Platform platform_or_throw(const std::string& name) {
  const auto p = audit::parse_platform(name);
  if (!p) throw idpf::Error(idpf::ErrorCode::BadRequest, "unknown platform: " + name);
  return *p;
}

void report_errors(const audit::Dataset& d, const std::filesystem::path& input) {
  for (const auto& e : d.errors) std::cerr << input.string() << ":" << e.line << ": " << e.message << "\n";
}

void write_output(const std::filesystem::path& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw idpf::Error(idpf::ErrorCode::FileNotFound, out.string());
  f << text;
}

void print_summary(const audit::PlatformSummary& s) {
  std::cerr << std::fixed << std::setprecision(2) << "apps " << s.total_apps << ", with IDP " << s.apps_with_idp
            << ", with PIDP " << s.apps_with_pidp << ", with either " << s.apps_with_either << " ("
            << 100 * s.ratio_either << "%)\n"
            << "mean IDP&PIDP per app " << s.mean_idp_pidp_per_app << " of " << s.mean_total_per_app << " ("
            << 100 * s.proportion << "%)\n";
}

void print_histogram(const std::map<std::string, audit::CategoryStats>& hist) {
  std::cerr << std::left << std::setw(28) << "category" << std::right << std::setw(6) << "apps" << std::setw(12)
            << "mean_total" << std::setw(14) << "mean_idp_pidp" << "\n";
  std::cerr << std::fixed << std::setprecision(2);
  for (const auto& [category, s] : hist) {
    std::cerr << std::left << std::setw(28) << category << std::right << std::setw(6) << s.apps << std::setw(12)
              << s.mean_total << std::setw(14) << s.mean_idp_pidp << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"App permission dataset audit"};
  app.require_subcommand(1);

  Common sum_opts;
  auto* summarize = app.add_subcommand("summarize", "Apps with IDP/PIDP permissions and per-app means");
  add_common(summarize, sum_opts);

  Common hist_opts;
  std::string bucket = "category";
  auto* histogram = app.add_subcommand("histogram", "Per-category means and IDP/PIDP count histogram as CSV");
  add_common(histogram, hist_opts);
  histogram->add_option("--bucket", bucket, "Grouping column")->check(CLI::IsMember({"category"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*summarize) {
      const auto platform = platform_or_throw(sum_opts.platform);
      const auto mapping = audit::PermissionMapping::load(sum_opts.mapping);
      const auto data = audit::load_dataset(sum_opts.input, platform);
      report_errors(data, sum_opts.input);
      const auto s = audit::summarize(data.records, mapping);
      print_summary(s);
      write_output(sum_opts.out, audit::summary_json(platform, s, mapping, data.errors).dump(2) + "\n");
    } else if (*histogram) {
      const auto platform = platform_or_throw(hist_opts.platform);
      const auto mapping = audit::PermissionMapping::load(hist_opts.mapping);
      const auto data = audit::load_dataset(hist_opts.input, platform);
      report_errors(data, hist_opts.input);
      const auto hist = audit::category_histogram(data.records, mapping);
      print_histogram(hist);
      write_output(hist_opts.out, audit::histogram_csv(hist));
    }
  } catch (const idpf::Error& e) {
    std::cerr << "idp-audit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
