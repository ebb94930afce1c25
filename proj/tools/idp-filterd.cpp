// idp-filterd: HTTP front end of the filter service.
#include <httplib.h>

#include <CLI11.hpp>
#include <csignal>
#include <iostream>
#include <string>

#include "idpf/service/http.hpp"

namespace {

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interdependent privacy filter service"};
  idpf::service::ServiceConfig config;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string strategy = "trie";
  long ttl_seconds = config.session_ttl.count();

  app.add_option("--host", host, "Bind address")->envname("IDPF_HOST")->capture_default_str();
  app.add_option("--port", port, "Bind port")->envname("IDPF_PORT")->capture_default_str();
  app.add_option("--db", config.db_path, "SQLite datastore path")->envname("IDPF_DB")->capture_default_str();
  app.add_option("--data-dir", config.data_dir, "Directory holding vocab/ and mapping/")
      ->envname("IDPF_DATA_DIR")
      ->capture_default_str();
  app.add_option("--pbkdf2-iterations", config.pbkdf2_iterations, "PBKDF2-HMAC-SHA256 iteration count")
      ->envname("IDPF_PBKDF2_ITERATIONS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--strategy", strategy, "Default matching strategy for new apps (regex, kmp, trie)")
      ->envname("IDPF_STRATEGY")
      ->capture_default_str();
  app.add_option("--max-text-bytes", config.max_text_bytes, "Largest accepted filter text")
      ->envname("IDPF_MAX_TEXT_BYTES")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--session-ttl", ttl_seconds, "Session lifetime in seconds")
      ->envname("IDPF_SESSION_TTL")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const auto parsed = idpf::parse_strategy(strategy);
  if (!parsed) {
    std::cerr << "unknown strategy: " << strategy << "\n";
    return 2;
  }
  config.default_strategy = *parsed;
  config.session_ttl = std::chrono::seconds(ttl_seconds);

  try {
    idpf::service::FilterService service(config);
    httplib::Server server;
    idpf::service::http::mount(server, service);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << "idp-filterd listening on " << host << ":" << port << " (db " << config.db_path.string() << ")\n";
    if (!server.listen(host, port)) {
      std::cerr << "cannot bind " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const idpf::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
