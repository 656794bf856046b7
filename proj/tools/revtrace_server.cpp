// Serves the revtrace HTTP API.
//
//   revtrace_server CONFIG
//
// REVTRACE_LISTEN and REVTRACE_STORE override the listen address and store.

#include <csignal>
#include <iostream>

#include "revtrace/service.hpp"

namespace {

revtrace::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->server().stop();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " CONFIG\n";
    return 2;
  }
  try {
    const auto cfg = revtrace::load_config(argv[1]);
    revtrace::Service service(cfg);
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on " << cfg.host << ':' << cfg.port << ", store " << cfg.store_dir.string() << '\n';
    if (!service.listen(cfg.host, cfg.port)) {
      std::cerr << "error: cannot listen on " << cfg.host << ':' << cfg.port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
