// HTTP front end for interactive editing sessions.

#include "service/edit_service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdio>

namespace {
httplib::Server* g_server = nullptr;
trajedit::service::EditService* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->request_stop();
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyframe editing service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  trajedit::service::ServiceConfig cfg;
  cfg.scenario_dir = TRAJEDIT_DEFAULT_SCENARIO_DIR;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port");
  app.add_option("--scenarios", cfg.scenario_dir, "Directory of scenario files");
  app.add_option("--dt", cfg.dt, "Default simulation time step, s");
  CLI11_PARSE(app, argc, argv);

  trajedit::service::EditService service(cfg);
  httplib::Server server;
  trajedit::service::mount(server, service);
  g_server = &server;
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  std::printf("listening on %s:%d (scenarios in %s)\n", host.c_str(), port, cfg.scenario_dir.c_str());
  std::fflush(stdout);
  if (!server.listen(host, port)) {
    std::fprintf(stderr, "trajedit_server: cannot listen on %s:%d\n", host.c_str(), port);
    return 1;
  }
  service.shutdown();
  return 0;
}
