// oneclick-server CONFIG.json
//
// Binds to $ONECLICK_HOST:$ONECLICK_PORT (default 127.0.0.1:8080).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <httplib.h>

#include "oneclick/json_io.hpp"
#include "oneclick/service.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " CONFIG.json\n";
    return 2;
  }
  try {
    const std::filesystem::path config_path(argv[1]);
    const auto cfg = oneclick::service_config_from_json(oneclick::read_json_file(config_path.string()),
                                                        config_path.parent_path());
    oneclick::AnnotationService service(cfg);

    const char* host_env = std::getenv("ONECLICK_HOST");
    const char* port_env = std::getenv("ONECLICK_PORT");
    const std::string host = host_env ? host_env : "127.0.0.1";
    const int port = port_env ? std::stoi(port_env) : 8080;

    httplib::Server server;
    oneclick::bind_routes(server, service, cfg.ui_dir);
    std::cerr << "listening on " << host << ':' << port << '\n';
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot bind " << host << ':' << port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
