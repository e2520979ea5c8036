#pragma once

#include <chrono>
#include <string>
#include <thread>

#include "httplib.h"

namespace testsupport {

// Local HTTP stub bound to an ephemeral loopback port. Handlers must be
// registered on `server` before the constructor runs, so the usual shape
// is: build httplib::Server, add routes, then wrap it.
class ScopedServer {
 public:
  explicit ScopedServer(httplib::Server& server) : server_(server) {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    while (!server_.is_running())
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  ScopedServer(const ScopedServer&) = delete;
  ScopedServer& operator=(const ScopedServer&) = delete;

  ~ScopedServer() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
  }
  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

 private:
  httplib::Server& server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace testsupport
