#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "qlat/instantiate.hpp"

namespace qlat {

struct ApiRequest {
  std::string method;  // GET, POST, PUT, DELETE
  std::string path;    // decoded, without query string
  std::map<std::string, std::string> params;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks default_port()
  std::chrono::minutes idle_timeout{30};
  std::optional<std::filesystem::path> ui_dir;
  std::optional<std::filesystem::path> graph;  // preloaded into new sessions
  LatticeOptions lattice;
};

/// QLAT_PORT when set and valid, else 8080.
int default_port();

/// Session store and JSON API, independent of the HTTP transport.
class Api {
 public:
  using Clock = std::chrono::steady_clock;

  explicit Api(ServiceConfig config = {});
  ~Api();

  ApiResponse handle(const ApiRequest& req);
  /// Drops sessions idle for longer than the configured timeout.
  std::size_t evict_idle(Clock::time_point now = Clock::now());
  std::size_t session_count() const;
  const ServiceConfig& config() const { return config_; }

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id, Clock::time_point now);

  ApiResponse create_session(const ApiRequest& req, Clock::time_point now);
  ApiResponse route_session(Session& s, const std::string& rest, const ApiRequest& req);

  ServiceConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Serves Api over HTTP (and the UI bundle when configured) until stop().
class HttpService {
 public:
  explicit HttpService(ServiceConfig config);
  ~HttpService();

  /// Binds; returns the bound port. Port 0 in `config` means default_port();
  /// negative means any free port.
  int bind();
  /// Blocks serving requests.
  void listen();
  void stop();
  Api& api();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qlat
