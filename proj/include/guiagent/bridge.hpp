#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>

#include "guiagent/device.hpp"

namespace guiagent {

// Newline-delimited JSON over TCP, one outstanding request at a time.
//   -> {"op":"get_state"}
//   -> {"op":"perform","action":{"kind":"click","target":"k"}}
//   <- {"ok":true,"state":{...}}   |   {"ok":false,"error":"...","kind":"..."}

// Applies one request to a device and builds the response. Never throws.
nlohmann::json handle_bridge_request(Device& device, const nlohmann::json& request);

struct BridgeAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// Accepts "host:port" or ":port".
BridgeAddress parse_bridge_address(const std::string& text);

class BridgeClient final : public Device {
 public:
  explicit BridgeClient(BridgeAddress address, std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~BridgeClient() override;
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  UiState get_state() override;
  ActionResult perform(const Action& action) override;

 private:
  nlohmann::json request(const nlohmann::json& message);
  void connect();
  void disconnect();

  BridgeAddress address_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  std::string buffer_;
};

// Serves one device over the bridge protocol on a background thread. Clients
// are handled one at a time.
class BridgeServer {
 public:
  // port 0 picks a free port; see port().
  BridgeServer(Device& device, std::uint16_t port = 0, std::string bind_host = "127.0.0.1");
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  // Blocks the calling thread until stop() is called from elsewhere.
  void wait();

 private:
  void serve();

  Device& device_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread worker_;
  std::mutex device_mutex_;
};

}  // namespace guiagent
