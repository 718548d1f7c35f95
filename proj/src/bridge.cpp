#include "guiagent/bridge.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "guiagent/json_io.hpp"

namespace guiagent {

using nlohmann::json;

namespace {

json error_response(std::string_view kind, const std::string& message) {
  return {{"ok", false}, {"kind", kind}, {"error", message}};
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

json handle_bridge_request(Device& device, const json& request) {
  try {
    if (!request.is_object() || !request.contains("op")) return error_response("bad_request", "missing op");
    const auto op = request["op"].get<std::string>();
    if (op == "get_state") {
      return {{"ok", true}, {"state", state_to_json(device.get_state())}};
    }
    if (op == "perform") {
      if (!request.contains("action")) return error_response("bad_request", "perform needs an action");
      Action action;
      try {
        action = action_from_json(request["action"]);
      } catch (const std::exception& e) {
        return error_response(device_error_kind_id(DeviceErrorKind::invalid_action), e.what());
      }
      device.perform(action);
      return {{"ok", true}, {"state", state_to_json(device.get_state())}};
    }
    return error_response("bad_request", "unknown op '" + op + "'");
  } catch (const DeviceError& e) {
    return error_response(device_error_kind_id(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_response("bad_request", e.what());
  }
}

BridgeAddress parse_bridge_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("bridge address must be host:port, got '" + text + "'");
  BridgeAddress addr;
  if (colon > 0) addr.host = text.substr(0, colon);
  const auto port_text = text.substr(colon + 1);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid bridge port '" + port_text + "'");
  }
  if (port <= 0 || port > 65535) throw std::invalid_argument("bridge port out of range: " + port_text);
  addr.port = static_cast<std::uint16_t>(port);
  return addr;
}

BridgeClient::BridgeClient(BridgeAddress address, std::chrono::milliseconds timeout)
    : address_(std::move(address)), timeout_(timeout) {}

BridgeClient::~BridgeClient() { disconnect(); }

void BridgeClient::disconnect() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

void BridgeClient::connect() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const auto port = std::to_string(address_.port);
  if (int rc = ::getaddrinfo(address_.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw DeviceError(DeviceErrorKind::transport, "cannot resolve " + address_.host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (auto* ai = found; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) {
    throw DeviceError(DeviceErrorKind::transport, "cannot connect to bridge " + address_.host + ":" + port + ": " +
                                                      last_error);
  }
}

json BridgeClient::request(const json& message) {
  if (fd_ < 0) connect();
  if (!write_all(fd_, message.dump() + "\n")) {
    disconnect();
    throw DeviceError(DeviceErrorKind::transport, "bridge connection lost while sending");
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::size_t newline;
  while ((newline = buffer_.find('\n')) == std::string::npos) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      disconnect();
      throw DeviceError(DeviceErrorKind::timeout, "bridge did not answer within " + std::to_string(timeout_.count()) + " ms");
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      disconnect();
      throw DeviceError(DeviceErrorKind::transport, "bridge closed the connection");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }

  const std::string line = buffer_.substr(0, newline);
  buffer_.erase(0, newline + 1);
  json response;
  try {
    response = json::parse(line);
  } catch (const json::parse_error& e) {
    disconnect();
    throw DeviceError(DeviceErrorKind::transport, std::string("malformed bridge response: ") + e.what());
  }
  if (!response.value("ok", false)) {
    const auto kind = response.value("kind", std::string("remote"));
    const auto message = response.value("error", std::string("bridge reported an error"));
    for (auto k : {DeviceErrorKind::no_session, DeviceErrorKind::unknown_app, DeviceErrorKind::unknown_target,
                   DeviceErrorKind::unsupported_kind, DeviceErrorKind::invalid_action}) {
      if (device_error_kind_id(k) == kind) throw DeviceError(k, message);
    }
    throw DeviceError(DeviceErrorKind::remote, message);
  }
  if (!response.contains("state")) {
    throw DeviceError(DeviceErrorKind::transport, "bridge response is missing the state");
  }
  return response;
}

UiState BridgeClient::get_state() {
  auto response = request({{"op", "get_state"}});
  try {
    return state_from_json(response["state"]);
  } catch (const std::exception& e) {
    throw DeviceError(DeviceErrorKind::transport, std::string("invalid state from bridge: ") + e.what());
  }
}

ActionResult BridgeClient::perform(const Action& action) {
  try {
    action.validate();
  } catch (const std::invalid_argument& e) {
    throw DeviceError(DeviceErrorKind::invalid_action, e.what());
  }
  auto response = request({{"op", "perform"}, {"action", action_to_json(action)}});
  try {
    return {true, state_from_json(response["state"]).state_digest};
  } catch (const std::exception& e) {
    throw DeviceError(DeviceErrorKind::transport, std::string("invalid state from bridge: ") + e.what());
  }
}

BridgeServer::BridgeServer(Device& device, std::uint16_t port, std::string bind_host) : device_(device) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw std::invalid_argument("bind host must be an IPv4 address: " + bind_host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 4) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  worker_ = std::thread([this] { serve(); });
}

BridgeServer::~BridgeServer() {
  stop();
  if (worker_.joinable()) worker_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void BridgeServer::stop() { stopping_ = true; }

void BridgeServer::wait() {
  if (worker_.joinable()) worker_.join();
}

void BridgeServer::serve() {
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 50) <= 0) continue;
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) continue;
    std::string buffer;
    bool open = true;
    while (open && !stopping_) {
      pollfd cfd{client, POLLIN, 0};
      const int ready = ::poll(&cfd, 1, 50);
      if (ready <= 0) continue;
      char chunk[4096];
      const ssize_t n = ::recv(client, chunk, sizeof(chunk), 0);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t newline;
      while ((newline = buffer.find('\n')) != std::string::npos) {
        const std::string line = buffer.substr(0, newline);
        buffer.erase(0, newline + 1);
        if (line.empty()) continue;
        json response;
        try {
          const auto request = json::parse(line);
          std::lock_guard lock(device_mutex_);
          response = handle_bridge_request(device_, request);
        } catch (const json::parse_error& e) {
          response = error_response("bad_request", std::string("malformed request: ") + e.what());
        }
        if (!write_all(client, response.dump() + "\n")) {
          open = false;
          break;
        }
      }
    }
    ::close(client);
  }
}

}  // namespace guiagent
