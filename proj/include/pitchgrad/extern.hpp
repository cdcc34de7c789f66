// Copyright 2026 The Pitchgrad Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Client side of the external distance protocol.
//
// The worker is a subprocess speaking newline-delimited JSON:
//
//   worker -> {"protocol":"pitchgrad-extern","version":1,"name":"..."}
//   client -> {"id":1,"sample_rate_hz":44100.0,"target":[...],"prediction":[...]}
//   worker -> {"id":1,"distance":0.25}   or   {"id":1,"error":"..."}
//
// Request ids increase strictly within a session and responses come back in
// request order. POSIX only.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pitchgrad/engine.hpp"
#include "pitchgrad/errors.hpp"
#include "pitchgrad/signal.hpp"

namespace pitchgrad {

inline constexpr const char* kExternProtocol = "pitchgrad-extern";
inline constexpr int kExternVersion = 1;
inline constexpr int kExternDefaultTimeoutMs = 30000;

struct ExternRequest {
  uint64_t id = 0;
  double sample_rate_hz = 44100.0;
  std::span<const double> target;
  std::span<const double> prediction;
};

struct ExternResponse {
  uint64_t id = 0;
  std::optional<double> distance;
  std::optional<std::string> error;
};

struct ExternCapabilities {
  std::string name;
  int version = 0;
};

/// Serializes one request as a single line (no trailing newline).
inline std::string encode_request(const ExternRequest& req) {
  nlohmann::json j;
  j["id"] = req.id;
  j["sample_rate_hz"] = req.sample_rate_hz;
  j["target"] = std::vector<double>(req.target.begin(), req.target.end());
  j["prediction"] = std::vector<double>(req.prediction.begin(), req.prediction.end());
  return j.dump();
}

/// Parses a response line. Throws ProtocolError on malformed JSON or a
/// negative / non-finite distance.
inline ExternResponse decode_response(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
    throw ProtocolError("response lacks an integer id: " + line.substr(0, 200));
  }
  ExternResponse r;
  r.id = j["id"].get<uint64_t>();
  if (j.contains("error")) {
    r.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return r;
  }
  if (!j.contains("distance") || !j["distance"].is_number()) {
    throw ProtocolError("response has neither distance nor error: " + line.substr(0, 200));
  }
  const double d = j["distance"].get<double>();
  if (!std::isfinite(d) || d < 0.0) {
    throw ProtocolError("worker returned invalid distance " + std::to_string(d));
  }
  r.distance = d;
  return r;
}

/// Validates the first line a worker prints.
inline ExternCapabilities parse_banner(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("bad banner: " + line.substr(0, 200));
  }
  if (!j.is_object() || j.value("protocol", std::string()) != kExternProtocol) {
    throw ProtocolError("bad banner: " + line.substr(0, 200));
  }
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw ProtocolError("banner lacks a version");
  }
  const int version = j["version"].get<int>();
  if (version != kExternVersion) {
    throw ProtocolError("protocol version mismatch: worker speaks " + std::to_string(version) +
                        ", client speaks " + std::to_string(kExternVersion));
  }
  ExternCapabilities caps;
  caps.version = version;
  caps.name = j.value("name", std::string());
  return caps;
}

/// One worker process. Requests are serialized; not thread-safe.
class ExternSession {
 public:
  explicit ExternSession(const std::string& command, int timeout_ms = kExternDefaultTimeoutMs)
      : timeout_ms_(timeout_ms) {
    ignore_sigpipe();
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0) throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
      throw ProtocolError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      // Own process group, so shutdown reaches grandchildren spawned by sh.
      setpgid(0, 0);
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    setpgid(pid_, pid_);
    close(to_child[0]);
    close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    fcntl(in_fd_, F_SETFD, FD_CLOEXEC);
    fcntl(out_fd_, F_SETFD, FD_CLOEXEC);

    try {
      auto banner = read_line(timeout_ms_);
      if (!banner) {
        throw ProtocolError("worker produced no banner within " + std::to_string(timeout_ms_) +
                            " ms");
      }
      caps_ = parse_banner(*banner);
    } catch (...) {
      shutdown();
      throw;
    }
  }

  ExternSession(const ExternSession&) = delete;
  ExternSession& operator=(const ExternSession&) = delete;
  ~ExternSession() { shutdown(); }

  const ExternCapabilities& capabilities() const { return caps_; }
  uint64_t requests_sent() const { return next_id_ - 1; }

  /// Sends one request (the session assigns the id) and waits for its
  /// response. A timeout throws TrialError; a late response to a timed-out
  /// request is discarded when it eventually arrives.
  ExternResponse evaluate(double sample_rate_hz, std::span<const double> target,
                          std::span<const double> prediction) {
    if (target.size() != prediction.size()) {
      throw std::invalid_argument("target and prediction must have equal length");
    }
    if (dead_) throw ProtocolError("session aborted earlier: " + dead_reason_);
    ExternRequest req{next_id_++, sample_rate_hz, target, prediction};
    write_all(encode_request(req) + "\n");

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
      auto line = read_line(static_cast<int>(std::max<int64_t>(left, 0)));
      if (!line) {
        throw TrialError("external worker timed out on request " + std::to_string(req.id));
      }
      ExternResponse resp;
      try {
        resp = decode_response(*line);
      } catch (const ProtocolError& e) {
        abort_session(e.what());
      }
      if (resp.id < req.id) continue;  // late answer to a timed-out request
      if (resp.id > req.id) {
        abort_session("response id " + std::to_string(resp.id) + " for request " +
                      std::to_string(req.id));
      }
      return resp;
    }
  }

  /// Convenience: distance or TrialError.
  double distance(double sample_rate_hz, std::span<const double> target,
                  std::span<const double> prediction) {
    ExternResponse r = evaluate(sample_rate_hz, target, prediction);
    if (r.error) throw TrialError("external worker error: " + *r.error);
    return *r.distance;
  }

 private:
  static void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { signal(SIGPIPE, SIG_IGN); });
  }

  [[noreturn]] void abort_session(const std::string& why) {
    dead_ = true;
    dead_reason_ = why;
    throw ProtocolError(why);
  }

  void write_all(const std::string& data) {
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      const ssize_t n = write(in_fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        abort_session(std::string("write to worker failed: ") + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  /// Next line from the worker, or nullopt on timeout. EOF aborts.
  std::optional<std::string> read_line(int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
      if (left <= 0) return std::nullopt;
      pollfd pfd{out_fd_, POLLIN, 0};
      const int rc = poll(&pfd, 1, static_cast<int>(left));
      if (rc < 0) {
        if (errno == EINTR) continue;
        abort_session(std::string("poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) return std::nullopt;
      char chunk[65536];
      const ssize_t n = read(out_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        abort_session(std::string("read from worker failed: ") + std::strerror(errno));
      }
      if (n == 0) abort_session("worker closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown() {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ > 0) {
      // Closing stdin asks the worker to exit; give it a moment, then insist.
      for (int i = 0; i < 50; ++i) {
        if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        usleep(2000);
      }
      kill(-pid_, SIGKILL);
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  int timeout_ms_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  uint64_t next_id_ = 1;
  ExternCapabilities caps_;
  bool dead_ = false;
  std::string dead_reason_;
};

/// Distance engine backed by external workers, one session per benchmark
/// worker thread. Numeric conditions only.
class ExternEngine final : public DistanceEngine {
 public:
  explicit ExternEngine(std::string command, int timeout_ms = kExternDefaultTimeoutMs)
      : command_(std::move(command)), timeout_ms_(timeout_ms), name_("external") {}

  const std::string& name() const override { return name_; }
  const std::string& display_name() const override { return name_; }
  bool supports_analytic() const override { return false; }

  /// Starts the session for `worker` now (otherwise it starts on first use),
  /// so handshake failures surface before a run begins.
  ExternSession& session(std::size_t worker) const {
    std::lock_guard lock(mu_);
    if (sessions_.size() <= worker) sessions_.resize(worker + 1);
    if (!sessions_[worker]) sessions_[worker] = std::make_unique<ExternSession>(command_, timeout_ms_);
    return *sessions_[worker];
  }

  std::unique_ptr<TargetScope> bind(const SineParams& target, const BenchConfig& cfg,
                                    std::size_t worker) const override {
    return std::make_unique<Scope>(session(worker), target, cfg);
  }

 private:
  class Scope final : public TargetScope {
   public:
    Scope(ExternSession& s, const SineParams& target, const BenchConfig& cfg)
        : session_(s), cfg_(cfg), target_(synthesize_real(target, cfg)) {}
    double distance(const SineParams& prediction) override {
      const auto x = synthesize_real(prediction, cfg_);
      return session_.distance(cfg_.sample_rate_hz, target_, x);
    }
    Dual derivative(const SineParams&, Axis) override {
      throw std::invalid_argument("external distances have no analytic gradient");
    }

   private:
    ExternSession& session_;
    BenchConfig cfg_;
    std::vector<double> target_;
  };

  std::string command_;
  int timeout_ms_;
  std::string name_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<ExternSession>> sessions_;
};

}  // namespace pitchgrad
