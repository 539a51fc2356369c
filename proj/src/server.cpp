// Copyright 2026 The Haptibot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "haptibot/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

namespace haptibot {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Inbound {
  std::uint64_t connection = 0;
  std::string text;
};

class InboundQueue {
 public:
  void push(Inbound item) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(item));
  }
  std::deque<Inbound> drain() {
    std::lock_guard lock(mutex_);
    std::deque<Inbound> out;
    out.swap(items_);
    return out;
  }

 private:
  std::mutex mutex_;
  std::deque<Inbound> items_;
};

class Connection;

class Registry {
 public:
  void add(std::uint64_t id, std::shared_ptr<Connection> c) {
    std::lock_guard lock(mutex_);
    connections_[id] = std::move(c);
  }
  void remove(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    connections_.erase(id);
  }
  std::shared_ptr<Connection> find(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    auto it = connections_.find(id);
    return it == connections_.end() ? nullptr : it->second;
  }
  std::vector<std::shared_ptr<Connection>> all() {
    std::lock_guard lock(mutex_);
    std::vector<std::shared_ptr<Connection>> out;
    for (auto& [id, c] : connections_) out.push_back(c);
    return out;
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return connections_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::shared_ptr<Connection>> connections_;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::uint64_t id, InboundQueue& inbound, Registry& registry)
      : ws_(std::move(socket)), id_(id), inbound_(inbound), registry_(registry) {}

  void start() {
    ws_.read_message_max(kMaxFrameBytes);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        spdlog::debug("connection {}: handshake failed: {}", self->id_, ec.message());
        return;
      }
      self->registry_.add(self->id_, self);
      spdlog::info("connection {} opened", self->id_);
      self->read();
    });
  }

  /// Thread-safe; frames go out in call order.
  void send(std::string text) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->outbox_.push_back(std::move(text));
      if (self->outbox_.size() == 1) self->write_next();
    });
  }

  /// Thread-safe; flushes queued frames first.
  void close(websocket::close_code code) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), code] {
      self->closing_ = true;
      if (self->outbox_.empty()) self->do_close(code);
      else self->close_code_ = code;
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec == websocket::error::message_too_big) {
        spdlog::warn("connection {}: frame larger than {} bytes, closing", self->id_, kMaxFrameBytes);
        self->finish();
        return;
      }
      if (ec) {
        self->finish();
        return;
      }
      if (!self->ws_.got_text()) {
        self->buffer_.consume(self->buffer_.size());
        self->send(encode(ErrorMsg{"malformed: binary frames are not accepted"}));
        self->read();
        return;
      }
      self->inbound_.push({self->id_, beast::buffers_to_string(self->buffer_.data())});
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) {
        self->write_next();
      } else if (self->closing_) {
        self->do_close(self->close_code_);
      }
    });
  }

  void do_close(websocket::close_code code) {
    ws_.async_close(code, [self = shared_from_this()](beast::error_code) { self->finish(); });
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    registry_.remove(id_);
    spdlog::info("connection {} closed", id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::uint64_t id_;
  InboundQueue& inbound_;
  Registry& registry_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool closing_ = false;
  bool finished_ = false;
  websocket::close_code close_code_ = websocket::close_code::normal;
};

}  // namespace

struct Server::Impl {
  Impl(ControlLoop& l, ServerOptions o)
      : loop(l), options(std::move(o)), acceptor(io, tcp::endpoint(asio::ip::make_address(options.address), options.port)) {}

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
        return;
      }
      std::make_shared<Connection>(std::move(socket), next_id++, inbound, registry)->start();
      accept();
    });
  }

  ControlLoop& loop;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  InboundQueue inbound;
  Registry registry;
  std::uint64_t next_id = 1;
  std::atomic<bool> stopping{false};
};

Server::Server(ControlLoop& loop, ServerOptions options) : impl_(std::make_unique<Impl>(loop, std::move(options))) {}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t Server::connection_count() const { return impl_->registry.size(); }

void Server::stop() { impl_->stopping = true; }

void Server::run() {
  Impl& s = *impl_;
  s.accept();
  auto guard = asio::make_work_guard(s.io);
  std::thread network([&s] { s.io.run(); });
  spdlog::info("listening on ws://{}:{}", s.options.address, port());

  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(s.loop.session().config().control_period()));
  const auto start = clock::now();
  auto next = start;
  while (!s.stopping) {
    if (s.options.duration > 0.0 && clock::now() - start >= std::chrono::duration<double>(s.options.duration)) break;
    for (auto& in : s.inbound.drain()) {
      InboundResult result = s.loop.handle_text(in.text);
      auto conn = s.registry.find(in.connection);
      if (!conn) continue;
      for (auto& reply : result.replies) conn->send(std::move(reply));
      if (result.close) conn->close(websocket::close_code::too_big);
    }
    auto frames = s.loop.tick();
    if (!frames.empty()) {
      for (auto& conn : s.registry.all()) {
        for (const auto& f : frames) conn->send(f);
      }
    }
    next += period;
    const auto now = clock::now();
    if (next < now - 10 * period) next = now;  // fell far behind; do not burst to catch up
    std::this_thread::sleep_until(next);
  }

  asio::post(s.io, [&s] {
    beast::error_code ec;
    s.acceptor.close(ec);
  });
  for (auto& conn : s.registry.all()) conn->close(websocket::close_code::going_away);
  guard.reset();
  // Give close handshakes a moment, then stop the reactor.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  s.io.stop();
  network.join();
  spdlog::info("server stopped after {} ticks", s.loop.session().tick_index());
}

}  // namespace haptibot
