#ifndef FIBQKD_WIRE_TRANSPORT_HPP
#define FIBQKD_WIRE_TRANSPORT_HPP

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>

#include "fibqkd/wire/frame.hpp"

namespace fibqkd::wire {

class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public TransportError {
public:
  TimeoutError() : TransportError("transport: receive timed out") {}
};

/// Duplex byte stream.
class Transport {
public:
  virtual ~Transport() = default;

  virtual void send(std::span<const std::uint8_t> bytes) = 0;

  /// Blocks until some bytes arrive. Returns 0 once the peer has closed and
  /// everything was drained; throws TimeoutError when nothing arrives in time.
  virtual std::size_t receive(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) = 0;

  virtual void close() = 0;
};

namespace detail {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> bytes;
  bool closed = false;
};

class LoopbackEnd final : public Transport {
public:
  LoopbackEnd(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~LoopbackEnd() override { close(); }

  void send(std::span<const std::uint8_t> bytes) override {
    {
      std::lock_guard lk(out_->mu);
      if (out_->closed) throw TransportError("loopback: send on closed pipe");
      out_->bytes.insert(out_->bytes.end(), bytes.begin(), bytes.end());
    }
    out_->cv.notify_all();
  }

  std::size_t receive(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) override {
    std::unique_lock lk(in_->mu);
    if (!in_->cv.wait_for(lk, timeout, [&] { return !in_->bytes.empty() || in_->closed; })) throw TimeoutError();
    std::size_t n = 0;
    while (n < buf.size() && !in_->bytes.empty()) {
      buf[n++] = in_->bytes.front();
      in_->bytes.pop_front();
    }
    return n;
  }

  void close() override {
    for (auto* p : {in_.get(), out_.get()}) {
      {
        std::lock_guard lk(p->mu);
        p->closed = true;
      }
      p->cv.notify_all();
    }
  }

private:
  std::shared_ptr<Pipe> in_;
  std::shared_ptr<Pipe> out_;
};

} // namespace detail

/// Two connected in-process endpoints.
inline std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair() {
  auto a_to_b = std::make_shared<detail::Pipe>();
  auto b_to_a = std::make_shared<detail::Pipe>();
  return {std::make_unique<detail::LoopbackEnd>(b_to_a, a_to_b), std::make_unique<detail::LoopbackEnd>(a_to_b, b_to_a)};
}

/// Decorator that rewrites outgoing frames, for fault injection.
class TamperingTransport final : public Transport {
public:
  using Mutator = std::function<void(Frame&)>;

  TamperingTransport(Transport& inner, Mutator mutate) : inner_(inner), mutate_(std::move(mutate)) {}

  void send(std::span<const std::uint8_t> bytes) override {
    reader_.feed(bytes);
    while (auto f = reader_.next()) {
      mutate_(*f);
      const auto out = encode_frame(*f);
      inner_.send(out);
    }
  }

  std::size_t receive(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) override {
    return inner_.receive(buf, timeout);
  }

  void close() override { inner_.close(); }

private:
  Transport& inner_;
  Mutator mutate_;
  FrameReader reader_;
};

} // namespace fibqkd::wire

#endif // FIBQKD_WIRE_TRANSPORT_HPP
