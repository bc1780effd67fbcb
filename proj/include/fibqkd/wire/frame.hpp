#ifndef FIBQKD_WIRE_FRAME_HPP
#define FIBQKD_WIRE_FRAME_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fibqkd/key.hpp"
#include "fibqkd/report.hpp"
#include "fibqkd/tribonacci.hpp"

namespace fibqkd::wire {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 8;

enum class MessageType : std::uint8_t {
  Hello = 0x01,
  RoundOpen = 0x02,
  AliceBit1 = 0x10,
  BobResponse = 0x11,
  AliceBit2 = 0x12,
  CheckReveal = 0x20,
  CheckResult = 0x21,
  KeyConfirm = 0x30,
  Abort = 0xFF,
};

inline constexpr std::size_t kHelloPayload = 24;

/// Fixed payload length for each message type; nullopt for unknown types.
inline std::optional<std::size_t> payload_size(std::uint8_t type) noexcept {
  switch (static_cast<MessageType>(type)) {
    case MessageType::Hello: return kHelloPayload;
    case MessageType::RoundOpen: return 4;
    case MessageType::AliceBit1:
    case MessageType::BobResponse:
    case MessageType::AliceBit2: return 5;
    case MessageType::CheckReveal: return 20;
    case MessageType::CheckResult: return 5;
    case MessageType::KeyConfirm: return 32;
    case MessageType::Abort: return 1;
  }
  return std::nullopt;
}

inline const char* to_string(MessageType t) noexcept {
  switch (t) {
    case MessageType::Hello: return "HELLO";
    case MessageType::RoundOpen: return "ROUND_OPEN";
    case MessageType::AliceBit1: return "ALICE_BIT1";
    case MessageType::BobResponse: return "BOB_RESPONSE";
    case MessageType::AliceBit2: return "ALICE_BIT2";
    case MessageType::CheckReveal: return "CHECK_REVEAL";
    case MessageType::CheckResult: return "CHECK_RESULT";
    case MessageType::KeyConfirm: return "KEY_CONFIRM";
    case MessageType::Abort: return "ABORT";
  }
  return "UNKNOWN";
}

struct Frame {
  std::uint8_t version = kVersion;
  MessageType msg_type = MessageType::Hello;
  std::uint32_t session_id = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class DecodeStatus : std::uint8_t {
  Ok,
  NeedMoreBytes,
  UnsupportedVersion,
  UnknownMessageType,
  BadLength,
  BadPayload,
};

inline const char* to_string(DecodeStatus s) noexcept {
  switch (s) {
    case DecodeStatus::Ok: return "ok";
    case DecodeStatus::NeedMoreBytes: return "need-more-bytes";
    case DecodeStatus::UnsupportedVersion: return "unsupported-version";
    case DecodeStatus::UnknownMessageType: return "unknown-message-type";
    case DecodeStatus::BadLength: return "bad-length";
    case DecodeStatus::BadPayload: return "bad-payload";
  }
  return "?";
}

struct DecodeResult {
  DecodeStatus status = DecodeStatus::NeedMoreBytes;
  Frame frame;
  std::size_t consumed = 0;
};

class FrameError : public std::runtime_error {
public:
  explicit FrameError(DecodeStatus s)
      : std::runtime_error(std::string("frame decode: ") + to_string(s)), status(s) {}
  DecodeStatus status;
};

namespace be {

inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}
inline void put64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}
inline std::uint64_t get(std::span<const std::uint8_t> in, std::size_t off, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v = (v << 8) | in[off + i];
  return v;
}

} // namespace be

/// Payload-level checks beyond the length: bit fields must hold 0 or 1.
inline bool payload_valid(MessageType t, std::span<const std::uint8_t> p) noexcept {
  switch (t) {
    case MessageType::AliceBit1:
    case MessageType::BobResponse:
    case MessageType::AliceBit2:
    case MessageType::CheckResult: return p[4] <= 1;
    default: return true;
  }
}

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > 0xFFFF) throw std::length_error("frame payload exceeds 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + f.payload.size());
  out.push_back(f.version);
  out.push_back(static_cast<std::uint8_t>(f.msg_type));
  be::put32(out, f.session_id);
  be::put16(out, static_cast<std::uint16_t>(f.payload.size()));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

/// Decodes the first frame in a buffer. NeedMoreBytes leaves consumed at 0.
inline DecodeResult decode_frame(std::span<const std::uint8_t> in) {
  DecodeResult r;
  if (in.empty()) return r;
  if (in[0] != kVersion) {
    r.status = DecodeStatus::UnsupportedVersion;
    return r;
  }
  if (in.size() >= 2 && !payload_size(in[1])) {
    r.status = DecodeStatus::UnknownMessageType;
    return r;
  }
  if (in.size() < kHeaderSize) return r;
  const auto len = static_cast<std::size_t>(be::get(in, 6, 2));
  if (len != *payload_size(in[1])) {
    r.status = DecodeStatus::BadLength;
    return r;
  }
  if (in.size() < kHeaderSize + len) return r;
  const auto type = static_cast<MessageType>(in[1]);
  const auto payload = in.subspan(kHeaderSize, len);
  if (!payload_valid(type, payload)) {
    r.status = DecodeStatus::BadPayload;
    return r;
  }
  r.status = DecodeStatus::Ok;
  r.frame.version = in[0];
  r.frame.msg_type = type;
  r.frame.session_id = static_cast<std::uint32_t>(be::get(in, 2, 4));
  r.frame.payload.assign(payload.begin(), payload.end());
  r.consumed = kHeaderSize + len;
  return r;
}

// Typed messages ------------------------------------------------------------

struct Hello {
  std::uint16_t set_size = 0;
  std::uint16_t window_lo = 0;
  std::uint16_t window_hi = 0;
  std::uint8_t convention = 0;
  std::uint8_t digest_alg = static_cast<std::uint8_t>(DigestAlgorithm::Sha256);
  std::uint32_t check_fraction_ppm = 0;
  std::uint64_t feed_fingerprint = 0;
  std::uint32_t rounds = 0;
  friend bool operator==(const Hello&, const Hello&) = default;
};
struct RoundOpen {
  std::uint32_t round_id = 0;
  friend bool operator==(const RoundOpen&, const RoundOpen&) = default;
};
struct BitMessage {
  MessageType type = MessageType::AliceBit1;
  std::uint32_t round_id = 0;
  Bit bit = 0;
  friend bool operator==(const BitMessage&, const BitMessage&) = default;
};
struct CheckReveal {
  std::uint32_t round_id = 0;
  Value first = 0;
  Value second = 0;
  friend bool operator==(const CheckReveal&, const CheckReveal&) = default;
};
struct CheckResult {
  std::uint32_t round_id = 0;
  bool pass = false;
  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};
struct KeyConfirm {
  Digest digest{};
  friend bool operator==(const KeyConfirm&, const KeyConfirm&) = default;
};
struct Abort {
  AbortReason reason = AbortReason::None;
  friend bool operator==(const Abort&, const Abort&) = default;
};

using Message = std::variant<Hello, RoundOpen, BitMessage, CheckReveal, CheckResult, KeyConfirm, Abort>;

inline Frame to_frame(const Message& m, std::uint32_t session_id) {
  Frame f;
  f.session_id = session_id;
  auto& p = f.payload;
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          f.msg_type = MessageType::Hello;
          be::put16(p, msg.set_size);
          be::put16(p, msg.window_lo);
          be::put16(p, msg.window_hi);
          p.push_back(msg.convention);
          p.push_back(msg.digest_alg);
          be::put32(p, msg.check_fraction_ppm);
          be::put64(p, msg.feed_fingerprint);
          be::put32(p, msg.rounds);
        } else if constexpr (std::is_same_v<T, RoundOpen>) {
          f.msg_type = MessageType::RoundOpen;
          be::put32(p, msg.round_id);
        } else if constexpr (std::is_same_v<T, BitMessage>) {
          f.msg_type = msg.type;
          be::put32(p, msg.round_id);
          p.push_back(msg.bit);
        } else if constexpr (std::is_same_v<T, CheckReveal>) {
          f.msg_type = MessageType::CheckReveal;
          be::put32(p, msg.round_id);
          be::put64(p, msg.first);
          be::put64(p, msg.second);
        } else if constexpr (std::is_same_v<T, CheckResult>) {
          f.msg_type = MessageType::CheckResult;
          be::put32(p, msg.round_id);
          p.push_back(msg.pass ? 1 : 0);
        } else if constexpr (std::is_same_v<T, KeyConfirm>) {
          f.msg_type = MessageType::KeyConfirm;
          p.assign(msg.digest.begin(), msg.digest.end());
        } else {
          f.msg_type = MessageType::Abort;
          p.push_back(static_cast<std::uint8_t>(msg.reason));
        }
      },
      m);
  return f;
}

/// Interprets a decoded frame. Throws FrameError on a malformed payload.
inline Message from_frame(const Frame& f) {
  const auto expected = payload_size(static_cast<std::uint8_t>(f.msg_type));
  if (!expected) throw FrameError(DecodeStatus::UnknownMessageType);
  if (f.payload.size() != *expected) throw FrameError(DecodeStatus::BadLength);
  std::span<const std::uint8_t> p(f.payload);
  if (!payload_valid(f.msg_type, p)) throw FrameError(DecodeStatus::BadPayload);
  switch (f.msg_type) {
    case MessageType::Hello:
      return Hello{static_cast<std::uint16_t>(be::get(p, 0, 2)), static_cast<std::uint16_t>(be::get(p, 2, 2)),
                   static_cast<std::uint16_t>(be::get(p, 4, 2)), p[6], p[7],
                   static_cast<std::uint32_t>(be::get(p, 8, 4)), be::get(p, 12, 8),
                   static_cast<std::uint32_t>(be::get(p, 20, 4))};
    case MessageType::RoundOpen: return RoundOpen{static_cast<std::uint32_t>(be::get(p, 0, 4))};
    case MessageType::AliceBit1:
    case MessageType::BobResponse:
    case MessageType::AliceBit2: return BitMessage{f.msg_type, static_cast<std::uint32_t>(be::get(p, 0, 4)), p[4]};
    case MessageType::CheckReveal:
      return CheckReveal{static_cast<std::uint32_t>(be::get(p, 0, 4)), be::get(p, 4, 8), be::get(p, 12, 8)};
    case MessageType::CheckResult: return CheckResult{static_cast<std::uint32_t>(be::get(p, 0, 4)), p[4] == 1};
    case MessageType::KeyConfirm: {
      KeyConfirm k;
      std::copy(p.begin(), p.end(), k.digest.begin());
      return k;
    }
    case MessageType::Abort: return Abort{static_cast<AbortReason>(p[0])};
  }
  throw FrameError(DecodeStatus::UnknownMessageType);
}

inline std::vector<std::uint8_t> encode_message(const Message& m, std::uint32_t session_id) {
  return encode_frame(to_frame(m, session_id));
}

/// Accumulates stream bytes and yields complete frames.
class FrameReader {
public:
  void feed(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

  /// Next complete frame, nullopt if more bytes are needed. Throws FrameError
  /// on a malformed stream.
  std::optional<Frame> next() {
    DecodeResult r = decode_frame(buf_);
    if (r.status == DecodeStatus::NeedMoreBytes) return std::nullopt;
    if (r.status != DecodeStatus::Ok) throw FrameError(r.status);
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
    return std::move(r.frame);
  }

  std::size_t buffered() const noexcept { return buf_.size(); }

private:
  std::vector<std::uint8_t> buf_;
};

} // namespace fibqkd::wire

#endif // FIBQKD_WIRE_FRAME_HPP
