#ifndef FIBQKD_REPORT_HPP
#define FIBQKD_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "fibqkd/protocol.hpp"

namespace fibqkd {

enum class AbortReason : std::uint8_t {
  None = 0,
  Tamper = 1,
  KeyMismatch = 2,
  ConfigMismatch = 3,
  OrderViolation = 4,
  Timeout = 5,
  PeerAbort = 6,
};

inline const char* to_string(AbortReason r) noexcept {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::Tamper: return "tamper";
    case AbortReason::KeyMismatch: return "key-mismatch";
    case AbortReason::ConfigMismatch: return "config-mismatch";
    case AbortReason::OrderViolation: return "order-violation";
    case AbortReason::Timeout: return "timeout";
    case AbortReason::PeerAbort: return "peer-abort";
  }
  return "unknown";
}

enum class SessionStatus : std::uint8_t { Completed, Aborted, TransportError };

inline const char* to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Aborted: return "aborted";
    case SessionStatus::TransportError: return "transport-error";
  }
  return "unknown";
}

/// One line of a session trace.
struct RoundTrace {
  std::uint64_t round_id = 0;
  Index n3 = 0;
  std::array<Index, 2> pair{};
  bool check_mode = false;
  std::optional<Transcript> transcript;
  std::optional<Index> deduced_pump;
  std::optional<std::string> segment;
  std::optional<bool> check_passed;
};

struct SessionReport {
  std::string role;
  SessionStatus status = SessionStatus::Completed;
  AbortReason abort_reason = AbortReason::None;
  std::string message;
  std::uint64_t rounds_completed = 0;
  std::uint64_t key_rounds = 0;
  std::uint64_t check_rounds = 0;
  std::uint64_t boundary_rounds = 0;
  std::uint64_t check_failures = 0;
  std::uint64_t key_bits = 0;
  std::string digest_hex;
  std::optional<bool> digests_match;
};

} // namespace fibqkd

#endif // FIBQKD_REPORT_HPP
