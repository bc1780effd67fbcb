#include <gtest/gtest.h>

#include <random>

#include "fibqkd/wire/frame.hpp"
#include "fibqkd/wire/socket.hpp"

using namespace fibqkd;
using namespace fibqkd::wire;

namespace {

std::vector<std::uint8_t> hex(const std::string& s) {
  std::vector<std::uint8_t> out;
  std::string digits;
  for (char c : s)
    if (c != ' ') digits.push_back(c);
  for (std::size_t i = 0; i < digits.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoul(digits.substr(i, 2), nullptr, 16)));
  return out;
}

} // namespace

TEST(Frame, AliceBitExampleBytes) {
  const auto bytes = encode_message(BitMessage{MessageType::AliceBit1, 3, 1}, 7);
  EXPECT_EQ(bytes, hex("01 10 00000007 0005 00000003 01"));
  const auto r = decode_frame(bytes);
  ASSERT_EQ(r.status, DecodeStatus::Ok);
  EXPECT_EQ(r.consumed, bytes.size());
  EXPECT_EQ(r.frame.session_id, 7U);
  EXPECT_EQ(std::get<BitMessage>(from_frame(r.frame)), (BitMessage{MessageType::AliceBit1, 3, 1}));
}

TEST(Frame, TruncationNeedsMoreBytes) {
  EXPECT_EQ(decode_frame({}).status, DecodeStatus::NeedMoreBytes);
  const auto bytes = hex("01 10 00000007 0005 00000003 01");
  for (std::size_t n = 1; n < bytes.size(); ++n)
    EXPECT_EQ(decode_frame(std::span(bytes).first(n)).status, DecodeStatus::NeedMoreBytes) << n;
}

TEST(Frame, Rejections) {
  EXPECT_EQ(decode_frame(hex("02 10 00000007 0005 00000003 01")).status, DecodeStatus::UnsupportedVersion);
  EXPECT_EQ(decode_frame(hex("01 55 00000007 0005 00000003 01")).status, DecodeStatus::UnknownMessageType);
  EXPECT_EQ(decode_frame(hex("01 10 00000007 0006 00000003 0100")).status, DecodeStatus::BadLength);
  EXPECT_EQ(decode_frame(hex("01 10 00000007 0005 00000003 02")).status, DecodeStatus::BadPayload);
  EXPECT_EQ(decode_frame(hex("01 21 00000001 0005 00000003 07")).status, DecodeStatus::BadPayload);
}

TEST(Frame, HelloLayout) {
  Hello h;
  h.set_size = 8;
  h.window_lo = 4;
  h.window_hi = 15;
  h.convention = 1;
  h.check_fraction_ppm = 100000;
  h.feed_fingerprint = 0x0102030405060708ULL;
  h.rounds = 1000;
  const auto bytes = encode_message(h, 1);
  ASSERT_EQ(bytes.size(), kHeaderSize + kHelloPayload);
  EXPECT_EQ(bytes,
            hex("01 01 00000001 0018 0008 0004 000f 01 01 000186a0 0102030405060708 000003e8"));
  EXPECT_EQ(std::get<Hello>(from_frame(decode_frame(bytes).frame)), h);
}

TEST(Frame, ReaderSplitsAStream) {
  std::vector<std::uint8_t> stream;
  for (std::uint32_t r = 0; r < 5; ++r) {
    const auto b = encode_message(RoundOpen{r}, 9);
    stream.insert(stream.end(), b.begin(), b.end());
  }
  FrameReader reader;
  std::vector<std::uint32_t> seen;
  for (std::size_t i = 0; i < stream.size(); i += 3) {
    reader.feed(std::span(stream).subspan(i, std::min<std::size_t>(3, stream.size() - i)));
    while (auto f = reader.next()) seen.push_back(std::get<RoundOpen>(from_frame(*f)).round_id);
  }
  EXPECT_EQ(seen, (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(reader.buffered(), 0U);

  FrameReader bad;
  bad.feed(hex("02 10 00000007 0005 00000003 01"));
  EXPECT_THROW(bad.next(), FrameError);
}

// Codec bijection: random well-formed messages survive encode/decode, and the
// re-encoded bytes are identical.
TEST(Frame, RandomRoundTrip) {
  std::mt19937_64 gen(12345);
  auto u = [&](std::uint64_t m) { return gen() % m; };
  for (int i = 0; i < 5000; ++i) {
    Message m;
    switch (u(7)) {
      case 0: {
        Hello h;
        h.set_size = static_cast<std::uint16_t>(u(65536));
        h.window_lo = static_cast<std::uint16_t>(u(65536));
        h.window_hi = static_cast<std::uint16_t>(u(65536));
        h.convention = static_cast<std::uint8_t>(u(256));
        h.digest_alg = static_cast<std::uint8_t>(u(256));
        h.check_fraction_ppm = static_cast<std::uint32_t>(gen());
        h.feed_fingerprint = gen();
        h.rounds = static_cast<std::uint32_t>(gen());
        m = h;
        break;
      }
      case 1: m = RoundOpen{static_cast<std::uint32_t>(gen())}; break;
      case 2: {
        const MessageType types[] = {MessageType::AliceBit1, MessageType::BobResponse, MessageType::AliceBit2};
        m = BitMessage{types[u(3)], static_cast<std::uint32_t>(gen()), static_cast<Bit>(u(2))};
        break;
      }
      case 3: m = CheckReveal{static_cast<std::uint32_t>(gen()), gen(), gen()}; break;
      case 4: m = CheckResult{static_cast<std::uint32_t>(gen()), u(2) == 1}; break;
      case 5: {
        KeyConfirm k;
        for (auto& b : k.digest) b = static_cast<std::uint8_t>(u(256));
        m = k;
        break;
      }
      default: m = Abort{static_cast<AbortReason>(1 + u(6))}; break;
    }
    const auto sid = static_cast<std::uint32_t>(gen());
    const auto bytes = encode_message(m, sid);
    const auto r = decode_frame(bytes);
    ASSERT_EQ(r.status, DecodeStatus::Ok);
    EXPECT_EQ(r.frame.session_id, sid);
    EXPECT_EQ(from_frame(r.frame), m);
    EXPECT_EQ(encode_frame(r.frame), bytes);
  }
}

TEST(Endpoint, Parsing) {
  const auto ep = parse_endpoint("127.0.0.1:9000");
  EXPECT_EQ(ep.host, "127.0.0.1");
  EXPECT_EQ(ep.port, 9000);
  EXPECT_THROW(parse_endpoint("localhost"), ConfigError);
  EXPECT_THROW(parse_endpoint("localhost:99999"), ConfigError);
  EXPECT_THROW(parse_endpoint("localhost:abc"), ConfigError);
}
