#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace banyan {

/// 32-byte SHA-256 digest. The all-zero value is reserved as "no hash".
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  bool is_zero() const;
  std::string hex() const;
  /// First 8 hex characters, for logs.
  std::string short_hex() const { return hex().substr(0, 8); }

  static Digest from_hex(std::string_view hex);

  auto operator<=>(const Digest&) const = default;
  bool operator==(const Digest&) const = default;
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h;
    std::memcpy(&h, d.bytes.data(), sizeof(h));
    return h;
  }
};

Digest sha256(std::span<const std::uint8_t> data);

/// Incremental SHA-256.
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  void update(std::span<const std::uint8_t> data);
  Digest finish();

 private:
  void* ctx_;
};

/// Little-endian fixed-width writer used for every canonical encoding
/// (block headers, votes, trace records).
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u32(std::uint32_t v) { return le(v); }
  ByteWriter& u64(std::uint64_t v) { return le(v); }
  ByteWriter& i64(std::int64_t v) { return le(static_cast<std::uint64_t>(v)); }
  ByteWriter& digest(const Digest& d) {
    buf_.insert(buf_.end(), d.bytes.begin(), d.bytes.end());
    return *this;
  }
  ByteWriter& str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
    return *this;
  }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  void clear() { buf_.clear(); }

 private:
  template <typename T>
  ByteWriter& le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    return *this;
  }

  std::vector<std::uint8_t> buf_;
};

/// splitmix64 finalizer; the building block for every seeded derivation in
/// the simulator so results never depend on std:: distribution internals.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

/// Small deterministic PRNG (splitmix64 stream).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

}  // namespace banyan
