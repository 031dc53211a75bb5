#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kgtext {

// Reserved tokens of the linear graph encoding. Bit-exact, case-sensitive.
inline constexpr std::string_view kSep = "SEP";
inline constexpr std::string_view kEof = "EOF";
inline constexpr std::string_view kBlanked = "BLANKED";
inline constexpr std::string_view kAttr = "attr";

inline bool is_reserved_token(std::string_view tok) {
  return tok == kSep || tok == kEof || tok == kBlanked;
}

// FNV-1a, used for vocab hashes and substream derivation.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t x, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<unsigned char>(x >> (8 * i));
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && !(s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r')) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string join_ws(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

// Deterministic RNG with hand-rolled draw primitives. std::*_distribution is
// implementation-defined, so all sampling goes through these to keep results
// identical across platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // splitmix warmup so nearby seeds decorrelate
    for (int i = 0; i < 4; ++i) next_u64();
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n); n > 0
  std::size_t uniform_int(std::size_t n) {
    std::uint64_t mask = n - 1;
    mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
    mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < n) return static_cast<std::size_t>(v);
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

// Named substream derivation: all randomness flows from one config seed
// through (name, index) so parallel work stays deterministic.
inline Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  std::uint64_t h = fnv1a(name, fnv1a_u64(seed));
  return Rng(fnv1a_u64(index, h));
}

}  // namespace kgtext
