#include "tipcast/random.hpp"

#include <cmath>
#include <vector>

#include "tipcast/errors.hpp"

namespace tipcast {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  const auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double sample_triangular(Rng& rng, double lo, double mode, double hi) {
  if (!(lo <= mode && mode <= hi) || !(lo < hi)) {
    throw ArgumentError("sample_triangular: require lo <= mode <= hi and lo < hi");
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double split = (mode - lo) / (hi - lo);
  if (u < split) return lo + std::sqrt(u * (hi - lo) * (mode - lo));
  return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
}

std::uint64_t uniform_integer(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) throw ArgumentError("uniform_integer: empty range");
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace tipcast
