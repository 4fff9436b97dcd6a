#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

namespace vb {

// Probability distribution over w-bit strings.  Keys are basis indices with
// qubit i at bit i; absent keys carry probability zero.  The ordered map keeps
// every iteration order deterministic.
struct Distribution {
  int width = 0;
  std::map<std::uint64_t, double> probs;

  double prob(std::uint64_t key) const {
    auto it = probs.find(key);
    return it == probs.end() ? 0.0 : it->second;
  }

  double total_mass() const {
    double s = 0;
    for (const auto& [k, p] : probs) s += p;
    return s;
  }
};

inline double total_variation_distance(const Distribution& a,
                                       const Distribution& b) {
  double s = 0;
  for (const auto& [k, p] : a.probs) s += std::abs(p - b.prob(k));
  for (const auto& [k, p] : b.probs)
    if (!a.probs.count(k)) s += std::abs(p);
  return 0.5 * s;
}

// "0101"-style key rendering; character i is qubit i.
inline std::string bitstring_of(std::uint64_t key, int width) {
  std::string s(width, '0');
  for (int i = 0; i < width; ++i)
    if (key >> i & 1) s[i] = '1';
  return s;
}

inline std::uint64_t key_of_bitstring(const std::string& s) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == '1') key |= std::uint64_t{1} << i;
  return key;
}

}  // namespace vb
