#include "cem/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <vector>

namespace cem {

double jaro(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  if (a == b) return 1.0;

  const std::size_t window = std::max<std::size_t>(std::max(a.size(), b.size()) / 2, 1) - 1;
  std::vector<char> a_hit(a.size(), 0);
  std::vector<char> b_hit(b.size(), 0);

  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_hit[j] && a[i] == b[j]) {
        a_hit[i] = b_hit[j] = 1;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < a.size(); ++i) {
    if (!a_hit[i]) continue;
    while (!b_hit[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions / 2);
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) /
         3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  const std::size_t cap = std::min<std::size_t>({4, a.size(), b.size()});
  while (prefix < cap && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

double jaro_winkler_bound(std::size_t len_a, std::size_t len_b) {
  if (len_a == 0 || len_b == 0) return len_a == len_b ? 1.0 : 0.0;
  const double m = static_cast<double>(std::min(len_a, len_b));
  const double j = (m / static_cast<double>(len_a) + m / static_cast<double>(len_b) + 1.0) / 3.0;
  return j + 0.4 * (1.0 - j);
}

CharProfile::CharProfile(std::string_view s) : length(s.size()) {
  for (unsigned char c : s) {
    auto& n = counts[c & 31u];
    if (n < 255) ++n;
  }
}

double jaro_winkler_bound(const CharProfile& a, const CharProfile& b) {
  if (a.length == 0 || b.length == 0) return a.length == b.length ? 1.0 : 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) m += std::min(a.counts[i], b.counts[i]);
  m = std::min({m, a.length, b.length});
  if (m == 0) return 0.0;
  const double md = static_cast<double>(m);
  const double j =
      (md / static_cast<double>(a.length) + md / static_cast<double>(b.length) + 1.0) / 3.0;
  return j + 0.4 * (1.0 - j);
}

void SimilarityThresholds::validate() const {
  if (!(0.0 <= level1 && level1 <= level2 && level2 <= level3 && level3 <= 1.0)) {
    throw std::invalid_argument("similarity thresholds must satisfy 0 <= l1 <= l2 <= l3 <= 1");
  }
}

int SimilarityThresholds::level(double similarity) const {
  if (similarity >= level3) return 3;
  if (similarity >= level2) return 2;
  if (similarity >= level1) return 1;
  return 0;
}

std::string author_name(const Entity& author) {
  std::string out;
  auto append = [&](const std::string* part) {
    if (!part || part->empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += *part;
  };
  if (const auto* full = author.attribute("name")) {
    append(full);
  } else {
    const auto* fname = author.attribute("fname");
    const auto* lname = author.attribute("lname");
    if (!fname && !lname) {
      throw std::invalid_argument("entity " + author.id + " has no name attributes");
    }
    append(lname);
    append(fname);
    append(author.attribute("mname"));
  }
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int discretize_similarity(const Entity& a, const Entity& b,
                          const SimilarityThresholds& thresholds) {
  const std::string na = author_name(a);
  const std::string nb = author_name(b);
  // Jaro-Winkler is not exactly symmetric in floating point for every input
  // ordering, so evaluate in a fixed order.
  const double sim = na <= nb ? jaro_winkler(na, nb) : jaro_winkler(nb, na);
  return thresholds.level(sim);
}

}  // namespace cem
