#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "cem/instance.hpp"

namespace cem {

double jaro(std::string_view a, std::string_view b);

/// Jaro-Winkler similarity in [0, 1] with the usual common-prefix boost
/// (prefix capped at 4 characters, scale 0.1).
double jaro_winkler(std::string_view a, std::string_view b);

/// Upper bound on jaro_winkler() for any strings of these lengths. Used to
/// skip comparisons during blocking.
double jaro_winkler_bound(std::size_t len_a, std::size_t len_b);

/// Character histogram (32 buckets) of a string. Two strings cannot share
/// more matching characters than the bucket-wise minimum of their profiles.
struct CharProfile {
  std::array<std::uint8_t, 32> counts{};
  std::size_t length = 0;

  CharProfile() = default;
  explicit CharProfile(std::string_view s);
};

/// Upper bound on jaro_winkler() from the two profiles alone.
double jaro_winkler_bound(const CharProfile& a, const CharProfile& b);

/// Thresholds mapping raw similarity to the discrete levels 1..3.
struct SimilarityThresholds {
  double level3 = 0.95;
  double level2 = 0.88;
  double level1 = 0.80;

  /// Throws std::invalid_argument unless 0 <= level1 <= level2 <= level3 <= 1.
  void validate() const;
  /// 0 means "not similar" (no tuple is produced).
  int level(double similarity) const;
};

/// Lower-cased "lname fname [mname]" of an author entity (surname first, so the
/// prefix boost rewards agreeing surnames), or its "name"
/// attribute. Throws std::invalid_argument when no name attribute exists.
std::string author_name(const Entity& author);

/// Similarity level of two authors in {0,1,2,3}; symmetric.
int discretize_similarity(const Entity& a, const Entity& b,
                          const SimilarityThresholds& thresholds = {});

}  // namespace cem
