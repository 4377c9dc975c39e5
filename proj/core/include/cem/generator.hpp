#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cem/evaluation.hpp"
#include "cem/instance.hpp"

namespace cem {

/// Small deterministic generator on top of mt19937_64. Only the raw engine
/// output is used, so sequences are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [0, 1).
  double unit();
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

struct MutationOps {
  bool abbreviate_first = true;
  bool drop_char = true;
  bool swap_chars = true;
  bool substitute_char = true;
  bool drop_middle = true;

  bool any() const {
    return abbreviate_first || drop_char || swap_chars || substitute_char || drop_middle;
  }
};

struct GenConfig {
  /// Real-world authors.
  std::size_t authors = 100;
  /// Authors are grouped into communities that write together.
  std::size_t community_size = 6;
  /// Mean number of papers each author appears on, i.e. the mean number of
  /// references per author.
  double papers_per_author = 3.0;
  std::size_t max_authors_per_paper = 4;
  /// Probability that a paper cites each of up to two earlier papers of
  /// its community.
  double citation_probability = 0.5;
  /// Probability that one reference's name is mutated.
  double mutation_probability = 0.2;
  MutationOps ops;
  /// Share of authors given a middle name.
  double middle_name_probability = 0.3;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct Corpus {
  Instance instance;
  GroundTruth truth;
};

/// Synthetic bibliography: papers, one author reference per author slot,
/// Authored(reference, paper), Coauthor as the self-join of Authored on the
/// paper, and Cites between papers. No Similar tuples are produced. The
/// truth groups references of the same real author; papers are singletons.
Corpus generate(const GenConfig& config);

/// Applies one enabled mutation operator to a name (fname, mname, lname).
struct Name {
  std::string first;
  std::string middle;
  std::string last;
};
Name mutate(const Name& name, const MutationOps& ops, Rng& rng);

}  // namespace cem
