#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cem/score.hpp"
#include "cem/similarity.hpp"

namespace cem {

/// Predicate applied to variables, e.g. `Coauthor(x1,x2)` or `Similar(x,y,3)`.
struct Atom {
  std::string predicate;
  std::vector<std::string> vars;
  /// Only for Similar: restricts the tuple level.
  std::optional<int> level;

  bool is_match() const { return predicate == "Match"; }
  std::string to_string() const;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// `weight :: body => Match(x,y)`. A hard rule (weight `inf`) is only
/// accepted in the transitivity form and only when unsafe rules are allowed.
struct WeightedRule {
  std::vector<Atom> body;
  Atom head;
  LogScore weight;
  bool hard = false;

  /// Variables in first-appearance order (body, then head).
  std::vector<std::string> variables() const;
  std::size_t match_atoms_in_body() const;
  std::string to_string() const;
  friend bool operator==(const WeightedRule&, const WeightedRule&) = default;
};

struct RuleSetConfig {
  std::vector<WeightedRule> rules;
  SimilarityThresholds thresholds;

  bool has_transitivity() const;
};

/// Parses the declarative rule format:
///
///     # comment
///     sim.level3 = 0.95
///     -5 :: Similar(x,y) => Match(x,y)
///     8  :: Similar(x1,y1), Coauthor(x1,x2), Coauthor(y1,y2), Match(x2,y2) => Match(x1,y1)
///
/// Throws std::invalid_argument with the offending line number. Rules with
/// more than one Match atom in the body are always rejected. Hard rules and
/// negative-weight Match links are accepted only with `allow_unsafe`.
RuleSetConfig parse_rule_set(std::string_view text, bool allow_unsafe = false);
RuleSetConfig load_rule_set(const std::filesystem::path& path, bool allow_unsafe = false);
std::string format_rule_set(const RuleSetConfig& config);

/// {R1: -5, R2: +8}.
std::string_view running_example_rules_text();
/// The four learned-weight rules (-2.28, -3.84, 12.75, 2.46).
std::string_view learned_rules_text();

/// "running-example", "learned", or a path to a rule file.
RuleSetConfig rule_set_by_name(std::string_view name_or_path, bool allow_unsafe = false);

}  // namespace cem
