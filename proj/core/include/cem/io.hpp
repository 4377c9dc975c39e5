#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cem/covering.hpp"
#include "cem/evaluation.hpp"
#include "cem/instance.hpp"
#include "cem/matcher.hpp"

namespace cem {

/// Malformed input file. The message carries the line number.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Instance JSON lines:
///
///     {"id":"a1","kind":"author","attrs":{"fname":"ann","lname":"lee"}}
///     {"rel":"Coauthor","args":["a1","b2"]}
///     {"rel":"Similar","args":["a1","a2"],"level":2}
///     {"rel":"Cites"}                      (declares an empty relation)
///
/// Records may come in any order. Output is canonical (entities by id, then
/// relations by name with sorted tuples), so write(read(x)) is stable.
Instance read_instance(std::istream& in);
void write_instance(std::ostream& out, const Instance& instance);

/// {"neighborhood":0,"members":["a1","a2"]}, one per line.
std::vector<EntitySet> read_cover(std::istream& in, const Instance& instance);
void write_cover(std::ostream& out, const Cover& cover, const Instance& instance);

/// {"cluster":0,"members":["r1","r7"]}, one per line.
GroundTruth read_truth(std::istream& in, const Instance& instance);
void write_truth(std::ostream& out, const GroundTruth& truth, const Instance& instance);

/// {"match":["a1","a2"]}, one per line, pairs in canonical order.
MatchSet read_matches(std::istream& in, const Instance& instance);
void write_matches(std::ostream& out, const MatchSet& matches, const Instance& instance);

/// TOML-style `key = value` lines. `[section]` headers prefix the following
/// keys with "section."; values may be quoted; `#` starts a comment.
MatcherConfig read_config(std::istream& in);

/// File helpers; throw FormatError naming the path when it cannot be opened.
Instance load_instance(const std::filesystem::path& path);
MatcherConfig load_config(const std::filesystem::path& path);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cem
