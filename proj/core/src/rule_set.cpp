#include "cem/rule_set.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cem/instance.hpp"

namespace cem {
namespace {

constexpr std::string_view kRunningExample =
    "# Two-rule model of the running example.\n"
    "-5 :: Similar(x,y) => Match(x,y)\n"
    "8 :: Similar(x1,y1), Coauthor(x1,x2), Coauthor(y1,y2), Match(x2,y2) => Match(x1,y1)\n";

// The coauthor rule carries Similar(x,y) so that only similar author pairs
// become candidates.
constexpr std::string_view kLearned =
    "# Learned weights for the bibliography model.\n"
    "sim.level3 = 0.95\n"
    "sim.level2 = 0.88\n"
    "sim.level1 = 0.80\n"
    "-2.28 :: Similar(x,y,1) => Match(x,y)\n"
    "-3.84 :: Similar(x,y,2) => Match(x,y)\n"
    "12.75 :: Similar(x,y,3) => Match(x,y)\n"
    "2.46 :: Similar(x,y), Coauthor(x,c1), Coauthor(y,c2), Match(c1,c2) => Match(x,y)\n";

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::invalid_argument("rule set line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view text, std::size_t line) {
  std::string s(trim(text));
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(line, "not a number: '" + s + "'");
  }
  if (used != s.size()) fail(line, "not a number: '" + s + "'");
  return v;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

Atom parse_atom(std::string_view text, std::size_t line) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') fail(line, "malformed atom '" + std::string(text) + "'");
  Atom atom;
  atom.predicate = std::string(trim(text.substr(0, open)));
  if (!is_identifier(atom.predicate)) fail(line, "bad predicate '" + atom.predicate + "'");
  std::string_view args = text.substr(open + 1, text.size() - open - 2);
  std::vector<std::string> parts;
  while (true) {
    const auto comma = args.find(',');
    parts.emplace_back(trim(args.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    args = args.substr(comma + 1);
  }
  if (atom.predicate == rel::kSimilar && parts.size() == 3) {
    const double lvl = parse_number(parts.back(), line);
    if (lvl != 1 && lvl != 2 && lvl != 3) fail(line, "Similar level must be 1, 2 or 3");
    atom.level = static_cast<int>(lvl);
    parts.pop_back();
  }
  if (parts.size() != 2) fail(line, atom.predicate + " must have two variables");
  for (const auto& p : parts) {
    if (!is_identifier(p)) fail(line, "bad variable '" + p + "'");
  }
  atom.vars = std::move(parts);
  return atom;
}

std::vector<std::string_view> split_body(std::string_view body) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == ',' || c == '^')) {
      out.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(body.substr(start));
  return out;
}

void validate_transitivity(const WeightedRule& r, std::size_t line) {
  if (r.body.size() != 2 || !r.body[0].is_match() || !r.body[1].is_match()) {
    fail(line, "hard rules must be Match(a,b), Match(b,c) => Match(a,c)");
  }
  std::set<std::string> first(r.body[0].vars.begin(), r.body[0].vars.end());
  std::set<std::string> second(r.body[1].vars.begin(), r.body[1].vars.end());
  std::vector<std::string> shared;
  std::set_intersection(first.begin(), first.end(), second.begin(), second.end(),
                        std::back_inserter(shared));
  if (first.size() != 2 || second.size() != 2 || shared.size() != 1) {
    fail(line, "hard rule body must chain two Match atoms through one variable");
  }
  std::set<std::string> ends;
  for (const auto& v : first) if (v != shared[0]) ends.insert(v);
  for (const auto& v : second) if (v != shared[0]) ends.insert(v);
  std::set<std::string> head(r.head.vars.begin(), r.head.vars.end());
  if (head != ends) fail(line, "hard rule head must join the chain ends");
}

void validate_soft(const WeightedRule& r, std::size_t line, bool allow_unsafe) {
  if (r.match_atoms_in_body() > 1) {
    fail(line, "at most one Match atom is allowed in a rule body");
  }
  // A negative weight on a Match-to-Match link penalizes agreeing decisions,
  // which loses supermodularity.
  if (r.match_atoms_in_body() == 1 && r.weight < LogScore{} && !allow_unsafe) {
    fail(line, "rules with a Match atom in the body need a non-negative weight");
  }
  std::set<std::string> bound;
  for (const auto& a : r.body) {
    if (!a.is_match()) bound.insert(a.vars.begin(), a.vars.end());
  }
  for (const auto& a : r.body) {
    if (a.level && a.predicate != rel::kSimilar) fail(line, "only Similar takes a level");
    if (!a.is_match()) continue;
    for (const auto& v : a.vars) {
      if (!bound.count(v)) fail(line, "Match variable '" + v + "' is not bound by a relation atom");
    }
  }
  for (const auto& v : r.head.vars) {
    if (!bound.count(v)) fail(line, "head variable '" + v + "' does not appear in the body");
  }
}

WeightedRule parse_rule(std::string_view text, std::size_t line, bool allow_unsafe) {
  const auto sep = text.find("::");
  const auto arrow = text.find("=>");
  if (arrow == std::string_view::npos || arrow < sep) fail(line, "expected 'weight :: body => head'");
  WeightedRule rule;
  const auto weight_text = trim(text.substr(0, sep));
  if (weight_text == "inf" || weight_text == "+inf") {
    rule.hard = true;
  } else {
    rule.weight = LogScore::from_double(parse_number(weight_text, line));
  }
  const auto body_text = trim(text.substr(sep + 2, arrow - sep - 2));
  if (body_text.empty()) fail(line, "empty rule body");
  for (auto part : split_body(body_text)) rule.body.push_back(parse_atom(part, line));
  rule.head = parse_atom(text.substr(arrow + 2), line);
  if (!rule.head.is_match()) fail(line, "rule head must be a Match atom");
  if (rule.head.vars[0] == rule.head.vars[1]) fail(line, "reflexive rule head");
  if (rule.hard) {
    if (!allow_unsafe) fail(line, "hard (transitivity) rules are not monotone; enable unsafe rules");
    validate_transitivity(rule, line);
  } else {
    validate_soft(rule, line, allow_unsafe);
  }
  return rule;
}

std::string format_weight(LogScore w) {
  std::ostringstream os;
  const auto units = w.units();
  const auto whole = units / LogScore::kUnitsPerOne;
  auto frac = std::abs(units % LogScore::kUnitsPerOne);
  if (units < 0 && whole == 0) os << '-';
  os << whole;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    os << '.' << digits;
  }
  return os.str();
}

}  // namespace

std::string Atom::to_string() const {
  std::string out = predicate + "(" + vars.at(0) + "," + vars.at(1);
  if (level) out += "," + std::to_string(*level);
  return out + ")";
}

std::vector<std::string> WeightedRule::variables() const {
  std::vector<std::string> out;
  auto visit = [&](const Atom& a) {
    for (const auto& v : a.vars) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  };
  for (const auto& a : body) visit(a);
  visit(head);
  return out;
}

std::size_t WeightedRule::match_atoms_in_body() const {
  return static_cast<std::size_t>(
      std::count_if(body.begin(), body.end(), [](const Atom& a) { return a.is_match(); }));
}

std::string WeightedRule::to_string() const {
  std::string out = hard ? "inf" : format_weight(weight);
  out += " :: ";
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i) out += ", ";
    out += body[i].to_string();
  }
  return out + " => " + head.to_string();
}

bool RuleSetConfig::has_transitivity() const {
  return std::any_of(rules.begin(), rules.end(), [](const WeightedRule& r) { return r.hard; });
}

RuleSetConfig parse_rule_set(std::string_view text, bool allow_unsafe) {
  RuleSetConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find("::") != std::string_view::npos) {
      config.rules.push_back(parse_rule(line, line_no, allow_unsafe));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected a rule or 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const double value = parse_number(line.substr(eq + 1), line_no);
    if (key == "sim.level3") {
      config.thresholds.level3 = value;
    } else if (key == "sim.level2") {
      config.thresholds.level2 = value;
    } else if (key == "sim.level1") {
      config.thresholds.level1 = value;
    } else {
      fail(line_no, "unknown setting '" + std::string(key) + "'");
    }
  }
  config.thresholds.validate();
  return config;
}

RuleSetConfig load_rule_set(const std::filesystem::path& path, bool allow_unsafe) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open rule file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_rule_set(buffer.str(), allow_unsafe);
}

std::string format_rule_set(const RuleSetConfig& config) {
  std::ostringstream os;
  os << "sim.level3 = " << config.thresholds.level3 << "\n"
     << "sim.level2 = " << config.thresholds.level2 << "\n"
     << "sim.level1 = " << config.thresholds.level1 << "\n";
  for (const auto& r : config.rules) os << r.to_string() << "\n";
  return os.str();
}

std::string_view running_example_rules_text() { return kRunningExample; }
std::string_view learned_rules_text() { return kLearned; }

RuleSetConfig rule_set_by_name(std::string_view name_or_path, bool allow_unsafe) {
  if (name_or_path == "running-example") return parse_rule_set(kRunningExample, allow_unsafe);
  if (name_or_path == "learned") return parse_rule_set(kLearned, allow_unsafe);
  return load_rule_set(std::filesystem::path(name_or_path), allow_unsafe);
}

}  // namespace cem
