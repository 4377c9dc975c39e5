#include "cem/io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace cem {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

/// Calls `fn(record, line)` for each non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(line, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) fail(line, "expected a JSON object");
    fn(record, line);
  }
}

std::string string_field(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) fail(line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::vector<std::string> id_list(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_array()) fail(line, std::string("missing array field '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) fail(line, std::string("'") + key + "' must hold entity ids");
    out.push_back(v.get<std::string>());
  }
  return out;
}

EntityIndex lookup(const Instance& instance, const std::string& id, std::size_t line) {
  auto e = instance.find(id);
  if (!e) fail(line, "unknown entity '" + id + "'");
  return *e;
}

ordered_json ids_json(const Instance& instance, const EntitySet& members) {
  ordered_json arr = ordered_json::array();
  for (EntityIndex e : members) arr.push_back(instance.id(e));
  return arr;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

}  // namespace

Instance read_instance(std::istream& in) {
  Instance::Builder builder;
  for_each_record(in, [&](const json& r, std::size_t line) {
    if (r.contains("id")) {
      Entity e;
      e.id = string_field(r, "id", line);
      e.kind = r.contains("kind") ? string_field(r, "kind", line) : std::string();
      if (auto it = r.find("attrs"); it != r.end()) {
        if (!it->is_object()) fail(line, "'attrs' must be an object");
        for (const auto& [k, v] : it->items()) {
          if (!v.is_string()) fail(line, "attribute '" + k + "' must be a string");
          e.attributes[k] = v.get<std::string>();
        }
      }
      builder.add_entity(std::move(e));
    } else if (r.contains("rel")) {
      const std::string name = string_field(r, "rel", line);
      if (!r.contains("args")) {
        builder.declare_relation(name);
        return;
      }
      auto args = id_list(r, "args", line);
      int level = 0;
      if (auto it = r.find("level"); it != r.end()) {
        if (!it->is_number_integer()) fail(line, "'level' must be an integer");
        level = it->get<int>();
      }
      if (name == rel::kSimilar) {
        if (level < 1 || level > 3) fail(line, "Similar tuples need a level in 1..3");
      } else if (level != 0) {
        fail(line, "only Similar tuples take a level");
      }
      builder.add_tuple(name, std::move(args), level);
    } else {
      fail(line, "record is neither an entity nor a relation tuple");
    }
  });
  try {
    return std::move(builder).build();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

void write_instance(std::ostream& out, const Instance& instance) {
  for (const auto& e : instance.entities()) {
    ordered_json r;
    r["id"] = e.id;
    r["kind"] = e.kind;
    r["attrs"] = ordered_json::object();
    for (const auto& [k, v] : e.attributes) r["attrs"][k] = v;
    out << r.dump() << '\n';
  }
  for (const auto& relation : instance.relations().relations()) {
    if (relation.tuples.empty()) {
      ordered_json r;
      r["rel"] = relation.name;
      out << r.dump() << '\n';
      continue;
    }
    for (const auto& t : relation.tuples) {
      ordered_json r;
      r["rel"] = relation.name;
      r["args"] = ordered_json::array();
      for (EntityIndex e : t.args) r["args"].push_back(instance.id(e));
      if (t.level != 0) r["level"] = t.level;
      out << r.dump() << '\n';
    }
  }
}

std::vector<EntitySet> read_cover(std::istream& in, const Instance& instance) {
  std::vector<std::pair<std::size_t, EntitySet>> found;
  for_each_record(in, [&](const json& r, std::size_t line) {
    auto it = r.find("neighborhood");
    if (it == r.end() || !it->is_number_unsigned()) fail(line, "missing 'neighborhood' index");
    std::vector<EntityIndex> members;
    for (const auto& id : id_list(r, "members", line)) members.push_back(lookup(instance, id, line));
    if (members.empty()) fail(line, "empty neighborhood");
    found.emplace_back(it->get<std::size_t>(), EntitySet(std::move(members)));
  });
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<EntitySet> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i].first != i) throw FormatError("neighborhood indices must be 0..n-1 without gaps");
    out.push_back(std::move(found[i].second));
  }
  return out;
}

void write_cover(std::ostream& out, const Cover& cover, const Instance& instance) {
  for (const auto& n : cover.neighborhoods) {
    ordered_json r;
    r["neighborhood"] = n.id;
    r["members"] = ids_json(instance, n.members);
    out << r.dump() << '\n';
  }
}

GroundTruth read_truth(std::istream& in, const Instance& instance) {
  std::vector<std::vector<EntityIndex>> clusters;
  for_each_record(in, [&](const json& r, std::size_t line) {
    if (!r.contains("cluster")) fail(line, "missing 'cluster'");
    std::vector<EntityIndex> members;
    for (const auto& id : id_list(r, "members", line)) members.push_back(lookup(instance, id, line));
    clusters.push_back(std::move(members));
  });
  try {
    return GroundTruth(instance.size(), std::move(clusters));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

void write_truth(std::ostream& out, const GroundTruth& truth, const Instance& instance) {
  std::size_t k = 0;
  for (const auto& c : truth.clusters()) {
    ordered_json r;
    r["cluster"] = k++;
    r["members"] = ids_json(instance, EntitySet(c));
    out << r.dump() << '\n';
  }
}

MatchSet read_matches(std::istream& in, const Instance& instance) {
  MatchSet out;
  for_each_record(in, [&](const json& r, std::size_t line) {
    const auto ids = id_list(r, "match", line);
    if (ids.size() != 2 || ids[0] == ids[1]) fail(line, "a match names two distinct entities");
    out.insert(EntityPair::make(lookup(instance, ids[0], line), lookup(instance, ids[1], line)));
  });
  return out;
}

void write_matches(std::ostream& out, const MatchSet& matches, const Instance& instance) {
  for (const auto& p : matches) {
    ordered_json r;
    r["match"] = {instance.id(p.lo), instance.id(p.hi)};
    out << r.dump() << '\n';
  }
}

MatcherConfig read_config(std::istream& in) {
  MatcherConfig config;
  std::string text;
  std::string section;
  std::size_t line = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, text)) {
    ++line;
    // A '#' inside quotes is part of the value.
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '"') quoted = !quoted;
      if (text[i] == '#' && !quoted) {
        text.resize(i);
        break;
      }
    }
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(line, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!section.empty()) key = section + "." + key;
    config[key] = value;
  }
  return config;
}

Instance load_instance(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_instance(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

MatcherConfig load_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_config(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

}  // namespace cem
