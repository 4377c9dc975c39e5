#include "cem/generator.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <set>
#include <stdexcept>

namespace cem {
namespace {

constexpr std::array<const char*, 48> kFirst = {
    "aaron",  "alice",   "amir",   "anna",    "boris",   "carla",  "chen",    "daniel",
    "diana",  "elena",   "emil",   "farah",   "felix",   "gwen",   "hannah",  "hugo",
    "irene",  "ivan",    "jonas",  "julia",   "kamal",   "karin",  "leon",    "lucia",
    "marco",  "maria",   "mehmet", "nadia",   "nikolai", "olga",   "omar",    "paula",
    "pedro",  "qing",    "rafael", "rosa",    "samuel",  "sofia",  "tariq",   "teresa",
    "ulrich", "vera",    "victor", "wendy",   "xavier",  "yusuf",  "zelda",   "zoran"};

// Surnames are built from syllables so that large corpora do not run out of
// distinct names.
constexpr std::array<const char*, 40> kSyllables = {
    "ba", "ber", "cha", "da",  "del", "do",  "fen", "ga",  "gor", "ha",
    "ki", "kov", "la",  "len", "lo",  "ma",  "mir", "na",  "nov", "o",
    "pa", "per", "ra",  "ri",  "ros", "sa",  "sen", "ta",  "ter", "to",
    "u",  "va",  "ver", "wa",  "xi",  "ya",  "zan", "zo",  "tan", "quin"};

std::string surname(Rng& rng) {
  std::string out;
  const std::size_t parts = 2 + rng.below(2);
  for (std::size_t i = 0; i < parts; ++i) out += kSyllables[rng.below(kSyllables.size())];
  return out;
}

constexpr const char* kLetters = "abcdefghijklmnopqrstuvwxyz";

std::string pad(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::size_t digits(std::size_t n) { return std::to_string(n == 0 ? 0 : n - 1).size(); }

}  // namespace

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below needs a positive bound");
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

void GenConfig::validate() const {
  auto probability = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0,1]");
  };
  if (authors == 0) throw std::invalid_argument("authors must be positive");
  if (community_size == 0) throw std::invalid_argument("community_size must be positive");
  if (!(papers_per_author > 0.0)) throw std::invalid_argument("papers_per_author must be positive");
  if (max_authors_per_paper == 0) throw std::invalid_argument("max_authors_per_paper must be positive");
  probability(citation_probability, "citation_probability");
  probability(mutation_probability, "mutation_probability");
  probability(middle_name_probability, "middle_name_probability");
  if (mutation_probability > 0 && !ops.any()) {
    throw std::invalid_argument("mutation needs at least one operator");
  }
}

Name mutate(const Name& name, const MutationOps& ops, Rng& rng) {
  enum Op { kAbbrev, kDrop, kSwap, kSubst, kMiddle };
  std::vector<Op> usable;
  if (ops.abbreviate_first && name.first.size() > 1) usable.push_back(kAbbrev);
  if (ops.drop_char && name.last.size() > 2) usable.push_back(kDrop);
  if (ops.swap_chars && name.last.size() > 1) usable.push_back(kSwap);
  if (ops.substitute_char && !name.last.empty()) usable.push_back(kSubst);
  if (ops.drop_middle && !name.middle.empty()) usable.push_back(kMiddle);
  Name out = name;
  if (usable.empty()) return out;
  switch (usable[rng.below(usable.size())]) {
    case kAbbrev:
      out.first = out.first.substr(0, 1) + ".";
      break;
    case kDrop:
      out.last.erase(rng.below(out.last.size()), 1);
      break;
    case kSwap: {
      const auto i = rng.below(out.last.size() - 1);
      std::swap(out.last[i], out.last[i + 1]);
      break;
    }
    case kSubst: {
      const auto i = rng.below(out.last.size());
      char c = kLetters[rng.below(26)];
      if (c == out.last[i]) c = c == 'z' ? 'a' : static_cast<char>(c + 1);
      out.last[i] = c;
      break;
    }
    case kMiddle:
      out.middle.clear();
      break;
  }
  return out;
}

Corpus generate(const GenConfig& config) {
  config.validate();
  Rng rng(config.seed);

  // Unique real names, so that unmutated references cluster by name.
  std::vector<Name> names;
  std::set<std::string> taken;
  while (names.size() < config.authors) {
    Name n{kFirst[rng.below(kFirst.size())], "", surname(rng)};
    if (rng.chance(config.middle_name_probability)) n.middle = std::string(1, kLetters[rng.below(26)]);
    std::string key = n.first + " " + n.middle + " " + n.last;
    if (taken.count(key)) {
      // Widen the space with a suffix instead of looping forever.
      n.last += kLetters[rng.below(26)];
      key = n.first + " " + n.middle + " " + n.last;
      if (taken.count(key)) continue;
    }
    taken.insert(key);
    names.push_back(std::move(n));
  }

  const std::size_t communities = (config.authors + config.community_size - 1) / config.community_size;
  const double mean_slots = (1.0 + static_cast<double>(config.max_authors_per_paper)) / 2.0;
  const auto paper_count = static_cast<std::size_t>(
      static_cast<double>(config.authors) * config.papers_per_author / mean_slots + 0.5);

  struct Paper {
    std::size_t community;
    std::vector<std::size_t> authors;
  };
  std::vector<Paper> papers;
  std::vector<std::vector<std::size_t>> papers_of_community(communities);
  for (std::size_t p = 0; p < std::max<std::size_t>(paper_count, 1); ++p) {
    const std::size_t c = rng.below(communities);
    const std::size_t first = c * config.community_size;
    const std::size_t size = std::min(config.community_size, config.authors - first);
    std::vector<std::size_t> pool(size);
    for (std::size_t i = 0; i < size; ++i) pool[i] = first + i;
    const std::size_t k = 1 + rng.below(std::min(config.max_authors_per_paper, size));
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(size - i)]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    papers_of_community[c].push_back(papers.size());
    papers.push_back({c, std::move(pool)});
  }

  const std::size_t pw = digits(papers.size());
  Instance::Builder builder;
  builder.declare_relation(rel::kAuthored)
      .declare_relation(rel::kCoauthor)
      .declare_relation(rel::kCites)
      .declare_relation(rel::kSimilar);
  std::vector<std::vector<std::string>> refs_of_author(config.authors);
  for (std::size_t p = 0; p < papers.size(); ++p) {
    const std::string pid = "p" + pad(p, pw);
    builder.add_entity(Entity{pid, "paper", {{"title", "paper " + std::to_string(p)}}});
    std::vector<std::string> slot_ids;
    for (std::size_t s = 0; s < papers[p].authors.size(); ++s) {
      const std::size_t a = papers[p].authors[s];
      Name n = names[a];
      if (rng.chance(config.mutation_probability)) n = mutate(n, config.ops, rng);
      Entity ref{"r" + pad(p, pw) + "." + std::to_string(s), "author", {}};
      ref.attributes["fname"] = n.first;
      if (!n.middle.empty()) ref.attributes["mname"] = n.middle;
      ref.attributes["lname"] = n.last;
      builder.add_entity(ref);
      builder.add_tuple(rel::kAuthored, {ref.id, pid});
      refs_of_author[a].push_back(ref.id);
      slot_ids.push_back(ref.id);
    }
    for (std::size_t i = 0; i < slot_ids.size(); ++i) {
      for (std::size_t j = i + 1; j < slot_ids.size(); ++j) {
        builder.add_tuple(rel::kCoauthor, {slot_ids[i], slot_ids[j]});
      }
    }
  }
  for (const auto& list : papers_of_community) {
    for (std::size_t i = 1; i < list.size(); ++i) {
      for (int c = 0; c < 2; ++c) {
        if (!rng.chance(config.citation_probability)) continue;
        const std::size_t cited = list[rng.below(i)];
        builder.add_tuple(rel::kCites, {"p" + pad(list[i], pw), "p" + pad(cited, pw)});
      }
    }
  }

  Corpus corpus;
  corpus.instance = std::move(builder).build();
  const Instance& inst = corpus.instance;
  std::vector<std::vector<EntityIndex>> clusters;
  for (const auto& ids : refs_of_author) {
    if (ids.empty()) continue;
    std::vector<EntityIndex> c;
    for (const auto& id : ids) c.push_back(inst.index_of(id));
    clusters.push_back(std::move(c));
  }
  for (EntityIndex p : inst.entities_of_kind("paper")) clusters.push_back({p});
  corpus.truth = GroundTruth(inst.size(), std::move(clusters));
  return corpus;
}

}  // namespace cem
