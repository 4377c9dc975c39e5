// cem: command-line driver.
//
//   cem generate --authors 200 --out corpus/
//   cem cover    --instance corpus/instance.jsonl --out corpus/
//   cem run      --instance corpus/instance.jsonl --truth corpus/truth.jsonl --scheme mmp
//   cem eval     --instance ... --truth ... --matches out/matches.jsonl
//   cem scale    --instance ... --steps 10
//   cem axioms   --instance data/running_example.jsonl --matcher mln
//
// Exit codes: 0 success, 2 invalid input or failed check, 1 internal error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cem/axioms.hpp"
#include "cem/generator.hpp"
#include "cem/io.hpp"
#include "cem/pipeline.hpp"

namespace {

using namespace cem;

/// Raised for bad input found after argument parsing; maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out;
  MatcherConfig config;

  std::optional<std::string> get(const std::string& key) const {
    auto it = config.find(key);
    if (it == config.end()) return std::nullopt;
    return it->second;
  }
};

template <typename T>
T convert(const std::string& key, const std::string& text) {
  T value{};
  if constexpr (std::is_same_v<T, std::string>) {
    value = text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw InputError("config key " + key + ": expected true or false");
  } else {
    std::istringstream is(text);
    if (!(is >> value) || !(is >> std::ws).eof()) {
      throw InputError("config key " + key + ": cannot parse '" + text + "'");
    }
  }
  return value;
}

/// Takes `key` from the config file unless the flag was given.
template <typename T>
void from_config(const Globals& g, const CLI::Option* flag, const std::string& key, T& target) {
  if (flag && flag->count() > 0) return;
  if (auto v = g.get(key)) target = convert<T>(key, *v);
}

std::shared_ptr<const Instance> load(const std::string& path) {
  return std::make_shared<const Instance>(load_instance(path));
}

GroundTruth load_truth(const std::string& path, const Instance& instance) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_truth(in, instance);
}

std::filesystem::path out_dir(const Globals& g) {
  return g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
}

std::string to_text(const auto& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

MatcherConfig matcher_config(const Globals& g, const std::string& rules, const CLI::Option* rules_flag) {
  MatcherConfig out;
  for (const auto& [k, v] : g.config) {
    if (k.rfind("matcher.", 0) == 0 && k != "matcher.name") out[k.substr(8)] = v;
  }
  if (rules_flag->count() > 0 || !out.count("rules")) out["rules"] = rules;
  return out;
}

std::vector<EntitySet> load_cover_sets(const std::string& path, const Instance& instance) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_cover(in, instance);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective entity matching with message passing over neighborhoods"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->default_val(0);
  app.add_option("--config", g.config_path, "key = value settings file");
  app.add_option("--out", g.out, "Output directory");

  // generate
  auto* gen = app.add_subcommand("generate", "Synthetic bibliography corpus");
  GenConfig gc;
  std::string ops_text = "abbreviate,drop,swap,substitute,middle";
  auto* gen_authors = gen->add_option("--authors", gc.authors, "Real authors")->capture_default_str();
  auto* gen_comm = gen->add_option("--community-size", gc.community_size, "Authors per community")->capture_default_str();
  auto* gen_ppa = gen->add_option("--papers-per-author", gc.papers_per_author, "Mean papers per author")->capture_default_str();
  auto* gen_max = gen->add_option("--max-authors", gc.max_authors_per_paper, "Authors per paper at most")->capture_default_str();
  auto* gen_cite = gen->add_option("--citation", gc.citation_probability, "Citation probability")->capture_default_str();
  auto* gen_mut = gen->add_option("--mutation", gc.mutation_probability, "Per-reference mutation probability")->capture_default_str();
  auto* gen_mid = gen->add_option("--middle", gc.middle_name_probability, "Middle initial probability")->capture_default_str();
  auto* gen_ops = gen->add_option("--ops", ops_text, "Enabled mutation operators")->capture_default_str();

  // cover
  auto* cov = app.add_subcommand("cover", "Build a total cover");
  std::string instance_path;
  CoverOptions co;
  cov->add_option("--instance", instance_path, "Instance JSON lines")->required();
  auto* cov_loose = cov->add_option("--loose", co.loose, "Loose canopy threshold")->capture_default_str();
  auto* cov_tight = cov->add_option("--tight", co.tight, "Tight canopy threshold")->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "Match an instance");
  std::string truth_path, cover_path, matcher_name = "mln", rules = "learned", scheme_text = "mmp";
  std::size_t workers = 0;
  std::string reactivation_text = "pair";
  bool upper_bound = false, global_ub = false;
  run->add_option("--instance", instance_path, "Instance JSON lines")->required();
  run->add_option("--truth", truth_path, "Ground truth JSON lines");
  run->add_option("--cover", cover_path, "Use this cover instead of building one");
  auto* run_matcher = run->add_option("--matcher", matcher_name, "Registered matcher")->capture_default_str();
  auto* run_rules = run->add_option("--rules", rules, "Rule preset or file (mln)")->capture_default_str();
  auto* run_scheme_opt = run->add_option("--scheme", scheme_text, "no-mp, smp or mmp")->capture_default_str();
  auto* run_workers = run->add_option("--workers", workers, "0 = sequential runner")->capture_default_str();
  auto* run_loose = run->add_option("--loose", co.loose, "Loose canopy threshold")->capture_default_str();
  auto* run_tight = run->add_option("--tight", co.tight, "Tight canopy threshold")->capture_default_str();
  run->add_option("--reactivation", reactivation_text, "pair or entity")
      ->check(CLI::IsMember({"pair", "entity"}))
      ->capture_default_str();
  run->add_flag("--ub", upper_bound, "Compute the upper-bound scheme (needs --truth)");
  run->add_flag("--global-ub", global_ub, "Decide UB pairs on the whole instance");

  // eval
  auto* ev = app.add_subcommand("eval", "Score a match file");
  std::string matches_path, reference_path;
  ev->add_option("--instance", instance_path, "Instance JSON lines")->required();
  ev->add_option("--truth", truth_path, "Ground truth JSON lines");
  ev->add_option("--matches", matches_path, "Match JSON lines")->required();
  ev->add_option("--reference", reference_path, "Reference match file for soundness/completeness");
  bool close_first = false;
  ev->add_flag("--close", close_first, "Transitively close before scoring");

  // scale
  auto* sc = app.add_subcommand("scale", "Holistic vs scheme over cover prefixes");
  std::size_t steps = 10, pair_cap = 20000;
  sc->add_option("--instance", instance_path, "Instance JSON lines")->required();
  auto* sc_matcher = sc->add_option("--matcher", matcher_name, "Registered matcher")->capture_default_str();
  auto* sc_rules = sc->add_option("--rules", rules, "Rule preset or file (mln)")->capture_default_str();
  auto* sc_scheme = sc->add_option("--scheme", scheme_text, "no-mp, smp or mmp")->capture_default_str();
  sc->add_option("--steps", steps, "Number of evenly spaced prefixes")->capture_default_str();
  sc->add_option("--pair-cap", pair_cap, "Holistic runs above this many candidate pairs are skipped")
      ->capture_default_str();
  auto* sc_loose = sc->add_option("--loose", co.loose, "Loose canopy threshold")->capture_default_str();
  auto* sc_tight = sc->add_option("--tight", co.tight, "Tight canopy threshold")->capture_default_str();

  // axioms
  auto* ax = app.add_subcommand("axioms", "Check idempotence, monotonicity and supermodularity");
  std::size_t samples = 50;
  ax->add_option("--instance", instance_path, "Instance JSON lines")->required();
  ax->add_option("--cover", cover_path, "Check on these neighborhoods (default: built cover)");
  auto* ax_matcher = ax->add_option("--matcher", matcher_name, "Registered matcher")->capture_default_str();
  auto* ax_rules = ax->add_option("--rules", rules, "Rule preset or file (mln)")->capture_default_str();
  ax->add_option("--samples", samples, "Random checks per axiom")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!g.config_path.empty()) g.config = load_config(g.config_path);
    const auto* seed_flag = app.get_option("--seed");
    from_config(g, seed_flag, "run.seed", g.seed);

    if (gen->parsed()) {
      from_config(g, gen_authors, "generate.authors", gc.authors);
      from_config(g, gen_comm, "generate.community_size", gc.community_size);
      from_config(g, gen_ppa, "generate.papers_per_author", gc.papers_per_author);
      from_config(g, gen_max, "generate.max_authors", gc.max_authors_per_paper);
      from_config(g, gen_cite, "generate.citation", gc.citation_probability);
      from_config(g, gen_mut, "generate.mutation", gc.mutation_probability);
      from_config(g, gen_mid, "generate.middle", gc.middle_name_probability);
      from_config(g, gen_ops, "generate.ops", ops_text);
      gc.seed = g.seed;
      gc.ops = MutationOps{};
      std::stringstream list(ops_text);
      for (std::string op; std::getline(list, op, ',');) {
        if (op == "abbreviate") gc.ops.abbreviate_first = true;
        else if (op == "drop") gc.ops.drop_char = true;
        else if (op == "swap") gc.ops.swap_chars = true;
        else if (op == "substitute") gc.ops.substitute_char = true;
        else if (op == "middle") gc.ops.drop_middle = true;
        else if (!op.empty()) throw InputError("unknown mutation operator '" + op + "'");
      }
      const Corpus corpus = generate(gc);
      const auto dir = out_dir(g);
      save_text(dir / "instance.jsonl", to_text([&](std::ostream& os) { write_instance(os, corpus.instance); }));
      save_text(dir / "truth.jsonl",
                to_text([&](std::ostream& os) { write_truth(os, corpus.truth, corpus.instance); }));
      std::cout << "entities " << corpus.instance.size() << "\ntuples "
                << corpus.instance.relations().tuple_count() << "\nclusters "
                << corpus.truth.clusters().size() << "\ntrue pairs " << corpus.truth.pair_count() << "\n";
      return 0;
    }

    const auto instance = load(instance_path);

    auto cover_settings = [&](const CLI::Option* loose, const CLI::Option* tight) {
      from_config(g, loose, "cover.loose", co.loose);
      from_config(g, tight, "cover.tight", co.tight);
    };

    if (cov->parsed()) {
      cover_settings(cov_loose, cov_tight);
      const CoverBuild b = build_cover(*instance, co);
      const auto dir = out_dir(g);
      save_text(dir / "cover.jsonl", to_text([&](std::ostream& os) { write_cover(os, b.cover, b.instance); }));
      if (b.similar_added > 0) {
        save_text(dir / "instance_similar.jsonl",
                  to_text([&](std::ostream& os) { write_instance(os, b.instance); }));
      }
      std::cout << "neighborhoods " << b.cover.size() << "\nlargest " << b.cover.max_neighborhood()
                << "\ntotal " << (verify_total(b.cover, b.instance).total ? "yes" : "no")
                << "\nsimilar tuples added " << b.similar_added << "\n";
      return 0;
    }

    if (run->parsed()) {
      cover_settings(run_loose, run_tight);
      from_config(g, run_matcher, "matcher.name", matcher_name);
      from_config(g, run_scheme_opt, "run.scheme", scheme_text);
      from_config(g, run_workers, "run.workers", workers);
      std::optional<GroundTruth> truth;
      if (!truth_path.empty()) truth = load_truth(truth_path, *instance);
      const Scheme scheme = parse_scheme(scheme_text);
      const Reactivation reactivation =
          reactivation_text == "entity" ? Reactivation::kEntityOverlap : Reactivation::kPairContainment;
      const MatcherConfig mc = matcher_config(g, rules, run_rules);

      if (!cover_path.empty()) {
        // Fixed cover: skip canopy construction.
        const Cover cover = make_cover(*instance, load_cover_sets(cover_path, *instance));
        if (!cover.total) std::cerr << "warning: the supplied cover is not total\n";
        auto matcher = MatcherRegistry::global().create(matcher_name, instance, mc);
        std::ostringstream trace;
        const SchemeRun r = run_scheme(*matcher, cover, scheme, workers, g.seed,
                                       reactivation, g.out.empty() || workers > 0 ? nullptr : &trace);
        MetricsReport m;
        m.scheme = std::string(scheme_name(scheme));
        m.matches = r.matches.size();
        if (truth) m.quality = prf(r.matches, *truth);
        if (instance->size() <= 25) {
          m.has_holistic = true;
          m.vs_holistic = soundness_completeness(r.matches, matcher->match(instance->all_entities(), {}));
        }
        if (upper_bound) {
          if (!truth) throw InputError("--ub needs --truth");
          const UbResult ub = ub_matches(*matcher, cover, *truth,
                                         global_ub ? UbScope::kGlobal : UbScope::kNeighborhood);
          m.has_ub = true;
          m.ub_scope = ub.scope;
          m.vs_ub = soundness_completeness(r.matches, ub.matches);
          const double rec = prf(ub.matches, *truth).recall.value();
          m.f1_upper_bound = 2.0 * rec / (1.0 + rec);
        }
        if (!g.out.empty()) {
          const auto dir = out_dir(g);
          save_text(dir / "matches.jsonl",
                    to_text([&](std::ostream& os) { write_matches(os, r.matches, *instance); }));
          save_text(dir / "metrics.csv", metrics_csv_header() + "\n" + metrics_csv_row(m) + "\n");
          save_text(dir / "metrics.txt", metrics_text(m));
          if (workers > 0) save_text(dir / "rounds.csv", round_stats_csv(r.rounds));
          else save_text(dir / "trace.jsonl", trace.str());
        }
        std::cout << metrics_text(m);
        for (const auto& p : r.matches) std::cout << "match " << instance->id(p.lo) << ' ' << instance->id(p.hi) << '\n';
        return 0;
      }

      PipelineConfig pc;
      pc.matcher = matcher_name;
      pc.matcher_config = mc;
      pc.scheme = scheme;
      pc.cover = co;
      pc.workers = workers;
      pc.seed = g.seed;
      pc.reactivation = reactivation;
      pc.upper_bound = upper_bound;
      pc.ub_scope = global_ub ? UbScope::kGlobal : UbScope::kNeighborhood;
      if (!g.out.empty()) pc.out_dir = out_dir(g);
      const PipelineResult r = run_pipeline(*instance, pc, truth ? &*truth : nullptr);
      std::cout << "neighborhoods " << r.build.cover.size() << " (largest "
                << r.build.cover.max_neighborhood() << ")\n"
                << "matcher invocations " << r.total_invocations << "\n"
                << metrics_text(r.metrics);
      return 0;
    }

    if (ev->parsed()) {
      std::ifstream in(matches_path);
      if (!in) throw InputError("cannot open " + matches_path);
      const MatchSet matches = read_matches(in, *instance);
      MetricsReport m;
      m.scheme = "file";
      m.matches = matches.size();
      if (!truth_path.empty()) m.quality = prf(matches, load_truth(truth_path, *instance), close_first);
      if (!reference_path.empty()) {
        std::ifstream ref(reference_path);
        if (!ref) throw InputError("cannot open " + reference_path);
        m.has_holistic = true;
        m.vs_holistic = soundness_completeness(matches, read_matches(ref, *instance));
      }
      std::cout << metrics_text(m);
      if (!g.out.empty()) {
        save_text(out_dir(g) / "metrics.csv", metrics_csv_header() + "\n" + metrics_csv_row(m) + "\n");
      }
      return 0;
    }

    if (sc->parsed()) {
      cover_settings(sc_loose, sc_tight);
      from_config(g, sc_matcher, "matcher.name", matcher_name);
      from_config(g, sc_scheme, "run.scheme", scheme_text);
      const CoverBuild b = build_cover(*instance, co);
      auto shared = std::make_shared<const Instance>(b.instance);
      auto matcher = MatcherRegistry::global().create(matcher_name, shared, matcher_config(g, rules, sc_rules));
      if (steps == 0) throw InputError("--steps must be positive");
      std::vector<std::size_t> prefixes;
      const std::size_t n = b.cover.size();
      for (std::size_t i = 1; i <= steps; ++i) {
        const std::size_t k = std::max<std::size_t>(1, n * i / steps);
        if (prefixes.empty() || prefixes.back() != k) prefixes.push_back(k);
      }
      const ScalingReport report =
          emit_scaling_report(*matcher, b.cover, parse_scheme(scheme_text), prefixes, pair_cap);
      const std::string csv = scaling_csv(report);
      if (!g.out.empty()) save_text(out_dir(g) / "scaling.csv", csv);
      std::cout << csv;
      return 0;
    }

    if (ax->parsed()) {
      from_config(g, ax_matcher, "matcher.name", matcher_name);
      auto matcher = MatcherRegistry::global().create(matcher_name, instance, matcher_config(g, rules, ax_rules));
      std::vector<EntitySet> hoods;
      if (!cover_path.empty()) {
        hoods = load_cover_sets(cover_path, *instance);
      } else {
        for (const auto& nb : build_cover(*instance, co).cover.neighborhoods) hoods.push_back(nb.members);
      }
      std::mt19937_64 rng(g.seed);
      auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
      bool ok = true;
      auto report = [&](const AxiomReport& r) {
        std::cout << r.axiom << ": " << (r.passed ? "pass" : "FAIL") << " (" << r.checks << " checks)\n";
        if (!r.passed) {
          std::cout << r.describe(*instance);
          ok = false;
        }
      };
      for (std::size_t i = 0; i < samples && !hoods.empty(); ++i) {
        const EntitySet& e = hoods[pick(hoods.size())];
        report(check_idempotence(*matcher, e, {}));
        // Super-instance: this neighborhood plus another one, evidence grown by one pair.
        const EntitySet big = e.united(hoods[pick(hoods.size())]);
        const auto cands = matcher->candidate_pairs(big);
        Evidence base, ext;
        if (!cands.empty()) {
          const EntityPair p = cands[pick(cands.size())];
          if (i % 2 == 0) ext = Evidence(MatchSet{p}); else ext = Evidence({}, MatchSet{p});
        }
        report(check_monotonicity(*matcher, e, base, big, ext));
        if (const auto* pm = as_probabilistic(*matcher)) {
          const auto all = matcher->candidate_pairs(big);
          if (all.empty()) continue;
          MatchSet s, t;
          for (const auto& p : all) {
            const auto r = rng() % 3;
            if (r == 0) s.insert(p);
            if (r <= 1) t.insert(p);
          }
          std::vector<EntityPair> outside;
          for (const auto& p : all) {
            if (!t.contains(p)) outside.push_back(p);
          }
          if (outside.empty()) continue;
          report(check_supermodularity(*pm, s, t, outside[pick(outside.size())]));
        }
      }
      return ok ? 0 : 2;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.bad_input() ? 2 : 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
