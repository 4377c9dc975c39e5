#include "cem/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "cem/io.hpp"
#include "cem/message_passing.hpp"

namespace cem {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw StageError(name, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

bool has_similar(const Instance& instance) {
  const auto* r = instance.relations().find(rel::kSimilar);
  return r && !r->tuples.empty();
}

std::string write_to_string(const auto& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

CoverBuild build_cover(const Instance& input, const CoverOptions& options) {
  options.thresholds.validate();
  const EntitySet authors = input.entities_of_kind("author");
  std::vector<EntitySet> sets = author_canopies(input, authors, options.loose, options.tight);

  CoverBuild out;
  if (has_similar(input)) {
    out.instance = input;
  } else {
    RelationStore extra;
    for (const auto& canopy : sets) {
      for (std::size_t i = 0; i < canopy.size(); ++i) {
        for (std::size_t j = i + 1; j < canopy.size(); ++j) {
          const int level = discretize_similarity(input.entity(canopy[i]), input.entity(canopy[j]),
                                                  options.thresholds);
          if (level > 0) extra.add(rel::kSimilar, {canopy[i], canopy[j]}, level);
        }
      }
    }
    extra.declare(rel::kSimilar);
    extra.normalize();
    out.similar_added = extra.tuple_count();
    out.instance = input.with_tuples(extra);
  }
  const Instance& inst = out.instance;

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> first_canopy(inst.size(), kNone);
  for (std::size_t c = sets.size(); c-- > 0;) {
    for (EntityIndex e : sets[c]) first_canopy[e] = c;
  }
  std::vector<std::vector<EntityIndex>> attached(sets.size());
  std::vector<char> covered(inst.size(), 0);
  for (const auto& s : sets) {
    for (EntityIndex e : s) covered[e] = 1;
  }
  for (EntityIndex p : inst.entities_of_kind("paper")) {
    std::size_t best = kNone;
    for (EntityIndex a : inst.in_neighbors(rel::kAuthored, p)) best = std::min(best, first_canopy[a]);
    if (best != kNone) {
      attached[best].push_back(p);
      covered[p] = 1;
    }
  }
  for (std::size_t c = 0; c < sets.size(); ++c) {
    if (!attached[c].empty()) sets[c] = sets[c].united(EntitySet(std::move(attached[c])));
  }
  for (EntityIndex e = 0; e < inst.size(); ++e) {
    if (!covered[e]) sets.push_back(EntitySet{e});
  }
  out.cover = make_total(make_cover(inst, std::move(sets)), inst);
  return out;
}

SchemeRun run_scheme(const Matcher& matcher, const Cover& cover, Scheme scheme,
                     std::size_t workers, std::uint64_t seed, Reactivation reactivation,
                     std::ostream* trace) {
  SchemeRun out;
  if (workers == 0) {
    RunOptions options;
    options.reactivation = reactivation;
    options.trace = trace;
    RunResult r;
    switch (scheme) {
      case Scheme::kNoMp:
        r = no_mp(matcher, cover);
        break;
      case Scheme::kSmp:
        r = smp(matcher, cover, options);
        break;
      case Scheme::kMmp: {
        const auto* pm = as_probabilistic(matcher);
        if (!pm) throw std::invalid_argument("mmp needs a probabilistic matcher");
        r = mmp(*pm, cover, options);
        break;
      }
    }
    out.matches = std::move(r.matches);
    out.visits = std::move(r.state.visits);
    out.invocations = std::move(r.state.invocations);
    out.total_invocations = r.state.total_invocations;
    out.promotions = r.state.promotions;
    return out;
  }
  ParallelOptions options;
  options.workers = workers;
  options.scheme = scheme;
  options.seed = seed;
  options.reactivation = reactivation;
  ParallelResult r = run_parallel(matcher, cover, options);
  out.matches = std::move(r.matches);
  out.rounds = std::move(r.rounds);
  out.visits = std::move(r.visits);
  out.invocations = std::move(r.invocations);
  out.total_invocations = r.total_invocations;
  out.promotions = r.promotions;
  return out;
}

PipelineResult run_pipeline(const Instance& instance, const PipelineConfig& config,
                            const GroundTruth* truth) {
  PipelineResult result;
  result.build = stage("cover", [&] { return build_cover(instance, config.cover); });
  auto shared = std::make_shared<const Instance>(result.build.instance);
  const Cover& cover = result.build.cover;

  std::unique_ptr<Matcher> matcher = stage("matcher", [&] {
    return MatcherRegistry::global().create(config.matcher, shared, config.matcher_config);
  });

  std::ostringstream trace;
  const bool want_trace = config.out_dir && config.workers == 0;
  SchemeRun run = stage("run", [&] {
    return run_scheme(*matcher, cover, config.scheme, config.workers, config.seed,
                      config.reactivation, want_trace ? &trace : nullptr);
  });
  result.matches = run.matches;
  result.rounds = run.rounds;
  result.visits = run.visits;
  result.total_invocations = run.total_invocations;

  if (shared->size() <= config.holistic_max_entities) {
    result.holistic = stage("holistic", [&] { return matcher->match(shared->all_entities(), {}); });
  }
  if (config.upper_bound) {
    if (!truth) throw StageError("ub", "the upper bound needs ground truth");
    result.ub = stage("ub", [&] { return ub_matches(*matcher, cover, *truth, config.ub_scope); });
  }

  stage("metrics", [&] {
    MetricsReport& m = result.metrics;
    m.scheme = std::string(scheme_name(config.scheme));
    m.matches = result.matches.size();
    if (truth) m.quality = prf(result.matches, *truth);
    if (result.holistic) {
      m.has_holistic = true;
      m.vs_holistic = soundness_completeness(result.matches, *result.holistic);
    }
    if (result.ub) {
      m.has_ub = true;
      m.ub_scope = result.ub->scope;
      m.vs_ub = soundness_completeness(result.matches, result.ub->matches);
      if (truth) {
        const double r = prf(result.ub->matches, *truth).recall.value();
        m.f1_upper_bound = r + 1.0 > 0 ? 2.0 * r / (1.0 + r) : 0.0;
      }
    }
    return 0;
  });

  if (config.out_dir) {
    stage("write", [&] {
      const auto& dir = *config.out_dir;
      const Instance& inst = *shared;
      save_text(dir / "matches.jsonl",
                write_to_string([&](std::ostream& os) { write_matches(os, result.matches, inst); }));
      save_text(dir / "cover.jsonl",
                write_to_string([&](std::ostream& os) { write_cover(os, cover, inst); }));
      save_text(dir / "metrics.csv", metrics_csv_header() + "\n" + metrics_csv_row(result.metrics) + "\n");
      save_text(dir / "metrics.txt", metrics_text(result.metrics));
      if (config.workers > 0) save_text(dir / "rounds.csv", round_stats_csv(result.rounds));
      if (want_trace) save_text(dir / "trace.jsonl", trace.str());
      return 0;
    });
  }
  return result;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line needs two or more points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_line needs two distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

ScalingReport emit_scaling_report(const Matcher& matcher, const Cover& cover, Scheme scheme,
                                  const std::vector<std::size_t>& prefixes,
                                  std::size_t holistic_pair_cap) {
  ScalingReport report;
  std::vector<double> xs, ys;
  for (std::size_t k : prefixes) {
    if (k == 0 || k > cover.size()) {
      throw std::invalid_argument("prefix " + std::to_string(k) + " outside 1.." +
                                  std::to_string(cover.size()));
    }
    Cover prefix;
    std::vector<EntityIndex> all;
    for (std::size_t i = 0; i < k; ++i) {
      prefix.neighborhoods.push_back(cover.neighborhoods[i]);
      all.insert(all.end(), cover.neighborhoods[i].members.begin(),
                 cover.neighborhoods[i].members.end());
    }
    const EntitySet entities(std::move(all));

    ScalingRow row;
    row.prefix = k;
    row.entities = entities.size();
    row.candidate_pairs = matcher.candidate_pairs(entities).size();
    row.holistic_feasible = row.candidate_pairs <= holistic_pair_cap;
    if (row.holistic_feasible) {
      const auto start = Clock::now();
      try {
        row.holistic_matches = matcher.match(entities, {}).size();
        row.holistic_ms = ms_since(start);
      } catch (const InferenceError&) {
        row.holistic_feasible = false;
      }
    }
    const auto start = Clock::now();
    const SchemeRun run = run_scheme(matcher, prefix, scheme);
    row.scheme_ms = ms_since(start);
    row.scheme_invocations = run.total_invocations;
    row.scheme_matches = run.matches.size();
    xs.push_back(static_cast<double>(k));
    ys.push_back(static_cast<double>(run.total_invocations));
    report.rows.push_back(row);
  }
  if (xs.size() >= 2) report.invocation_fit = fit_line(xs, ys);
  return report;
}

std::string scaling_csv(const ScalingReport& report) {
  std::ostringstream os;
  os << "prefix,entities,candidate_pairs,holistic_ms,holistic_matches,scheme_ms,"
        "scheme_invocations,scheme_matches\n";
  for (const auto& r : report.rows) {
    os << r.prefix << ',' << r.entities << ',' << r.candidate_pairs << ',';
    if (r.holistic_feasible) {
      os << r.holistic_ms << ',' << r.holistic_matches;
    } else {
      os << "infeasible,infeasible";
    }
    os << ',' << r.scheme_ms << ',' << r.scheme_invocations << ',' << r.scheme_matches << '\n';
  }
  os << "# fit scheme_invocations ~ prefix: slope=" << report.invocation_fit.slope
     << " intercept=" << report.invocation_fit.intercept << " r2=" << report.invocation_fit.r2
     << '\n';
  return os.str();
}

}  // namespace cem
