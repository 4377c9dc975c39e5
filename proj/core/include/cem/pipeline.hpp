#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cem/covering.hpp"
#include "cem/evaluation.hpp"
#include "cem/matcher.hpp"
#include "cem/parallel_runner.hpp"
#include "cem/similarity.hpp"

namespace cem {

/// Thrown by the pipeline with the name of the stage that failed.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool bad_input = false)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), bad_input_(bad_input) {}
  const std::string& stage() const { return stage_; }
  /// The stage rejected its input (std::invalid_argument) rather than failing.
  bool bad_input() const { return bad_input_; }

 private:
  std::string stage_;
  bool bad_input_;
};

struct CoverOptions {
  double loose = 0.88;
  double tight = 0.95;
  SimilarityThresholds thresholds;
};

struct CoverBuild {
  /// The input plus generated Similar tuples (unchanged when it had some).
  Instance instance;
  Cover cover;
  std::size_t similar_added = 0;
};

/// Canopies over authors, Similar tuples for canopy pairs (only when the
/// instance has none), each paper attached to the first canopy holding one
/// of its authors, a singleton for any entity still uncovered, then one
/// round of boundary expansion. The result is always total.
CoverBuild build_cover(const Instance& instance, const CoverOptions& options = {});

struct PipelineConfig {
  std::string matcher = "mln";
  MatcherConfig matcher_config;
  Scheme scheme = Scheme::kMmp;
  CoverOptions cover;
  /// 0 runs the sequential queue runner; otherwise the round-based runner.
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  Reactivation reactivation = Reactivation::kPairContainment;
  /// Holistic reference run when the instance has at most this many entities.
  std::size_t holistic_max_entities = 25;
  bool upper_bound = false;
  UbScope ub_scope = UbScope::kNeighborhood;
  /// Write matches.jsonl, metrics.csv, metrics.txt, cover.jsonl and
  /// rounds.csv (or trace.jsonl for the sequential runner) here.
  std::optional<std::filesystem::path> out_dir;
};

struct PipelineResult {
  CoverBuild build;
  MatchSet matches;
  MetricsReport metrics;
  std::optional<MatchSet> holistic;
  std::optional<UbResult> ub;
  std::vector<RoundStats> rounds;
  std::vector<std::uint64_t> visits;
  std::uint64_t total_invocations = 0;
};

/// Cover, run, metrics. `truth` may be null, in which case precision and
/// recall are left at zero counts.
PipelineResult run_pipeline(const Instance& instance, const PipelineConfig& config,
                            const GroundTruth* truth = nullptr);

/// Runs the scheme on an already built cover; used by run_pipeline.
struct SchemeRun {
  MatchSet matches;
  std::vector<RoundStats> rounds;
  std::vector<std::uint64_t> visits;
  std::vector<std::uint64_t> invocations;
  std::uint64_t total_invocations = 0;
  std::uint64_t promotions = 0;
};
SchemeRun run_scheme(const Matcher& matcher, const Cover& cover, Scheme scheme,
                     std::size_t workers = 0, std::uint64_t seed = 0,
                     Reactivation reactivation = Reactivation::kPairContainment,
                     std::ostream* trace = nullptr);

struct ScalingRow {
  std::size_t prefix = 0;
  std::size_t entities = 0;
  std::size_t candidate_pairs = 0;
  bool holistic_feasible = false;
  double holistic_ms = 0;
  std::size_t holistic_matches = 0;
  double scheme_ms = 0;
  std::uint64_t scheme_invocations = 0;
  std::size_t scheme_matches = 0;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

/// Least squares y = slope * x + intercept. r2 is 1 when y is constant.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingReport {
  std::vector<ScalingRow> rows;
  /// Scheme invocations against prefix size.
  LinearFit invocation_fit;
};

/// For each prefix size k: the holistic run on the union of the first k
/// neighborhoods (skipped as infeasible above `holistic_pair_cap` candidate
/// pairs) and the scheme over those k neighborhoods.
ScalingReport emit_scaling_report(const Matcher& matcher, const Cover& cover, Scheme scheme,
                                  const std::vector<std::size_t>& prefixes,
                                  std::size_t holistic_pair_cap = 20000);

std::string scaling_csv(const ScalingReport& report);

}  // namespace cem
