#include "cem/parallel_runner.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cem {

Scheme parse_scheme(std::string_view name) {
  if (name == "no-mp") return Scheme::kNoMp;
  if (name == "smp") return Scheme::kSmp;
  if (name == "mmp") return Scheme::kMmp;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (no-mp, smp, mmp)");
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kNoMp:
      return "no-mp";
    case Scheme::kSmp:
      return "smp";
    case Scheme::kMmp:
      return "mmp";
  }
  return "?";
}

double RoundPlan::skew() const {
  if (active.empty()) return 1.0;
  std::vector<std::size_t> load(workers, 0);
  for (std::size_t w : worker_of) ++load[w];
  const double mean = static_cast<double>(active.size()) / static_cast<double>(workers);
  return static_cast<double>(*std::max_element(load.begin(), load.end())) / mean;
}

RoundPlan make_round_plan(std::size_t round, std::vector<std::size_t> active, std::size_t workers,
                          std::uint64_t seed) {
  if (workers == 0) throw std::invalid_argument("workers must be positive");
  RoundPlan plan;
  plan.round = round;
  plan.workers = workers;
  std::sort(active.begin(), active.end());
  plan.active = std::move(active);
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (round + 1)));
  plan.worker_of.resize(plan.active.size());
  for (auto& w : plan.worker_of) w = static_cast<std::size_t>(rng() % workers);
  return plan;
}

namespace {

struct TaskOutput {
  MatchSet matches;
  std::vector<MatchSet> messages;
  std::uint64_t invocations = 0;
};

}  // namespace

ParallelResult run_parallel(const Matcher& matcher, const Cover& cover,
                            const ParallelOptions& options) {
  if (options.workers == 0) throw std::invalid_argument("workers must be positive");
  const ProbabilisticMatcher* typed = as_probabilistic(matcher);
  if (options.scheme == Scheme::kMmp && !typed) {
    throw std::invalid_argument("mmp needs a Type-II matcher");
  }
  const auto membership = cover.membership(matcher.instance().size());

  ParallelResult result;
  result.visits.assign(cover.size(), 0);
  result.invocations.assign(cover.size(), 0);
  FoundSet found(matcher.instance().size());
  MessagePool pool;

  std::vector<std::size_t> active(cover.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;

  for (std::size_t round = 0; !active.empty(); ++round) {
    const RoundPlan plan = make_round_plan(round, std::move(active), options.workers, options.seed);
    const auto start = std::chrono::steady_clock::now();
    RoundStats stats;
    stats.round = round;
    stats.active = plan.active.size();
    stats.skew = plan.skew();

    std::vector<TaskOutput> outputs;
    for (std::size_t attempt = 0;; ++attempt) {
      outputs.assign(plan.active.size(), {});
      std::vector<std::exception_ptr> errors(options.workers);
      auto work = [&](std::size_t worker) {
        try {
          for (std::size_t i = 0; i < plan.active.size(); ++i) {
            if (plan.worker_of[i] != worker) continue;
            const Neighborhood& n = cover.neighborhoods[plan.active[i]];
            if (options.before_task) options.before_task(round, n.id);
            TaskOutput& out = outputs[i];
            // Reads only the frozen snapshot; the coordinator is waiting.
            const MatchSet evidence =
                options.scheme == Scheme::kNoMp ? MatchSet{} : found.restricted_to(n.members);
            out.matches = matcher.match(n.members, Evidence(evidence));
            out.invocations = 1;
            if (options.scheme == Scheme::kMmp) {
              auto maximal = compute_maximal(matcher, n.members, evidence, &out.matches);
              out.messages = std::move(maximal.messages);
              out.invocations += maximal.invocations;
            }
          }
        } catch (...) {
          errors[worker] = std::current_exception();
        }
      };
      if (options.workers == 1) {
        work(0);
      } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < options.workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
      }
      auto failed = std::find_if(errors.begin(), errors.end(), [](auto& e) { return e != nullptr; });
      if (failed == errors.end()) break;
      if (attempt >= options.max_retries) {
        std::string what = "round " + std::to_string(round) + " failed";
        try {
          std::rethrow_exception(*failed);
        } catch (const std::exception& e) {
          what += ": ";
          what += e.what();
        } catch (...) {
        }
        RunState partial;
        partial.found = found;
        partial.pool = pool;
        throw RunAborted(what, plan.active.front(), std::move(partial));
      }
      ++stats.retries;
    }

    // Barrier: merge in neighborhood order.
    MatchSet added;
    std::vector<MatchSet> fresh_messages;
    for (std::size_t i = 0; i < plan.active.size(); ++i) {
      const std::size_t id = plan.active[i];
      ++result.visits[id];
      result.invocations[id] += outputs[i].invocations;
      stats.invocations += outputs[i].invocations;
      added.unite_with(found.add(outputs[i].matches));
      for (auto& m : outputs[i].messages) fresh_messages.push_back(std::move(m));
    }
    if (options.scheme == Scheme::kMmp) {
      pool.found_pairs(added);
      for (const auto& m : fresh_messages) pool.add(m, found);
      added.unite_with(pool.promote(*typed, found, &result.promotions));
    }
    result.total_invocations += stats.invocations;
    stats.new_matches = added.size();
    stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.rounds.push_back(stats);

    if (options.scheme == Scheme::kNoMp) break;
    active = neighbor_set(added, cover, membership, options.reactivation);
  }
  result.matches = found.pairs();
  return result;
}

std::string round_stats_csv(const std::vector<RoundStats>& rounds) {
  std::ostringstream os;
  os << "round,active,new_matches,wall_ms,skew,invocations,retries\n";
  os << std::fixed;
  for (const auto& r : rounds) {
    os << r.round << ',' << r.active << ',' << r.new_matches << ',' << std::setprecision(3)
       << r.wall_ms << ',' << std::setprecision(3) << r.skew << ',' << r.invocations << ','
       << r.retries << '\n';
  }
  return os.str();
}

}  // namespace cem
