#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cem/generator.hpp"
#include "cem/mln.hpp"
#include "cem/pipeline.hpp"
#include "cem/rule_set.hpp"
#include "cem/similarity.hpp"

namespace {

using namespace cem;

std::vector<std::string> random_words(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(4, 12);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::vector<std::string> out(n);
  for (auto& w : out) {
    w.resize(static_cast<std::size_t>(len(rng)));
    for (auto& c : w) c = static_cast<char>(ch(rng));
  }
  return out;
}

void BM_JaroWinkler(benchmark::State& state) {
  const auto words = random_words(1024, 7);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jaro_winkler(words[i % 1024], words[(i * 31 + 5) % 1024]));
    ++i;
  }
}
BENCHMARK(BM_JaroWinkler);

struct Prepared {
  std::shared_ptr<const Instance> instance;
  Cover cover;
};

Prepared prepare(std::size_t authors) {
  GenConfig gc;
  gc.authors = authors;
  gc.seed = 3;
  CoverBuild b = build_cover(generate(gc).instance);
  return {std::make_shared<const Instance>(std::move(b.instance)), std::move(b.cover)};
}

// MAP inference on every neighborhood of a generated corpus.
void BM_MapInferNeighborhoods(benchmark::State& state) {
  const Prepared p = prepare(static_cast<std::size_t>(state.range(0)));
  const MlnMatcher m(p.instance, rule_set_by_name("learned"));
  for (auto _ : state) {
    std::size_t total = 0;
    for (const auto& n : p.cover.neighborhoods) total += m.match(n.members, {}).size();
    benchmark::DoNotOptimize(total);
  }
  state.counters["neighborhoods"] = static_cast<double>(p.cover.size());
}
BENCHMARK(BM_MapInferNeighborhoods)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_Scheme(benchmark::State& state, Scheme scheme) {
  const Prepared p = prepare(static_cast<std::size_t>(state.range(0)));
  const MlnMatcher m(p.instance, rule_set_by_name("learned"));
  std::uint64_t invocations = 0;
  for (auto _ : state) {
    const SchemeRun r = run_scheme(m, p.cover, scheme);
    invocations = r.total_invocations;
    benchmark::DoNotOptimize(r.matches.size());
  }
  state.counters["entities"] = static_cast<double>(p.instance->size());
  state.counters["invocations"] = static_cast<double>(invocations);
}
BENCHMARK_CAPTURE(BM_Scheme, smp, Scheme::kSmp)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Scheme, mmp, Scheme::kMmp)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
