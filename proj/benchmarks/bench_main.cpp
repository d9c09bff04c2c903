// Copyright 2026 The revlogic Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <vector>

#include "revlogic/paper_model.hpp"
#include "revlogic/review_analysis.hpp"
#include "revlogic/rng.hpp"
#include "revlogic/stats.hpp"
#include "revlogic/synthetic.hpp"

using namespace revlogic;

namespace {

void BM_BhCorrect(benchmark::State& state) {
  SeededRng rng(1);
  std::vector<double> p(static_cast<std::size_t>(state.range(0)));
  for (auto& v : p) v = rng.unit();
  for (auto _ : state) benchmark::DoNotOptimize(bh_correct(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BhCorrect)->Range(16, 1 << 14)->Complexity();

std::vector<EffectSample> simulated(int papers, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<EffectSample> out;
  for (int i = 0; i < papers; ++i) {
    const double u = rng.normal();
    const auto id = "p" + std::to_string(i);
    for (int k = 0; k < 7; ++k) {
      const auto cond = k < 3 ? Condition::Critical : Condition::Neutral;
      out.push_back({id, "arg", Dimension::Score, cond, (k < 3 ? 0.5 : 0.0) + u + rng.normal()});
    }
  }
  return out;
}

void BM_LmeFit(benchmark::State& state) {
  const auto samples = simulated(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_random_intercept_lme(samples));
}
BENCHMARK(BM_LmeFit)->Arg(20)->Arg(133)->Arg(1000);

void BM_ParseRender(benchmark::State& state) {
  const auto paper = synthetic::generate_paper(0, 11);
  for (auto _ : state) {
    auto doc = parse_markdown(paper.markdown, paper.paper_id, "");
    benchmark::DoNotOptimize(render_markdown(doc));
  }
}
BENCHMARK(BM_ParseRender);

void BM_Rouge2(benchmark::State& state) {
  const auto a = synthetic::generate_paper(1, 5).markdown;
  const auto b = synthetic::generate_paper(2, 5).markdown;
  for (auto _ : state) benchmark::DoNotOptimize(rouge2(a, b));
}
BENCHMARK(BM_Rouge2);

}  // namespace

BENCHMARK_MAIN();
