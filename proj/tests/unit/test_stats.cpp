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


#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "oracles.hpp"
#include "revlogic/error.hpp"
#include "revlogic/stats.hpp"

using namespace revlogic;
using nlohmann::json;

namespace {

EffectSample sample(std::string paper, Condition c, double delta, std::string arg = "a",
                    Dimension d = Dimension::Aspect) {
  return EffectSample{std::move(paper), std::move(arg), d, c, delta};
}

// papers x (n_cr critical + n_ne neutral) with intercept b0, effect b1.
std::vector<EffectSample> simulate(std::mt19937_64& rng, std::size_t papers, std::size_t n_cr, std::size_t n_ne,
                                   double b0, double b1, double sd_paper, double sd_noise, bool center = false) {
  std::normal_distribution<double> norm(0, 1);
  std::vector<EffectSample> out;
  for (std::size_t p = 0; p < papers; ++p) {
    const auto id = "p" + std::to_string(p);
    const double u = sd_paper * norm(rng);
    std::vector<double> e(n_cr + n_ne);
    double mean = 0;
    for (auto& x : e) mean += (x = sd_noise * norm(rng));
    mean /= static_cast<double>(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
      const bool crit = k < n_cr;
      out.push_back(sample(id, crit ? Condition::Critical : Condition::Neutral,
                           b0 + (crit ? b1 : 0.0) + u + e[k] - (center ? mean : 0.0)));
    }
  }
  return out;
}

// Dense REML reference: V = I + theta Z Z', profiled over sigma^2.
struct DenseFit {
  double b0, b1, se0, se1, var_paper, var_residual;
};

std::vector<std::vector<double>> inverse(std::vector<std::vector<double>> a, double* logdet) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  *logdet = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    *logdet += std::log(std::fabs(d));
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

struct Profile {
  double objective, sigma2, b0, b1, c00, c01, c11;
};

Profile reml_at(const std::vector<EffectSample>& s, double theta) {
  const std::size_t n = s.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i][j] = (i == j ? 1.0 : 0.0) + (s[i].paper_id == s[j].paper_id ? theta : 0.0);
  double logdet_v = 0;
  const auto vi = inverse(v, &logdet_v);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = s[i].condition == Condition::Critical ? 1.0 : 0.0;
    y[i] = s[i].delta;
  }
  double a00 = 0, a01 = 0, a11 = 0, g0 = 0, g1 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a00 += vi[i][j];
      a01 += vi[i][j] * x[j];
      a11 += x[i] * vi[i][j] * x[j];
      g0 += vi[i][j] * y[j];
      g1 += x[i] * vi[i][j] * y[j];
    }
  const double det = a00 * a11 - a01 * a01;
  Profile p;
  p.b0 = (a11 * g0 - a01 * g1) / det;
  p.b1 = (a00 * g1 - a01 * g0) / det;
  double q = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q += (y[i] - p.b0 - p.b1 * x[i]) * vi[i][j] * (y[j] - p.b0 - p.b1 * x[j]);
  p.sigma2 = q / static_cast<double>(n - 2);
  p.objective = -0.5 * (static_cast<double>(n - 2) * std::log(p.sigma2) + logdet_v + std::log(det));
  p.c00 = p.sigma2 * a11 / det;
  p.c11 = p.sigma2 * a00 / det;
  p.c01 = -p.sigma2 * a01 / det;
  return p;
}

DenseFit dense_reml(const std::vector<EffectSample>& s) {
  double best_t = 0, best = reml_at(s, 0).objective;
  for (int k = 0; k <= 800; ++k) {
    const double t = std::pow(10.0, -6.0 + k * 0.01);
    const double o = reml_at(s, t).objective;
    if (o > best) best = o, best_t = t;
  }
  if (best_t > 0) {
    double lo = best_t / 1.03, hi = best_t * 1.03;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (reml_at(s, m1).objective < reml_at(s, m2).objective) lo = m1;
      else hi = m2;
    }
    best_t = (lo + hi) / 2;
  }
  const auto p = reml_at(s, best_t);
  return {p.b0, p.b1, std::sqrt(p.c00), std::sqrt(p.c11), best_t * p.sigma2, p.sigma2};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("samples from deltas skip undefined components") {
    ReviewDelta d{"a", "p", "p.layout", Condition::Neutral, 2, std::nullopt, -1.0};
    const auto s = samples_from_deltas({d});
    REQUIRE(s.size() == 2);
    CHECK(s[0].dimension == Dimension::Aspect);
    CHECK(s[0].delta == 2);
    CHECK(s[1].dimension == Dimension::Score);
    CHECK(select(s, "a", Dimension::Score).size() == 1);
    CHECK(select(s, "b", Dimension::Score).empty());
    for (auto dim : kDimensions) CHECK(dimension_from_string(to_string(dim)) == dim);
  }

  TEST_CASE("ATE against brute force") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 300; ++round) {
      const std::size_t papers = 1 + rng() % 3;
      std::vector<std::vector<double>> by_paper(papers);
      std::vector<EffectSample> s;
      for (std::size_t p = 0; p < papers; ++p) {
        const std::size_t n = 1 + rng() % 4;
        for (std::size_t k = 0; k < n; ++k) {
          const double d = static_cast<double>(static_cast<int>(rng() % 7) - 3) / 2.0;
          by_paper[p].push_back(d);
          s.push_back(sample("p" + std::to_string(p), Condition::Critical, d));
        }
      }
      s.push_back(sample("q", Condition::Neutral, 100));
      s.push_back(sample("q", Condition::Critical, 100, "a", Dimension::Score));
      const auto cell = compute_ate(s, Condition::Critical, Dimension::Aspect);
      const auto ref = oracle::ate(by_paper);
      CHECK(cell.ate == doctest::Approx(ref.ate).epsilon(1e-12));
      CHECK(cell.sd == doctest::Approx(ref.sd).epsilon(1e-12));
      CHECK(cell.n == ref.n);
      CHECK(cell.papers == ref.papers);
    }
    CHECK(code_of([] { compute_ate({}, Condition::Critical, Dimension::Aspect); }) == ErrorCode::EmptyCell);
  }

  TEST_CASE("summaries and sd modes") {
    const std::vector<EffectSample> s{sample("p", Condition::Critical, -2), sample("p", Condition::Neutral, 0),
                                      sample("p", Condition::Neutral, 1),   sample("q", Condition::Critical, -1),
                                      sample("q", Condition::Neutral, 3),   sample("q", Condition::Neutral, 3)};
    const auto a = summarize(s, "a", Dimension::Aspect);
    CHECK(a.ate_critical == doctest::Approx(-1.5));
    CHECK(a.ate_neutral == doctest::Approx((0.5 + 3.0) / 2));
    CHECK(a.sd_neutral == doctest::Approx(oracle::ate({{0, 1, 3, 3}}).sd));
    CHECK(a.n_critical == 2);
    CHECK(a.n_neutral == 4);
    const auto b = summarize(s, "a", Dimension::Aspect, SdMode::PerPaperMean);
    CHECK(b.sd_neutral == doctest::Approx(std::sqrt(((0.5 - 1.75) * (0.5 - 1.75) + (3 - 1.75) * (3 - 1.75)) / 1.0)));
    CHECK(code_of([&] { summarize(s, "a", Dimension::Score); }) == ErrorCode::EmptyCell);
  }

  TEST_CASE("Benjamini-Hochberg against the definition") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int round = 0; round < 500; ++round) {
      std::vector<double> p(1 + rng() % 12);
      for (auto& x : p) x = rng() % 4 == 0 ? std::pow(u(rng), 6) : u(rng);
      if (p.size() > 2) p[1] = p[0];  // ties
      const auto got = bh_correct(p);
      const auto ref = oracle::bh(p);
      REQUIRE(got.size() == p.size());
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(std::fabs(got[i] - ref[i]) <= 1e-12);
        CHECK(got[i] >= p[i]);
        CHECK(got[i] <= 1.0);
      }
    }
    CHECK(bh_correct(std::vector<double>{}).empty());
    CHECK(bh_correct(std::vector<double>{0.3}) == std::vector<double>{0.3});
    for (const double q : {0.02, 0.4, 1.0}) {
      for (const auto x : bh_correct(std::vector<double>(7, q))) CHECK(x == doctest::Approx(std::min(1.0, q)));
    }
    CHECK(code_of([] { bh_correct(std::vector<double>{0.1, -0.1}); }) == ErrorCode::InvalidP);
    CHECK(code_of([] { bh_correct(std::vector<double>{1.5}); }) == ErrorCode::InvalidP);
    CHECK(code_of([] { bh_correct(std::vector<double>{std::nan("")}); }) == ErrorCode::InvalidP);
    const auto named = bh_correct(std::vector<std::pair<std::string, double>>{{"x", 0.04}, {"y", 0.01}});
    CHECK(named[0].first == "x");
    CHECK(named[0].second == doctest::Approx(0.04));
    CHECK(named[1].second == doctest::Approx(0.02));
  }

  TEST_CASE("OLS fit matches the closed form") {
    std::mt19937_64 rng(2);
    const auto s = simulate(rng, 10, 3, 4, 0.2, 0.7, 0.5, 1.0);
    std::vector<double> x, y;
    for (const auto& e : s) {
      x.push_back(e.condition == Condition::Critical ? 1 : 0);
      y.push_back(e.delta);
    }
    const auto ref = oracle::ols(x, y);
    const auto f = fit_ols(s);
    CHECK(f.beta_intercept == doctest::Approx(ref.b0).epsilon(1e-10));
    CHECK(f.beta_condition == doctest::Approx(ref.b1).epsilon(1e-10));
    CHECK(f.se_condition == doctest::Approx(ref.se1).epsilon(1e-10));
    CHECK(f.se_intercept == doctest::Approx(ref.se0).epsilon(1e-10));
  }

  TEST_CASE("LME reduces to OLS without paper variance") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed);
      const auto s = simulate(rng, 20, 3, 4, -0.1, 0.5, 0.0, 1.0, true);
      std::vector<double> x, y;
      for (const auto& e : s) {
        x.push_back(e.condition == Condition::Critical ? 1 : 0);
        y.push_back(e.delta);
      }
      const auto ref = oracle::ols(x, y);
      const auto f = fit_random_intercept_lme(s);
      CHECK(f.converged);
      CHECK(f.var_paper == doctest::Approx(0).epsilon(1e-9));
      CHECK(std::fabs(f.beta_condition - ref.b1) < 1e-6);
      CHECK(std::fabs(f.beta_intercept - ref.b0) < 1e-6);
      CHECK(std::fabs(f.se_condition - ref.se1) < 1e-6);
      CHECK(std::fabs(f.se_intercept - ref.se0) < 1e-6);
    }
  }

  TEST_CASE("LME against a dense REML reference") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      std::mt19937_64 rng(100 + seed);
      // unbalanced: 2 or 3 critical per paper
      std::vector<EffectSample> s;
      for (std::size_t p = 0; p < 6; ++p) {
        auto part = simulate(rng, 1, 2 + (p % 2), 4, 0.0, 0.8, 1.0, 1.0);
        for (auto& e : part) e.paper_id = "p" + std::to_string(p);
        s.insert(s.end(), part.begin(), part.end());
      }
      const auto ref = dense_reml(s);
      const auto f = fit_random_intercept_lme(s);
      CAPTURE(seed);
      CHECK(f.beta_condition == doctest::Approx(ref.b1).epsilon(1e-4));
      CHECK(f.beta_intercept == doctest::Approx(ref.b0).epsilon(1e-4));
      CHECK(f.se_condition == doctest::Approx(ref.se1).epsilon(1e-3));
      CHECK(f.var_residual == doctest::Approx(ref.var_residual).epsilon(1e-3));
      CHECK(std::fabs(f.var_paper - ref.var_paper) < 1e-3 * std::max(1.0, ref.var_paper));
      CHECK(f.n_obs == s.size());
      CHECK(f.n_papers == 6);
      const double z = f.beta_condition / f.se_condition;
      CHECK(f.p_value == doctest::Approx(std::erfc(std::fabs(z) / std::sqrt(2.0))).epsilon(1e-9));
    }
  }

  TEST_CASE("LME recovers a planted effect") {
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      const auto s = simulate(rng, 60, 3, 4, 0.0, 0.5, 1.0, 1.0);
      const auto f = fit_random_intercept_lme(s);
      covered += std::fabs(f.beta_condition - 0.5) <= 3 * f.se_condition;
      CHECK(f.p_value < 0.05);
      CHECK(f.var_paper > 0.3);
    }
    CHECK(covered >= 19);
  }

  TEST_CASE("LME on a mirrored design has no effect") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> norm(0, 1);
    std::vector<EffectSample> s;
    for (int p = 0; p < 8; ++p) {
      const auto id = "p" + std::to_string(p);
      const double u = norm(rng);
      for (int k = 0; k < 3; ++k) {
        const double v = u + norm(rng);
        s.push_back(sample(id, Condition::Critical, v));
        s.push_back(sample(id, Condition::Neutral, v));
      }
    }
    const auto f = fit_random_intercept_lme(s);
    CHECK(std::fabs(f.beta_condition) < 1e-9);
    CHECK(f.p_value == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("LME null rejection rate is calibrated") {
    int rejected = 0;
    const int runs = 2000;
    for (int seed = 0; seed < runs; ++seed) {
      std::mt19937_64 rng(70000 + seed);
      rejected += fit_random_intercept_lme(simulate(rng, 40, 3, 4, 0.0, 0.0, 1.0, 1.0)).p_value < 0.05;
    }
    // binomial sd at 5% is ~0.5 percentage points
    CHECK(rejected >= 60);
    CHECK(rejected <= 140);
  }

  TEST_CASE("LME errors") {
    std::vector<EffectSample> one_cond{sample("p", Condition::Neutral, 1), sample("q", Condition::Neutral, 2),
                                       sample("q", Condition::Neutral, 3)};
    CHECK(code_of([&] { fit_random_intercept_lme(one_cond); }) == ErrorCode::SingularDesign);
    std::vector<EffectSample> one_paper{sample("p", Condition::Neutral, 1), sample("p", Condition::Critical, 2),
                                        sample("p", Condition::Neutral, 3)};
    CHECK(code_of([&] { fit_random_intercept_lme(one_paper); }) == ErrorCode::InsufficientData);
    std::vector<EffectSample> two{sample("p", Condition::Neutral, 1), sample("q", Condition::Critical, 2)};
    CHECK(code_of([&] { fit_random_intercept_lme(two); }) == ErrorCode::InsufficientData);
  }

  TEST_CASE("z ranking against brute force") {
    std::mt19937_64 rng(8);
    for (int round = 0; round < 300; ++round) {
      std::vector<AteSummary> sums;
      std::map<std::string, std::vector<oracle::Cell>> cells;
      const int args = 1 + static_cast<int>(rng() % 3);
      for (int a = 0; a < args; ++a) {
        const std::string name = "arg" + std::to_string(a);
        for (auto d : kDimensions) {
          AteSummary s;
          s.arg_name = name;
          s.dimension = d;
          s.ate_critical = static_cast<double>(static_cast<int>(rng() % 9) - 4) / 4.0;
          s.ate_neutral = static_cast<double>(static_cast<int>(rng() % 9) - 4) / 4.0;
          s.sd_neutral = static_cast<double>(rng() % 3);
          sums.push_back(s);
          cells[name].push_back({s.ate_critical, s.ate_neutral, s.sd_neutral});
        }
      }
      const auto r = z_rank(sums);
      std::size_t ranked = 0;
      for (const auto& [name, dims] : cells) {
        const auto ref = oracle::z(dims);
        auto it = std::find_if(r.entries.begin(), r.entries.end(), [&](const auto& e) { return e.arg_name == name; });
        if (!ref) {
          CHECK(it == r.entries.end());
          CHECK(std::any_of(r.excluded.begin(), r.excluded.end(),
                            [&](const auto& x) { return x.arg_name == name && !x.dimension; }));
          continue;
        }
        ++ranked;
        REQUIRE(it != r.entries.end());
        CHECK(it->z == doctest::Approx(*ref).epsilon(1e-12));
      }
      CHECK(r.entries.size() == ranked);
      for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i - 1].z >= r.entries[i].z);
    }
  }

  TEST_CASE("z ranking identity and antisymmetry") {
    AteSummary s{"a", Dimension::Aspect, 1.0, 1.0, 0.5, 3, 4};
    CHECK(z_rank({s}).entries.at(0).z == 0.0);
    AteSummary t = s;
    t.ate_critical = -1.0;
    AteSummary swapped = t;
    std::swap(swapped.ate_critical, swapped.ate_neutral);
    CHECK(z_rank({t}).entries.at(0).z == z_rank({swapped}).entries.at(0).z);
    CHECK(z_rank({t}).entries.at(0).z == doctest::Approx(4.0));
    AteSummary zero = s;
    zero.sd_neutral = 0;
    const auto r = z_rank({zero});
    CHECK(r.entries.empty());
    CHECK(r.excluded.size() == 2);
  }
}
