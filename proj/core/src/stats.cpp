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


#include "revlogic/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "revlogic/error.hpp"

namespace revlogic {

using nlohmann::json;

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Aspect: return "aspect";
    case Dimension::Sentiment: return "sentiment";
    case Dimension::Score: return "score";
  }
  return "aspect";
}

Dimension dimension_from_string(std::string_view s) {
  for (auto d : kDimensions)
    if (to_string(d) == s) return d;
  throw Error(ErrorCode::ConfigError, "unknown dimension '" + std::string(s) + "'");
}

std::vector<EffectSample> samples_from_deltas(const std::vector<ReviewDelta>& deltas) {
  std::vector<EffectSample> out;
  for (const auto& d : deltas) {
    out.push_back({d.paper_id, d.arg_name, Dimension::Aspect, d.condition, static_cast<double>(d.aspect_delta)});
    if (d.sentiment_delta) out.push_back({d.paper_id, d.arg_name, Dimension::Sentiment, d.condition, *d.sentiment_delta});
    if (d.score_delta) out.push_back({d.paper_id, d.arg_name, Dimension::Score, d.condition, *d.score_delta});
  }
  return out;
}

std::vector<EffectSample> select(const std::vector<EffectSample>& samples, std::string_view arg_name, Dimension d) {
  std::vector<EffectSample> out;
  for (const auto& s : samples)
    if (s.arg_name == arg_name && s.dimension == d) out.push_back(s);
  return out;
}

namespace {

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::map<std::string, std::vector<double>> by_paper(const std::vector<EffectSample>& samples, Condition c,
                                                    Dimension d) {
  std::map<std::string, std::vector<double>> m;
  for (const auto& s : samples)
    if (s.condition == c && s.dimension == d) m[s.paper_id].push_back(s.delta);
  return m;
}

}  // namespace

AteCell compute_ate(const std::vector<EffectSample>& samples, Condition condition, Dimension dimension) {
  const auto papers = by_paper(samples, condition, dimension);
  if (papers.empty())
    throw Error(ErrorCode::EmptyCell, "no " + std::string(to_string(condition)) + " samples for dimension " +
                                          std::string(to_string(dimension)));
  AteCell cell;
  double total = 0;
  std::vector<double> all;
  for (const auto& [paper, deltas] : papers) {
    total += std::accumulate(deltas.begin(), deltas.end(), 0.0) / static_cast<double>(deltas.size());
    all.insert(all.end(), deltas.begin(), deltas.end());
  }
  cell.ate = total / static_cast<double>(papers.size());
  cell.sd = sample_sd(all);
  cell.n = all.size();
  cell.papers = papers.size();
  return cell;
}

void to_json(json& j, const AteSummary& s) {
  j = json{{"arg_name", s.arg_name},         {"dimension", to_string(s.dimension)},
           {"ate_critical", s.ate_critical}, {"ate_neutral", s.ate_neutral},
           {"sd_neutral", s.sd_neutral},     {"n_critical", s.n_critical},
           {"n_neutral", s.n_neutral}};
}

AteSummary summarize(const std::vector<EffectSample>& samples, std::string_view arg_name, Dimension dimension,
                     SdMode sd_mode) {
  const auto mine = select(samples, arg_name, dimension);
  const auto cr = compute_ate(mine, Condition::Critical, dimension);
  const auto ne = compute_ate(mine, Condition::Neutral, dimension);
  AteSummary s;
  s.arg_name = std::string(arg_name);
  s.dimension = dimension;
  s.ate_critical = cr.ate;
  s.ate_neutral = ne.ate;
  s.n_critical = cr.n;
  s.n_neutral = ne.n;
  if (sd_mode == SdMode::PerCounterfactual) {
    s.sd_neutral = ne.sd;
  } else {
    std::vector<double> means;
    for (const auto& [paper, deltas] : by_paper(mine, Condition::Neutral, dimension))
      means.push_back(std::accumulate(deltas.begin(), deltas.end(), 0.0) / static_cast<double>(deltas.size()));
    s.sd_neutral = sample_sd(means);
  }
  return s;
}

void to_json(json& j, const LmeFit& f) {
  j = json{{"beta_intercept", f.beta_intercept},
           {"beta_condition", f.beta_condition},
           {"se_intercept", f.se_intercept},
           {"se_condition", f.se_condition},
           {"var_paper", f.var_paper},
           {"var_residual", f.var_residual},
           {"p_value", f.p_value},
           {"converged", f.converged},
           {"variance_ratio", f.variance_ratio},
           {"n_obs", f.n_obs},
           {"n_papers", f.n_papers},
           {"estimation", "REML"},
           {"test", "Wald, normal reference"}};
}

// ---------------------------------------------------------------------------
// Random-intercept LME

namespace {

// Per-paper sufficient statistics of the design [1, x] with binary x.
struct Group {
  double n = 0;   // observations
  double s = 0;   // sum of x
  double t = 0;   // sum of y
  double tx = 0;  // sum of x*y
  double yy = 0;  // sum of y^2
};

struct Profile {
  double a00, a01, a11;  // X'V^-1 X
  double b0, b1;         // X'V^-1 y
  double yvy;            // y'V^-1 y
  double logdet_v;
};

Profile profile_at(const std::vector<Group>& groups, double theta) {
  Profile p{0, 0, 0, 0, 0, 0, 0};
  for (const auto& g : groups) {
    const double w = theta / (1.0 + g.n * theta);
    p.a00 += g.n - w * g.n * g.n;
    p.a01 += g.s - w * g.n * g.s;
    p.a11 += g.s - w * g.s * g.s;
    p.b0 += g.t - w * g.n * g.t;
    p.b1 += g.tx - w * g.s * g.t;
    p.yvy += g.yy - w * g.t * g.t;
    p.logdet_v += std::log1p(g.n * theta);
  }
  return p;
}

struct Solved {
  double beta0, beta1;
  double inv00, inv11;  // (X'V^-1 X)^-1 diagonal
  double rss;           // r'V^-1 r
  double det;
};

Solved solve(const Profile& p) {
  Solved s{};
  s.det = p.a00 * p.a11 - p.a01 * p.a01;
  s.inv00 = p.a11 / s.det;
  s.inv11 = p.a00 / s.det;
  const double inv01 = -p.a01 / s.det;
  s.beta0 = s.inv00 * p.b0 + inv01 * p.b1;
  s.beta1 = inv01 * p.b0 + s.inv11 * p.b1;
  s.rss = std::max(0.0, p.yvy - (s.beta0 * p.b0 + s.beta1 * p.b1));
  return s;
}

struct Design {
  std::vector<Group> groups;
  std::size_t n_obs = 0;
};

Design build_design(const std::vector<EffectSample>& samples) {
  std::map<std::string, Group> m;
  std::size_t crit = 0, neut = 0;
  for (const auto& smp : samples) {
    if (!std::isfinite(smp.delta)) throw Error(ErrorCode::PreconditionViolated, "non-finite delta");
    const double x = smp.condition == Condition::Critical ? 1.0 : 0.0;
    auto& g = m[smp.paper_id];
    g.n += 1;
    g.s += x;
    g.t += smp.delta;
    g.tx += x * smp.delta;
    g.yy += smp.delta * smp.delta;
    (x > 0 ? crit : neut)++;
  }
  if (crit == 0 || neut == 0)
    throw Error(ErrorCode::SingularDesign, crit == 0 ? "no critical samples" : "no neutral samples");
  Design d;
  for (auto& [id, g] : m) d.groups.push_back(g);
  d.n_obs = samples.size();
  return d;
}

double two_sided_normal_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

LmeFit finish_fit(const Design& d, double theta, const Solved& s, bool converged) {
  LmeFit f;
  const double dof = static_cast<double>(d.n_obs) - 2.0;
  const double sigma2 = s.rss / dof;
  f.beta_intercept = s.beta0;
  f.beta_condition = s.beta1;
  f.se_intercept = std::sqrt(sigma2 * s.inv00);
  f.se_condition = std::sqrt(sigma2 * s.inv11);
  f.var_residual = sigma2;
  f.var_paper = theta * sigma2;
  f.variance_ratio = theta;
  f.converged = converged;
  f.n_obs = d.n_obs;
  f.n_papers = d.groups.size();
  if (f.se_condition > 0) {
    f.p_value = two_sided_normal_p(s.beta1 / f.se_condition);
  } else {
    // Residual-free data: the effect is exact.
    f.p_value = s.beta1 == 0.0 ? 1.0 : 0.0;
  }
  return f;
}

}  // namespace

LmeFit fit_ols(const std::vector<EffectSample>& samples) {
  const auto d = build_design(samples);
  if (d.n_obs <= 2) throw Error(ErrorCode::InsufficientData, "need more than two observations");
  const auto s = solve(profile_at(d.groups, 0.0));
  if (!(std::fabs(s.det) > 0)) throw Error(ErrorCode::SingularDesign, "design matrix is singular");
  return finish_fit(d, 0.0, s, true);
}

LmeFit fit_random_intercept_lme(const std::vector<EffectSample>& samples) {
  const auto d = build_design(samples);
  if (d.groups.size() < 2) throw Error(ErrorCode::InsufficientData, "need at least two papers");
  if (d.n_obs <= 2) throw Error(ErrorCode::InsufficientData, "need more than two observations");

  const auto s0 = solve(profile_at(d.groups, 0.0));
  if (!(std::fabs(s0.det) > 1e-12 * static_cast<double>(d.n_obs * d.n_obs)))
    throw Error(ErrorCode::SingularDesign, "condition is collinear with the intercept");

  double scale = 0;
  for (const auto& g : d.groups) scale += g.yy;
  if (s0.rss <= 1e-24 * std::max(scale, 1e-300) || s0.rss == 0.0) return finish_fit(d, 0.0, s0, true);

  const double dof = static_cast<double>(d.n_obs) - 2.0;
  auto objective = [&](double theta) {
    const auto p = profile_at(d.groups, theta);
    const auto s = solve(p);
    if (!(s.det > 0) || !(s.rss > 0)) return std::numeric_limits<double>::infinity();
    return p.logdet_v + std::log(s.det) + dof * std::log(s.rss);
  };
  auto on_log = [&](double phi) { return objective(std::exp(phi)); };

  constexpr double kLo = -12.0, kHi = 8.0;
  constexpr int kGrid = 41;
  double best_phi = kLo, best_val = on_log(kLo);
  for (int i = 1; i < kGrid; ++i) {
    const double phi = kLo + (kHi - kLo) * i / (kGrid - 1);
    const double v = on_log(phi);
    if (v < best_val) {
      best_val = v;
      best_phi = phi;
    }
  }
  const double step = (kHi - kLo) / (kGrid - 1);
  std::uintmax_t iterations = 200;
  const auto [phi, val] = boost::math::tools::brent_find_minima(
      on_log, std::max(kLo, best_phi - step), std::min(kHi, best_phi + step), 52, iterations);
  const bool converged = iterations < 200;
  if (!converged) throw Error(ErrorCode::NonConvergence, "variance-ratio search did not converge");

  double theta = std::exp(phi);
  double fval = val;
  if (best_val < fval) {
    theta = std::exp(best_phi);
    fval = best_val;
  }
  if (objective(0.0) <= fval) theta = 0.0;
  return finish_fit(d, theta, solve(profile_at(d.groups, theta)), converged);
}

// ---------------------------------------------------------------------------

std::vector<double> bh_correct(const std::vector<double>& p) {
  const std::size_t m = p.size();
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidP, "p-value outside [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double candidate = std::min(1.0, p[order[k]] * (static_cast<double>(m) / static_cast<double>(k + 1)));
    running = std::min(running, candidate);
    out[order[k]] = running;
  }
  return out;
}

std::vector<std::pair<std::string, double>> bh_correct(const std::vector<std::pair<std::string, double>>& p_values) {
  std::vector<double> raw;
  for (const auto& [name, p] : p_values) raw.push_back(p);
  const auto adj = bh_correct(raw);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < p_values.size(); ++i) out.emplace_back(p_values[i].first, adj[i]);
  return out;
}

Ranking z_rank(const std::vector<AteSummary>& summaries) {
  std::vector<std::string> args;
  for (const auto& s : summaries)
    if (std::find(args.begin(), args.end(), s.arg_name) == args.end()) args.push_back(s.arg_name);
  Ranking r;
  for (const auto& arg : args) {
    RankEntry e;
    e.arg_name = arg;
    double total = 0;
    for (const auto& s : summaries) {
      if (s.arg_name != arg) continue;
      if (!(s.sd_neutral > 0)) {
        r.excluded.push_back({arg, s.dimension, "ZeroNeutralSd"});
        continue;
      }
      total += std::fabs(s.ate_critical - s.ate_neutral) / s.sd_neutral;
      e.dimensions.push_back(s.dimension);
    }
    if (e.dimensions.empty()) {
      r.excluded.push_back({arg, std::nullopt, "ZeroNeutralSd"});
      continue;
    }
    e.z = total / static_cast<double>(e.dimensions.size());
    r.entries.push_back(std::move(e));
  }
  std::stable_sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) { return a.z > b.z; });
  return r;
}

}  // namespace revlogic
