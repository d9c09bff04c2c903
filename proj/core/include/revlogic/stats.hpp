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


// Treatment-effect statistics over review deltas.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/counterfactual.hpp"
#include "revlogic/review_analysis.hpp"

namespace revlogic {

enum class Dimension { Aspect, Sentiment, Score };

inline constexpr Dimension kDimensions[] = {Dimension::Aspect, Dimension::Sentiment, Dimension::Score};

std::string_view to_string(Dimension d);
Dimension dimension_from_string(std::string_view s);

struct EffectSample {
  std::string paper_id;
  std::string arg_name;
  Dimension dimension = Dimension::Aspect;
  Condition condition = Condition::Neutral;
  double delta = 0;
};

/// One sample per defined delta component.
std::vector<EffectSample> samples_from_deltas(const std::vector<ReviewDelta>& deltas);

/// Samples of one ARG and dimension.
std::vector<EffectSample> select(const std::vector<EffectSample>& samples, std::string_view arg_name, Dimension d);

struct AteCell {
  double ate = 0;
  double sd = 0;        // sample standard deviation over per-counterfactual deltas
  std::size_t n = 0;    // counterfactuals
  std::size_t papers = 0;
};

/// Mean over papers of the per-paper mean delta. Throws Error{EmptyCell}.
AteCell compute_ate(const std::vector<EffectSample>& samples, Condition condition, Dimension dimension);

enum class SdMode { PerCounterfactual, PerPaperMean };

struct AteSummary {
  std::string arg_name;
  Dimension dimension = Dimension::Aspect;
  double ate_critical = 0;
  double ate_neutral = 0;
  double sd_neutral = 0;
  std::size_t n_critical = 0;
  std::size_t n_neutral = 0;
};

void to_json(nlohmann::json& j, const AteSummary& s);

/// Both cells of one (ARG, dimension). Throws Error{EmptyCell}.
AteSummary summarize(const std::vector<EffectSample>& samples, std::string_view arg_name, Dimension dimension,
                     SdMode sd_mode = SdMode::PerCounterfactual);

struct LmeFit {
  double beta_intercept = 0;
  double beta_condition = 0;
  double se_intercept = 0;
  double se_condition = 0;
  double var_paper = 0;
  double var_residual = 0;
  double p_value = 1;
  bool converged = false;
  double variance_ratio = 0;  // var_paper / var_residual
  std::size_t n_obs = 0;
  std::size_t n_papers = 0;
};

void to_json(nlohmann::json& j, const LmeFit& f);

/// delta = b0 + b1 * [critical] + u_paper + e, fitted by REML profiled over
/// the variance ratio; two-sided Wald test of b1 with a normal reference.
/// Throws Error{SingularDesign | InsufficientData | NonConvergence}.
LmeFit fit_random_intercept_lme(const std::vector<EffectSample>& samples);

/// Ordinary least squares of the same fixed-effects design (reference fit).
LmeFit fit_ols(const std::vector<EffectSample>& samples);

/// Benjamini-Hochberg step-up adjustment, input order preserved.
/// Throws Error{InvalidP}.
std::vector<double> bh_correct(const std::vector<double>& p_values);
std::vector<std::pair<std::string, double>> bh_correct(const std::vector<std::pair<std::string, double>>& p_values);

struct RankEntry {
  std::string arg_name;
  double z = 0;
  std::vector<Dimension> dimensions;  // dimensions that entered the average
};

struct RankExclusion {
  std::string arg_name;
  std::optional<Dimension> dimension;  // nullopt: the whole ARG
  std::string reason;
};

struct Ranking {
  std::vector<RankEntry> entries;  // descending z
  std::vector<RankExclusion> excluded;
};

/// z = mean over dimensions of |ATE_CR - ATE_NE| / sd_neutral. A dimension
/// whose neutral sd is zero is left out of that ARG's mean and reported; an
/// ARG with no usable dimension is excluded (ZeroNeutralSd).
Ranking z_rank(const std::vector<AteSummary>& summaries);

}  // namespace revlogic
