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


#include "revlogic/spelling_lexicon.hpp"

#include <cctype>
#include <unordered_map>

namespace revlogic::spelling {
namespace {

constexpr const char* kIzeStems[] = {
    "optim",   "minim",    "maxim",    "normal",   "general",  "organ",    "recogn",   "real",
    "util",    "special",  "character", "summar",  "categor",  "standard", "visual",   "emphas",
    "prior",   "regular",  "initial",  "parameter", "serial",  "token",    "vector",   "random",
    "stabil",  "final",    "central",  "local",    "formal",   "critic",   "capital",  "modern",
    "symbol",  "author",   "apolog",   "familiar", "memor",    "harmon",   "synchron", "polar",
    "quant",   "lemmat",   "personal", "custom",   "legal",    "global",   "hypothes", "theor",
    "neutral", "equal",    "digit",    "sanit",    "discret",  "binar",    "linear",   "steril",
    "fertil",  "mobil",    "industrial", "commercial", "criminal", "decentral", "democrat", "revolution",
    "special", "spiritual", "rational", "individual", "contextual", "conceptual", "operational", "vocal",
};

constexpr const char* kIzeSuffixes[][2] = {
    {"ize", "ise"},         {"izes", "ises"},     {"ized", "ised"},     {"izing", "ising"},
    {"ization", "isation"}, {"izations", "isations"}, {"izer", "iser"}, {"izers", "isers"},
};

constexpr const char* kYzeStems[] = {"anal", "paral", "catal", "dial"};
constexpr const char* kYzeSuffixes[][2] = {
    {"yze", "yse"}, {"yzes", "yses"}, {"yzed", "ysed"}, {"yzing", "ysing"}, {"yzer", "yser"}, {"yzers", "ysers"},
};

constexpr const char* kOrStems[] = {"col",  "flav", "hon",  "hum",  "lab",   "neighb", "behavi", "fav",
                                    "rum",  "vap",  "harb", "endeav", "arm", "od",    "vig",    "rig",
                                    "cand", "clam", "glam", "sav",  "splend", "tum",  "val",    "parl"};
constexpr const char* kOrSuffixes[][2] = {
    {"or", "our"}, {"ors", "ours"}, {"ored", "oured"}, {"oring", "ouring"}, {"orful", "ourful"},
    {"orless", "ourless"},
};

constexpr const char* kExplicit[][2] = {
    {"favorite", "favourite"},     {"favorites", "favourites"},       {"favorable", "favourable"},
    {"favorably", "favourably"},   {"unfavorable", "unfavourable"},   {"neighborhood", "neighbourhood"},
    {"neighborhoods", "neighbourhoods"}, {"honorable", "honourable"}, {"behavioral", "behavioural"},
    {"behaviorally", "behaviourally"},
    {"center", "centre"},          {"centers", "centres"},            {"centered", "centred"},
    {"fiber", "fibre"},            {"fibers", "fibres"},              {"liter", "litre"},
    {"liters", "litres"},          {"theater", "theatre"},            {"theaters", "theatres"},
    {"caliber", "calibre"},        {"somber", "sombre"},              {"luster", "lustre"},
    {"defense", "defence"},        {"defenses", "defences"},          {"offense", "offence"},
    {"offenses", "offences"},      {"pretense", "pretence"},          {"catalog", "catalogue"},
    {"catalogs", "catalogues"},    {"dialog", "dialogue"},            {"dialogs", "dialogues"},
    {"analog", "analogue"},        {"analogs", "analogues"},          {"gray", "grey"},
    {"grayscale", "greyscale"},    {"modeling", "modelling"},         {"modeled", "modelled"},
    {"modeler", "modeller"},       {"labeled", "labelled"},           {"labeling", "labelling"},
    {"unlabeled", "unlabelled"},   {"traveled", "travelled"},         {"traveling", "travelling"},
    {"canceled", "cancelled"},     {"canceling", "cancelling"},       {"signaling", "signalling"},
    {"fueled", "fuelled"},         {"leveled", "levelled"},           {"leveling", "levelling"},
    {"tunneling", "tunnelling"},   {"channeled", "channelled"},       {"totaled", "totalled"},
    {"aging", "ageing"},           {"artifact", "artefact"},          {"artifacts", "artefacts"},
    {"acknowledgment", "acknowledgement"}, {"acknowledgments", "acknowledgements"},
    {"judgment", "judgement"},     {"judgments", "judgements"},       {"enrollment", "enrolment"},
    {"fulfill", "fulfil"},         {"fulfillment", "fulfilment"},     {"skillful", "skilful"},
    {"plow", "plough"},            {"mold", "mould"},                 {"aluminum", "aluminium"},
    {"maneuver", "manoeuvre"},     {"maneuvers", "manoeuvres"},       {"pediatric", "paediatric"},
    {"encyclopedia", "encyclopaedia"}, {"anesthesia", "anaesthesia"}, {"esthetic", "aesthetic"},
    {"estrogen", "oestrogen"},     {"hemoglobin", "haemoglobin"},     {"leukemia", "leukaemia"},
    {"orthopedic", "orthopaedic"}, {"willful", "wilful"},             {"installment", "instalment"},
    {"jewelry", "jewellery"},      {"cozy", "cosy"},                  {"mustache", "moustache"},
    {"pajamas", "pyjamas"},        {"skeptic", "sceptic"},            {"skeptical", "sceptical"},
    {"skepticism", "scepticism"},  {"sulfur", "sulphur"},             {"story", "storey"},
};

struct Tables {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::unordered_map<std::string, std::string> to_british;
  std::unordered_map<std::string, std::string> to_american;

  Tables() {
    auto add = [&](std::string am, std::string br) {
      if (to_british.count(am) || to_american.count(br) || to_british.count(br) || to_american.count(am)) return;
      to_british.emplace(am, br);
      to_american.emplace(br, am);
      pairs.emplace_back(std::move(am), std::move(br));
    };
    for (auto stem : kIzeStems)
      for (auto& sfx : kIzeSuffixes) add(std::string(stem) + sfx[0], std::string(stem) + sfx[1]);
    for (auto stem : kYzeStems)
      for (auto& sfx : kYzeSuffixes) add(std::string(stem) + sfx[0], std::string(stem) + sfx[1]);
    for (auto stem : kOrStems)
      for (auto& sfx : kOrSuffixes) add(std::string(stem) + sfx[0], std::string(stem) + sfx[1]);
    for (auto& e : kExplicit) add(e[0], e[1]);
    // "story" (tale) is spelled the same in both variants.
    to_british.erase("story");
    to_american.erase("storey");
    std::erase_if(pairs, [](const auto& p) { return p.first == "story"; });
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string apply_case(std::string_view pattern, std::string word) {
  bool all_upper = pattern.size() > 1;
  for (char c : pattern) all_upper = all_upper && std::isupper(static_cast<unsigned char>(c));
  if (all_upper) {
    for (auto& c : word) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (!pattern.empty() && std::isupper(static_cast<unsigned char>(pattern[0]))) {
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  }
  return word;
}

// Mask of bytes inside `code` or $math$ spans.
std::vector<bool> protected_mask(std::string_view text) {
  std::vector<bool> mask(text.size(), false);
  for (char delim : {'`', '$'}) {
    std::size_t i = 0;
    while (i < text.size()) {
      if (text[i] != delim || (i > 0 && text[i - 1] == '\\')) {
        ++i;
        continue;
      }
      const auto close = text.find(delim, i + 1);
      if (close == std::string_view::npos) break;
      for (std::size_t k = i; k <= close; ++k) mask[k] = true;
      i = close + 1;
    }
  }
  return mask;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& lexicon() { return tables().pairs; }

std::optional<std::string> convert_word(std::string_view word, Direction dir) {
  const auto& map = dir == Direction::AmericanToBritish ? tables().to_british : tables().to_american;
  auto it = map.find(lower(word));
  if (it == map.end()) return std::nullopt;
  return apply_case(word, it->second);
}

std::vector<WordReplacement> conversions(std::string_view text, Direction dir) {
  const auto mask = protected_mask(text);
  std::vector<WordReplacement> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alpha(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_alpha(text[j])) ++j;
    // Skip fragments of identifiers such as "color_map" or "rgb2gray".
    const bool glued = (i > 0 && (text[i - 1] == '_' || std::isdigit(static_cast<unsigned char>(text[i - 1])))) ||
                       (j < text.size() && (text[j] == '_' || std::isdigit(static_cast<unsigned char>(text[j]))));
    if (!mask[i] && !glued) {
      if (auto rep = convert_word(text.substr(i, j - i), dir)) out.push_back({i, j, *rep});
    }
    i = j;
  }
  return out;
}

std::pair<std::size_t, std::size_t> count_variants(std::string_view text) {
  return {conversions(text, Direction::AmericanToBritish).size(),
          conversions(text, Direction::BritishToAmerican).size()};
}

}  // namespace revlogic::spelling
