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

#include "revlogic/levenshtein.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "revlogic/text.hpp"

namespace revlogic {
namespace {

using Word = std::uint64_t;
constexpr int kWordBits = 64;

struct BlockStep {
  int hout;
  Word ph;  // horizontal +1 deltas before the shift
  Word mh;  // horizontal -1 deltas before the shift
};

// One column step of the bit-vector recurrence for a 64-row block.
// hin is the horizontal delta entering the block from the row above.
inline BlockStep advance_block(Word& pv, Word& mv, Word eq, int hin) {
  const Word xv = eq | mv;
  if (hin < 0) eq |= Word{1};
  const Word xh = (((eq & pv) + pv) ^ pv) | eq;
  Word ph = mv | ~(xh | pv);
  Word mh = pv & xh;
  const BlockStep step{static_cast<int>(ph >> (kWordBits - 1)) -
                           static_cast<int>(mh >> (kWordBits - 1)),
                       ph, mh};
  ph <<= 1;
  mh <<= 1;
  if (hin < 0) {
    mh |= Word{1};
  } else if (hin > 0) {
    ph |= Word{1};
  }
  pv = mh | ~(xv | ph);
  mv = ph & xv;
  return step;
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  a.remove_prefix(prefix);
  b.remove_prefix(prefix);
  std::size_t suffix = 0;
  while (suffix < a.size() && suffix < b.size() &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  a.remove_suffix(suffix);
  b.remove_suffix(suffix);

  // The pattern (rows) is the shorter string.
  std::u32string_view pattern = a.size() <= b.size() ? a : b;
  std::u32string_view target = a.size() <= b.size() ? b : a;
  const std::size_t m = pattern.size();
  if (m == 0) return target.size();

  const std::size_t blocks = (m + kWordBits - 1) / kWordBits;
  std::unordered_map<char32_t, std::size_t> symbol_row;
  std::vector<Word> peq;
  for (std::size_t i = 0; i < m; ++i) {
    auto [it, inserted] = symbol_row.try_emplace(pattern[i], peq.size() / blocks);
    if (inserted) peq.resize(peq.size() + blocks, 0);
    peq[it->second * blocks + i / kWordBits] |= Word{1} << (i % kWordBits);
  }
  const std::vector<Word> no_match(blocks, 0);

  std::vector<Word> pv(blocks, ~Word{0});
  std::vector<Word> mv(blocks, 0);
  const std::size_t last_block = blocks - 1;
  const unsigned last_bit = static_cast<unsigned>((m - 1) % kWordBits);
  std::size_t score = m;

  for (char32_t c : target) {
    const auto found = symbol_row.find(c);
    const Word* eq = found == symbol_row.end() ? no_match.data() : &peq[found->second * blocks];
    int hin = 1;
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      const BlockStep step = advance_block(pv[blk], mv[blk], eq[blk], hin);
      if (blk == last_block) {
        if ((step.ph >> last_bit) & 1) {
          ++score;
        } else if ((step.mh >> last_bit) & 1) {
          --score;
        }
      }
      hin = step.hout;
    }
  }
  return score;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a == b) return 0;
  const std::u32string ua = text::utf8_decode(a);
  const std::u32string ub = text::utf8_decode(b);
  return levenshtein(std::u32string_view(ua), std::u32string_view(ub));
}

}  // namespace revlogic
