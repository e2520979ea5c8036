#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sim/corpus.hpp"

namespace testsupport {

// 60 raw-completion parses frozen as oracles: 40 belief + 20 share.
// Expected values were worked out by hand against the token rules
// before the parsers were written.

struct BeliefCase {
  std::string raw;
  std::optional<sim::BeliefLabel> expected;
};

struct ShareCase {
  std::string raw;
  std::optional<int> expected;
};

inline std::vector<BeliefCase> belief_cases() {
  using sim::BeliefLabel;
  const auto R = BeliefLabel::Real;
  const auto M = BeliefLabel::Misinfo;
  const std::optional<sim::BeliefLabel> I = std::nullopt;
  return {
      // Real: canonical and verbose affirmations.
      {"yes", R},
      {"Yes.", R},
      {"YES!", R},
      {"Yes, I believe it.", R},
      {"It's real.", R},
      {"Real news, definitely.", R},
      {"True.", R},
      {"I believe the headline.", R},
      {"Absolutely yes", R},
      {"This seems true to me.", R},
      {"I think it is true.", R},
      // Lone "not" is no negation and "not believe" is no guarded bigram,
      // so the affirmation at token 4 wins. Pins the guard's limits.
      {"I do not believe it is real.", R},
      {"yes yes yes", R},
      {"It sounds believable and real.", R},
      // Misinfo: canonical and verbose negations, including the bigram guard.
      {"no", M},
      {"No.", M},
      {"No, this is misinformation.", M},
      {"Fake news.", M},
      {"This is false.", M},
      {"misinfo", M},
      {"It is misinformation.", M},
      {"not real", M},
      {"Not true.", M},
      {"This is not real news.", M},
      {"The headline is not true at all.", M},
      {"Definitely fake.", M},
      {"No way, that's false.", M},
      {"I think this is not real.", M},
      {"FALSE", M},
      // First match wins: the leading "no" beats the later "real".
      {"no, it's real", M},
      // Invalid: hedges, garbage, and the 10-token scan limit.
      {"maybe", I},
      {"It is hard to say.", I},
      {"", I},
      {"not", I},
      {"?????", I},
      {"12345", I},
      {"I cannot determine the veracity of this claim.", I},
      // "yes" is the 11th token and falls outside the scan window.
      {"The answer depends on many conflicting factors entirely unknown here, yes.", I},
      {"Unsure.", I},
      {"Possibly, possibly not.", I},
  };
}

inline std::vector<ShareCase> share_cases() {
  const std::optional<int> I = std::nullopt;
  return {
      // Valid: first standalone digit token in 1..5.
      {"3", 3},
      {"5.", 5},
      {"1", 1},
      {"I would say 5 out of 5.", 5},
      {"Likely a 4/5", 4},
      {"I'd give it a 3 on that scale.", 3},
      {"2 - not very likely", 2},
      {"Rating: 4", 4},
      {"My answer is 1.", 1},
      {"On that scale, 2.", 2},
      // Invalid: off-scale digits, multi-digit tokens, or no digit at all.
      {"0", I},
      {"6", I},
      {"9", I},
      {"10", I},
      {"55", I},
      {"7 out of 10", I},
      {"zero chance", I},
      {"100%", I},
      {"I would never share this.", I},
      {"", I},
  };
}

}  // namespace testsupport
