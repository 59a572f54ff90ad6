#ifndef COURTQG_SYNTH_HPP
#define COURTQG_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "courtqg/data.hpp"

namespace courtqg {

// Knobs for the template-driven private-loan debate generator. The
// placeholder pools bound how many distinct <person_K>/<amount_K>/<date_K>
// surface forms appear, which indirectly controls vocabulary size.
struct SynthConfig {
  size_t n_dialogues = 100;
  uint64_t seed = 1;
  size_t n_persons = 24;
  size_t n_amounts = 16;
  size_t n_dates = 12;

  std::string to_json() const;
};

// Generates scripted debates: each dialogue opens with an identity check and
// walks a random sequence of case-investigation intents (loan amount,
// interest agreement, repayment, spouse liability, ...). Every intent expands
// to judge-question/litigant-answer template pairs with slot fillers; judge
// turns carry the intent's knowledge elements. Fully deterministic given the
// config.
//
// When intent_scripts is non-null it receives, per dialogue, the ordered
// intent names that were expanded — ground truth for qualitative inspection
// only; the model never sees it.
std::vector<Dialogue> generate_synthetic_corpus(
    const SynthConfig& config, std::vector<std::vector<std::string>>* intent_scripts = nullptr);

}  // namespace courtqg

#endif  // COURTQG_SYNTH_HPP
