#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "xlsent/corpus.hpp"

namespace xlsent {

// Paired pseudo-language corpus generator. Both languages share one stem
// inventory; a stem is rendered either identically in both languages
// (shared) or with a language-specific suffix, so cross-lingual transfer is
// possible exactly in proportion to the shared fraction. Sentiment is
// carried by dedicated stem lexicons, concentrated in the opening and
// closing paragraphs.
struct SynthConfig {
  int train_docs = 1500;  // first pseudo-language
  int target_docs = 300;  // second pseudo-language
  double shared_stems = 0.6;
  int neutral_stems = 400;
  int sentiment_stems = 60;  // per polarity
  int min_paragraphs = 3;
  int max_paragraphs = 6;
  int min_words = 12;
  int max_words = 28;
  double signal_density = 0.5;    // sentiment-word rate inside signal paragraphs
  double noise_rate = 0.04;       // wrong-lexicon contamination
  double edge_signal_rate = 0.85;  // signal paragraph probability in first/last third
  double mid_signal_rate = 0.35;   // ... in the middle third
  // polar documents carry some opposite-polarity paragraphs, so the document
  // label is an aggregate over mixed paragraph evidence rather than a purely
  // redundant repetition of one lexicon
  double opposite_mix = 0.15;
  double raw_score_rate = 0.5;     // fraction of documents that carry raw annotations
  std::uint64_t seed = 7;
  std::string language_a = "aa";
  std::string language_b = "bb";
};

std::pair<LabeledDataset, LabeledDataset> generate_synthetic_pair(const SynthConfig& config);

}  // namespace xlsent
