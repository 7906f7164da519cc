#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xlsent/checkpoint.hpp"
#include "xlsent/corpus.hpp"
#include "xlsent/encoder.hpp"

namespace xlsent {

struct ConfusionMatrix {
  std::array<std::array<long, 3>, 3> counts{};  // [gold][predicted]

  void add(SentimentLabel gold, SentimentLabel predicted) {
    ++counts[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)];
  }
  long total() const;
};

enum class F1Average { macro, weighted };

// Joins paragraphs, encodes with [CLS]/[SEP], applies head/tail truncation.
std::vector<int> encode_document(const Vocabulary& vocab, const Document& doc, int budget);

// Argmax over the document-sentiment head; ties go to the lower class index.
std::vector<SentimentLabel> predict(const EncoderParameters& params, const Vocabulary& vocab,
                                    const LabeledDataset& docs, int truncation_budget,
                                    std::size_t batch_size = 32);

// Per-class F1 from confusion counts; classes absent from both golds and
// predictions are skipped so tiny synthetic sets stay well-defined.
double f1_score(const std::vector<SentimentLabel>& golds, const std::vector<SentimentLabel>& preds,
                F1Average average = F1Average::macro);
double macro_f1(const std::vector<SentimentLabel>& golds, const std::vector<SentimentLabel>& preds);

// (arithmetic mean, sample standard deviation with n-1 denominator)
std::pair<double, double> aggregate_folds(const std::vector<double>& scores);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
};

// Standard paired t on the differences; two-sided p via Student-t with n-1
// degrees of freedom. Identical sequences give (0, 1); a constant non-zero
// difference is degenerate and raises an error.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct EvalEntry {
  std::string language;
  double mean_f1 = 0.0;  // percent
  double std_f1 = 0.0;
  std::vector<double> fold_scores;  // percent
};

struct EvalReport {
  std::string regime;
  bool translation = false;
  std::vector<EvalEntry> entries;

  std::string to_csv() const;
  std::string to_table() const;  // "71.02 ± 3.71"-style rendering
};

// Each checkpoint scores every full target dataset; per-language mean and
// std across checkpoints. Checkpoints must embed their vocabulary.
EvalReport zero_shot_eval(const std::vector<Checkpoint>& fold_checkpoints,
                          const std::map<std::string, LabeledDataset>& targets, int truncation_budget,
                          const std::string& regime, bool translation);

// Table-3 column order (Serbian, Albanian, Bosnian, Estonian, Croatian,
// Macedonian) for known languages, alphabetical afterwards.
int language_report_rank(const std::string& language);

}  // namespace xlsent
