#include "xlsent/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "xlsent/errors.hpp"
#include "xlsent/stats.hpp"

namespace xlsent {

long ConfusionMatrix::total() const {
  long sum = 0;
  for (const auto& row : counts) {
    for (long c : row) sum += c;
  }
  return sum;
}

std::vector<int> encode_document(const Vocabulary& vocab, const Document& doc, int budget) {
  std::string joined;
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    if (p > 0) joined.push_back(' ');
    joined += doc.paragraphs[p];
  }
  return truncate_head_tail(encode(vocab, joined, /*add_specials=*/true), budget);
}

std::vector<SentimentLabel> predict(const EncoderParameters& params, const Vocabulary& vocab,
                                    const LabeledDataset& docs, int truncation_budget,
                                    std::size_t batch_size) {
  if (docs.empty()) throw DataError("predict: empty dataset");
  std::vector<SentimentLabel> preds;
  preds.reserve(docs.size());
  ForwardOptions opts;
  opts.want_mlm = false;
  for (std::size_t start = 0; start < docs.size(); start += batch_size) {
    const std::size_t end = std::min(docs.size(), start + batch_size);
    std::vector<std::vector<int>> rows;
    for (std::size_t i = start; i < end; ++i) {
      rows.push_back(encode_document(vocab, docs.at(i), truncation_budget));
    }
    const MaskedBatch batch = pad_batch(rows);
    const HeadLogits logits = forward(params, batch, opts);
    for (std::size_t r = 0; r < batch.batch_size(); ++r) {
      int best = 0;
      for (int c = 1; c < 3; ++c) {
        if (logits.doc_sentiment(r, static_cast<std::size_t>(c)) >
            logits.doc_sentiment(r, static_cast<std::size_t>(best))) {
          best = c;
        }
      }
      preds.push_back(static_cast<SentimentLabel>(best));
    }
  }
  return preds;
}

double f1_score(const std::vector<SentimentLabel>& golds, const std::vector<SentimentLabel>& preds,
                F1Average average) {
  if (golds.size() != preds.size()) throw DataError("f1_score: golds/preds length mismatch");
  if (golds.empty()) throw DataError("f1_score: empty inputs");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < golds.size(); ++i) cm.add(golds[i], preds[i]);

  double sum = 0.0, weight_sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    long tp = cm.counts[c][c];
    long fp = 0, fn = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      if (o == c) continue;
      fp += cm.counts[o][c];
      fn += cm.counts[c][o];
    }
    const long denom = 2 * tp + fp + fn;
    if (denom == 0) continue;  // class absent from both sides
    const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    const double support = static_cast<double>(tp + fn);
    if (average == F1Average::weighted) {
      sum += f1 * support;
      weight_sum += support;
    } else {
      sum += f1;
      weight_sum += 1.0;
    }
  }
  if (weight_sum == 0.0) throw DataError("f1_score: no classes present");
  return sum / weight_sum;
}

double macro_f1(const std::vector<SentimentLabel>& golds, const std::vector<SentimentLabel>& preds) {
  return f1_score(golds, preds, F1Average::macro);
}

std::pair<double, double> aggregate_folds(const std::vector<double>& scores) {
  if (scores.size() < 2) throw DataError("aggregate_folds: need at least 2 scores");
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / static_cast<double>(scores.size() - 1))};
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("paired_t_test: length mismatch");
  if (a.size() < 2) throw DataError("paired_t_test: need at least 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(diff.size() - 1));
  if (sd == 0.0) {
    if (mean == 0.0) return {0.0, 1.0};
    throw NumericalError("paired_t_test: zero variance of differences");
  }
  const double n = static_cast<double>(diff.size());
  TTestResult result;
  result.t = mean / (sd / std::sqrt(n));
  result.p = stats::student_t_two_sided_p(result.t, n - 1.0);
  return result;
}

int language_report_rank(const std::string& language) {
  std::string folded;
  for (char c : language) folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::vector<std::vector<std::string>> order = {
      {"sr", "serbian"}, {"sq", "albanian"}, {"bs", "bosnian"},
      {"et", "estonian"}, {"hr", "croatian"}, {"mk", "macedonian"}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const std::string& alias : order[i]) {
      if (folded == alias) return static_cast<int>(i);
    }
  }
  return static_cast<int>(order.size());
}

namespace {

std::string pct(double value, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

std::string EvalReport::to_csv() const {
  std::size_t folds = 0;
  for (const EvalEntry& e : entries) folds = std::max(folds, e.fold_scores.size());
  std::ostringstream out;
  out << "regime,translation,language,mean_f1,std_f1";
  for (std::size_t i = 0; i < folds; ++i) out << ",fold_" << i;
  out << '\n';
  for (const EvalEntry& e : entries) {
    out << regime << ',' << (translation ? "yes" : "no") << ',' << e.language << ',' << pct(e.mean_f1) << ','
        << pct(e.std_f1);
    for (std::size_t i = 0; i < folds; ++i) {
      out << ',';
      if (i < e.fold_scores.size()) out << pct(e.fold_scores[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << "regime: " << regime << "  translation: " << (translation ? "Yes" : "No") << '\n';
  for (const EvalEntry& e : entries) {
    out << "  " << e.language << ": " << pct(e.mean_f1) << " ± " << pct(e.std_f1) << '\n';
  }
  return out.str();
}

EvalReport zero_shot_eval(const std::vector<Checkpoint>& fold_checkpoints,
                          const std::map<std::string, LabeledDataset>& targets, int truncation_budget,
                          const std::string& regime, bool translation) {
  if (fold_checkpoints.empty()) throw DataError("zero_shot_eval: no checkpoints");
  for (const auto& [language, dataset] : targets) {
    if (dataset.empty()) throw DataError("zero_shot_eval: empty target dataset for " + language);
  }

  std::vector<std::string> languages;
  for (const auto& [language, dataset] : targets) languages.push_back(language);
  std::stable_sort(languages.begin(), languages.end(), [](const std::string& a, const std::string& b) {
    const int ra = language_report_rank(a), rb = language_report_rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });

  EvalReport report;
  report.regime = regime;
  report.translation = translation;
  for (const std::string& language : languages) {
    const LabeledDataset& target = targets.at(language);
    std::vector<SentimentLabel> golds;
    golds.reserve(target.size());
    for (const Document& d : target.documents()) golds.push_back(d.sentiment);

    EvalEntry entry;
    entry.language = language;
    for (const Checkpoint& ckpt : fold_checkpoints) {
      if (!ckpt.vocab) throw DataError("zero_shot_eval: checkpoint lacks an embedded vocabulary");
      const std::vector<SentimentLabel> preds = predict(ckpt.params, *ckpt.vocab, target, truncation_budget);
      entry.fold_scores.push_back(100.0 * macro_f1(golds, preds));
    }
    if (entry.fold_scores.size() >= 2) {
      std::tie(entry.mean_f1, entry.std_f1) = aggregate_folds(entry.fold_scores);
    } else {
      entry.mean_f1 = entry.fold_scores.at(0);
      entry.std_f1 = 0.0;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace xlsent
