#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xlsent/label.hpp"

namespace xlsent {

struct Document {
  std::string id;
  std::string language;  // ISO 639-1
  std::vector<std::string> paragraphs;
  SentimentLabel sentiment = SentimentLabel::neutral;
  std::optional<std::vector<int>> raw_scores;
  // Paragraph-level sentiment, parallel to `paragraphs`. Absent in corpora
  // that only carry document labels; paragraphs then inherit the document
  // label when a paragraph view is built.
  std::optional<std::vector<SentimentLabel>> paragraph_sentiments;
};

// Immutable labeled corpus. Construction validates id uniqueness and
// paragraph/annotation consistency; afterwards safe for concurrent reads.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<Document> docs);

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& at(std::size_t i) const { return docs_[i]; }
  const std::vector<Document>& documents() const { return docs_; }
  bool contains(const std::string& id) const { return index_.count(id) > 0; }
  const Document& by_id(const std::string& id) const;

 private:
  std::vector<Document> docs_;
  std::map<std::string, std::size_t> index_;
};

struct Paragraph {
  std::string doc_id;
  std::size_t index = 0;  // position of the paragraph within its document
  std::string text;
  std::optional<SentimentLabel> sentiment;
  std::optional<int> poa;  // in {0,1,2} once annotated
};

// Paragraphs of the non-test documents of one fold, with parent document
// lengths retained so position labels can be computed later.
struct ParagraphDataset {
  std::vector<Paragraph> paragraphs;
  std::map<std::string, std::size_t> doc_lengths;
};

struct FoldPlan {
  int fold_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> test_ids;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;

  std::string to_json() const;
  static FoldPlan from_json(const std::string& text);
};

struct CorpusStats {
  std::string language;
  std::size_t doc_count = 0;
  double avg_doc_char_len = 0.0;
  double avg_words_per_doc = 0.0;
  double avg_word_len = 0.0;
  double avg_sentence_len = 0.0;  // words per sentence
  std::size_t sentence_count = 0;
  std::map<SentimentLabel, double> class_percentages;
};

// JSON Lines loader. One document per line:
//   {"id": str, "language": str, "sentiment": str, "paragraphs": [str, ...],
//    "raw_scores": [int, ...]?, "paragraph_sentiments": [str, ...]?}
// Errors carry the offending line number. `expected_language`, when given,
// rejects documents tagged with any other language.
LabeledDataset load_corpus(const std::string& path,
                           const std::optional<std::string>& expected_language = std::nullopt);

// Canonical serialization; load_corpus(save_corpus(d)) round-trips byte-identically.
void save_corpus(const LabeledDataset& dataset, const std::string& path);

CorpusStats corpus_stats(const LabeledDataset& dataset);

std::string stats_csv_header();
std::string stats_csv_row(const CorpusStats& stats);

// Seeded shuffle + k contiguous test blocks; remainder split 80/20 into
// train/val with floor rounding on train.
std::vector<FoldPlan> make_folds(const LabeledDataset& dataset, int k, std::uint64_t seed);

// All paragraphs of train+val documents of the plan. Never yields a
// paragraph of a test document.
ParagraphDataset paragraph_view(const LabeledDataset& dataset, const FoldPlan& plan);

// Word / sentence splitting shared with the tokenizer-facing stats.
std::vector<std::string> split_words(const std::string& text);
std::size_t count_sentences(const std::string& text);

}  // namespace xlsent
