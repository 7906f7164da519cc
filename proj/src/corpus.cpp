#include "xlsent/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xlsent/errors.hpp"
#include "xlsent/rng.hpp"

namespace xlsent {

using nlohmann::json;

std::string to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::negative: return "negative";
    case SentimentLabel::neutral: return "neutral";
    case SentimentLabel::positive: return "positive";
  }
  throw DataError("invalid sentiment label value");
}

SentimentLabel label_from_string(const std::string& text) {
  std::string folded;
  folded.reserve(text.size());
  for (char c : text) folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (folded == "negative") return SentimentLabel::negative;
  if (folded == "neutral") return SentimentLabel::neutral;
  if (folded == "positive") return SentimentLabel::positive;
  throw DataError("unknown sentiment label \"" + text + "\"");
}

SentimentLabel aggregate_annotations(const std::vector<int>& scores) {
  if (scores.empty()) throw DataError("aggregate_annotations: empty score sequence");
  double sum = 0.0;
  for (int s : scores) {
    if (s < 1 || s > 5) {
      throw DataError("aggregate_annotations: score " + std::to_string(s) + " outside [1,5]");
    }
    sum += s;
  }
  const double mean = sum / static_cast<double>(scores.size());
  if (mean <= 2.4) return SentimentLabel::negative;
  if (mean >= 3.6) return SentimentLabel::positive;
  return SentimentLabel::neutral;
}

LabeledDataset::LabeledDataset(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const Document& d = docs_[i];
    if (d.id.empty()) throw DataError("document at position " + std::to_string(i) + " has empty id");
    if (d.paragraphs.empty()) throw DataError("document \"" + d.id + "\" has no paragraphs");
    if (!index_.emplace(d.id, i).second) throw DataError("duplicate document id \"" + d.id + "\"");
    if (d.raw_scores && aggregate_annotations(*d.raw_scores) != d.sentiment) {
      throw DataError("document \"" + d.id + "\": raw_scores aggregate to " +
                      to_string(aggregate_annotations(*d.raw_scores)) + " but sentiment is " +
                      to_string(d.sentiment));
    }
    if (d.paragraph_sentiments && d.paragraph_sentiments->size() != d.paragraphs.size()) {
      throw DataError("document \"" + d.id + "\": paragraph_sentiments length " +
                      std::to_string(d.paragraph_sentiments->size()) + " != paragraph count " +
                      std::to_string(d.paragraphs.size()));
    }
  }
}

const Document& LabeledDataset::by_id(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unknown document id \"" + id + "\"");
  return docs_[it->second];
}

namespace {

Document parse_document(const json& rec, std::size_t line_no) {
  auto fail = [line_no](const std::string& msg) -> DataError {
    return DataError("line " + std::to_string(line_no) + ": " + msg);
  };
  if (!rec.is_object()) throw fail("record is not a JSON object");
  for (const char* field : {"id", "language", "sentiment", "paragraphs"}) {
    if (!rec.contains(field)) throw fail(std::string("missing field \"") + field + "\"");
  }
  Document doc;
  try {
    doc.id = rec.at("id").get<std::string>();
    doc.language = rec.at("language").get<std::string>();
    doc.sentiment = label_from_string(rec.at("sentiment").get<std::string>());
    doc.paragraphs = rec.at("paragraphs").get<std::vector<std::string>>();
    if (rec.contains("raw_scores")) {
      doc.raw_scores = rec.at("raw_scores").get<std::vector<int>>();
    }
    if (rec.contains("paragraph_sentiments")) {
      std::vector<SentimentLabel> labels;
      for (const auto& s : rec.at("paragraph_sentiments").get<std::vector<std::string>>()) {
        labels.push_back(label_from_string(s));
      }
      doc.paragraph_sentiments = std::move(labels);
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  } catch (const DataError& e) {
    throw fail(e.what());
  }
  if (doc.paragraphs.empty()) throw fail("document \"" + doc.id + "\" has empty \"paragraphs\"");
  return doc;
}

}  // namespace

LabeledDataset load_corpus(const std::string& path, const std::optional<std::string>& expected_language) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file \"" + path + "\"");
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    Document doc = parse_document(rec, line_no);
    if (expected_language && doc.language != *expected_language) {
      throw DataError("line " + std::to_string(line_no) + ": language \"" + doc.language +
                      "\" does not match expected \"" + *expected_language + "\"");
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw DataError("corpus file \"" + path + "\" contains no documents");
  return LabeledDataset(std::move(docs));
}

void save_corpus(const LabeledDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file \"" + path + "\"");
  for (const Document& d : dataset.documents()) {
    json rec;
    rec["id"] = d.id;
    rec["language"] = d.language;
    rec["sentiment"] = to_string(d.sentiment);
    rec["paragraphs"] = d.paragraphs;
    if (d.raw_scores) rec["raw_scores"] = *d.raw_scores;
    if (d.paragraph_sentiments) {
      std::vector<std::string> labels;
      for (SentimentLabel s : *d.paragraph_sentiments) labels.push_back(to_string(s));
      rec["paragraph_sentiments"] = labels;
    }
    out << rec.dump() << '\n';
  }
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) {
        words.push_back(current);
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(current);
  return words;
}

std::size_t count_sentences(const std::string& text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) ++count;
  }
  return count;
}

CorpusStats corpus_stats(const LabeledDataset& dataset) {
  if (dataset.empty()) throw DataError("corpus_stats: empty dataset");
  CorpusStats stats;
  stats.language = dataset.at(0).language;
  stats.doc_count = dataset.size();
  std::size_t total_chars = 0, total_words = 0, total_word_chars = 0, total_sentences = 0;
  std::map<SentimentLabel, std::size_t> class_counts;
  for (SentimentLabel l : kAllLabels) class_counts[l] = 0;
  for (const Document& d : dataset.documents()) {
    ++class_counts[d.sentiment];
    std::size_t doc_chars = 0;
    for (std::size_t p = 0; p < d.paragraphs.size(); ++p) {
      if (p > 0) ++doc_chars;  // joining separator
      doc_chars += d.paragraphs[p].size();
      for (const std::string& w : split_words(d.paragraphs[p])) {
        ++total_words;
        total_word_chars += w.size();
      }
      total_sentences += count_sentences(d.paragraphs[p]);
    }
    total_chars += doc_chars;
  }
  const double n = static_cast<double>(stats.doc_count);
  stats.avg_doc_char_len = static_cast<double>(total_chars) / n;
  stats.avg_words_per_doc = static_cast<double>(total_words) / n;
  stats.avg_word_len =
      total_words == 0 ? 0.0 : static_cast<double>(total_word_chars) / static_cast<double>(total_words);
  stats.sentence_count = total_sentences;
  stats.avg_sentence_len =
      total_sentences == 0 ? 0.0 : static_cast<double>(total_words) / static_cast<double>(total_sentences);
  for (SentimentLabel l : kAllLabels) {
    stats.class_percentages[l] = 100.0 * static_cast<double>(class_counts[l]) / n;
  }
  return stats;
}

namespace {

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

std::string stats_csv_header() {
  return "language,# Doc.,Doc. Len.,Avg. # Words,Avg. Word Len.,Avg. Sent. Len.,# Sent.,positive,neutral,negative";
}

std::string stats_csv_row(const CorpusStats& s) {
  std::ostringstream out;
  out << s.language << ',' << s.doc_count << ',' << format_fixed(s.avg_doc_char_len, 2) << ','
      << format_fixed(s.avg_words_per_doc, 2) << ',' << format_fixed(s.avg_word_len, 2) << ','
      << format_fixed(s.avg_sentence_len, 2) << ',' << s.sentence_count << ','
      << format_fixed(s.class_percentages.at(SentimentLabel::positive), 2) << ','
      << format_fixed(s.class_percentages.at(SentimentLabel::neutral), 2) << ','
      << format_fixed(s.class_percentages.at(SentimentLabel::negative), 2);
  return out.str();
}

std::vector<FoldPlan> make_folds(const LabeledDataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("make_folds: k must be >= 2");
  const std::size_t n = dataset.size();
  if (static_cast<std::size_t>(k) > n) {
    throw DataError("make_folds: k=" + std::to_string(k) + " exceeds dataset size " + std::to_string(n));
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  for (const Document& d : dataset.documents()) ids.push_back(d.id);
  Rng rng(seed);
  rng.shuffle(ids);

  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::vector<FoldPlan> plans;
  std::size_t offset = 0;
  for (int fold = 0; fold < k; ++fold) {
    const std::size_t block = base + (static_cast<std::size_t>(fold) < extra ? 1 : 0);
    FoldPlan plan;
    plan.fold_index = fold;
    plan.seed = seed;
    plan.test_ids.assign(ids.begin() + static_cast<long>(offset),
                         ids.begin() + static_cast<long>(offset + block));
    std::vector<std::string> rest;
    rest.reserve(n - block);
    rest.insert(rest.end(), ids.begin(), ids.begin() + static_cast<long>(offset));
    rest.insert(rest.end(), ids.begin() + static_cast<long>(offset + block), ids.end());
    const std::size_t train_size = static_cast<std::size_t>(0.8 * static_cast<double>(rest.size()));
    plan.train_ids.assign(rest.begin(), rest.begin() + static_cast<long>(train_size));
    plan.val_ids.assign(rest.begin() + static_cast<long>(train_size), rest.end());
    plans.push_back(std::move(plan));
    offset += block;
  }
  return plans;
}

std::string FoldPlan::to_json() const {
  json j;
  j["fold_index"] = fold_index;
  j["seed"] = seed;
  j["test_ids"] = test_ids;
  j["train_ids"] = train_ids;
  j["val_ids"] = val_ids;
  return j.dump(2);
}

FoldPlan FoldPlan::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("fold plan: malformed JSON: ") + e.what());
  }
  FoldPlan plan;
  try {
    plan.fold_index = j.at("fold_index").get<int>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    plan.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    plan.val_ids = j.at("val_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("fold plan: ") + e.what());
  }
  return plan;
}

ParagraphDataset paragraph_view(const LabeledDataset& dataset, const FoldPlan& plan) {
  std::set<std::string> test(plan.test_ids.begin(), plan.test_ids.end());
  std::vector<std::string> pretrain_ids;
  pretrain_ids.reserve(plan.train_ids.size() + plan.val_ids.size());
  pretrain_ids.insert(pretrain_ids.end(), plan.train_ids.begin(), plan.train_ids.end());
  pretrain_ids.insert(pretrain_ids.end(), plan.val_ids.begin(), plan.val_ids.end());
  for (const std::string& id : plan.test_ids) {
    if (!dataset.contains(id)) throw DataError("paragraph_view: plan references unknown id \"" + id + "\"");
  }
  if (pretrain_ids.empty()) throw DataError("paragraph_view: no pre-training data (train and val are empty)");

  ParagraphDataset view;
  for (const std::string& id : pretrain_ids) {
    if (!dataset.contains(id)) throw DataError("paragraph_view: plan references unknown id \"" + id + "\"");
    if (test.count(id) > 0) throw DataError("paragraph_view: id \"" + id + "\" appears in both test and train/val");
    const Document& doc = dataset.by_id(id);
    view.doc_lengths[doc.id] = doc.paragraphs.size();
    for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
      Paragraph para;
      para.doc_id = doc.id;
      para.index = p;
      para.text = doc.paragraphs[p];
      para.sentiment = doc.paragraph_sentiments ? (*doc.paragraph_sentiments)[p] : doc.sentiment;
      view.paragraphs.push_back(std::move(para));
    }
  }
  return view;
}

}  // namespace xlsent
