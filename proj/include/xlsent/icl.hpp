#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xlsent/clients.hpp"
#include "xlsent/corpus.hpp"

namespace xlsent {

// The fixed two-paragraph system prompt sent before every query.
extern const char* const kIclSystemPrompt;

struct PromptBundle {
  std::string system_prompt;
  std::vector<std::pair<std::string, SentimentLabel>> shots;  // (article text, label)
  std::vector<std::string> shot_ids;                          // for exclusion from evaluation
  std::string query_article;
  std::string rendered;
};

// Deterministic first-k-per-label shot selection from the pool, rendered as
//   Article >> <text> <<, sentiment: <label>
// blocks after the system prompt, ending with the incomplete query slot.
PromptBundle build_prompt(int shots_per_label, const LabeledDataset& shot_pool,
                          const std::string& query_article);

// Case-folded scan; the earliest occurrence of positive/neutral/negative
// wins; nullopt when none occurs.
std::optional<SentimentLabel> parse_response(const std::string& text);

struct IclOptions {
  int shots_per_label = 3;  // in {0, 1, 3}
  int folds = 10;
  std::uint64_t seed = 0;
  bool translate = false;       // translate evaluated articles to English
  bool retry_invalid_once = false;
};

struct IclResult {
  std::vector<double> slice_f1;  // percent, one per fold slice
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  std::size_t evaluated_count = 0;
  std::vector<std::string> shot_ids;
  std::vector<std::string> invalid_doc_ids;
};

// Shot documents are excluded from the evaluated set; the target is split
// into seeded slices and scored per slice, with invalid responses counted
// as incorrect.
IclResult icl_evaluate(LlmClient& llm, TranslationClient* translator, const LabeledDataset& target,
                       const LabeledDataset& shot_pool, const IclOptions& options);

// Stub that answers every document with its gold label.
FileBackedLlmClient make_gold_echo_client(const LabeledDataset& dataset);

std::string render_article_text(const Document& doc);

}  // namespace xlsent
