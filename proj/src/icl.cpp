#include "xlsent/icl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include "xlsent/errors.hpp"
#include "xlsent/evaluation.hpp"
#include "xlsent/rng.hpp"

namespace xlsent {

const char* const kIclSystemPrompt =
    "Welcome to your role as a Sentiment Analyst. Your job is crucial and involves meticulously reading "
    "and understanding the text provided to determine its overall sentiment. It's important to approach "
    "this task with attention to detail, considering the subtleties of language, tone, context, and the "
    "intent behind the words.\n"
    "\n"
    "As a Sentiment Analyst, your primary task today is to analyze the following news article. "
    "After a thorough review, classify the sentiment of the article as \"positive,\" \"negative,\" or "
    "\"neutral.\" "
    "Remember, your analysis must be based on concrete evidence from the text. "
    "As an output you need to only provide the sentiment, so output \"positive\" if the sentiment is "
    "positive, \"neutral\" if the sentiment is neutral, and \"negative\" if the sentiment is negative.";

std::string render_article_text(const Document& doc) {
  std::string text;
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    if (p > 0) text.push_back(' ');
    text += doc.paragraphs[p];
  }
  return text;
}

PromptBundle build_prompt(int shots_per_label, const LabeledDataset& shot_pool,
                          const std::string& query_article) {
  if (shots_per_label != 0 && shots_per_label != 1 && shots_per_label != 3) {
    throw DataError("build_prompt: shots_per_label must be 0, 1 or 3");
  }
  if (query_article.empty()) throw DataError("build_prompt: empty query article");

  PromptBundle bundle;
  bundle.system_prompt = kIclSystemPrompt;
  bundle.query_article = query_article;

  if (shots_per_label > 0) {
    std::array<std::vector<std::size_t>, 3> picked;
    for (std::size_t i = 0; i < shot_pool.size(); ++i) {
      auto& slot = picked[static_cast<std::size_t>(shot_pool.at(i).sentiment)];
      if (slot.size() < static_cast<std::size_t>(shots_per_label)) slot.push_back(i);
    }
    for (SentimentLabel label : kAllLabels) {
      const auto& slot = picked[static_cast<std::size_t>(label)];
      if (slot.size() < static_cast<std::size_t>(shots_per_label)) {
        throw DataError("build_prompt: shot pool has only " + std::to_string(slot.size()) + " " +
                        to_string(label) + " examples, need " + std::to_string(shots_per_label));
      }
    }
    std::vector<std::size_t> selected;
    for (const auto& slot : picked) selected.insert(selected.end(), slot.begin(), slot.end());
    std::sort(selected.begin(), selected.end());  // keep pool order in the rendered prompt
    for (std::size_t i : selected) {
      const Document& doc = shot_pool.at(i);
      bundle.shots.push_back({render_article_text(doc), doc.sentiment});
      bundle.shot_ids.push_back(doc.id);
    }
  }

  std::string rendered = bundle.system_prompt;
  rendered += "\n\n";
  for (const auto& [text, label] : bundle.shots) {
    rendered += "Article >> " + text + " <<, sentiment: " + to_string(label) + "\n\n";
  }
  rendered += "Article >> " + query_article + " <<, sentiment:";
  bundle.rendered = std::move(rendered);
  return bundle;
}

std::optional<SentimentLabel> parse_response(const std::string& text) {
  std::string folded;
  folded.reserve(text.size());
  for (char c : text) folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::size_t best_pos = std::string::npos;
  std::optional<SentimentLabel> best;
  for (SentimentLabel label : kAllLabels) {
    const std::size_t pos = folded.find(to_string(label));
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = label;
    }
  }
  return best;
}

FileBackedLlmClient make_gold_echo_client(const LabeledDataset& dataset) {
  std::map<std::string, std::string> responses;
  for (const Document& d : dataset.documents()) responses[d.id] = to_string(d.sentiment);
  return FileBackedLlmClient(std::move(responses));
}

namespace {

// Macro F1 where an invalid response counts against the gold class (a false
// negative) without crediting any predicted class.
double slice_macro_f1(const std::vector<SentimentLabel>& golds,
                      const std::vector<std::optional<SentimentLabel>>& preds) {
  std::array<std::array<long, 4>, 3> counts{};  // [gold][pred or invalid]
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const std::size_t g = static_cast<std::size_t>(golds[i]);
    const std::size_t p = preds[i] ? static_cast<std::size_t>(*preds[i]) : 3;
    ++counts[g][p];
  }
  double sum = 0.0;
  int kept = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const long tp = counts[c][c];
    long fp = 0, fn = 0;
    for (std::size_t g = 0; g < 3; ++g) {
      if (g != c) fp += counts[g][c];
    }
    for (std::size_t p = 0; p < 4; ++p) {
      if (p != c) fn += counts[c][p];
    }
    const long denom = 2 * tp + fp + fn;
    if (denom == 0) continue;
    sum += 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    ++kept;
  }
  if (kept == 0) throw DataError("icl_evaluate: empty slice");
  return sum / static_cast<double>(kept);
}

}  // namespace

IclResult icl_evaluate(LlmClient& llm, TranslationClient* translator, const LabeledDataset& target,
                       const LabeledDataset& shot_pool, const IclOptions& options) {
  if (target.empty()) throw DataError("icl_evaluate: empty target dataset");
  if (options.folds < 1) throw DataError("icl_evaluate: folds must be >= 1");

  // shots are rendered once and reused for every query
  const PromptBundle base_bundle = build_prompt(options.shots_per_label, shot_pool, "placeholder");
  const std::set<std::string> shot_set(base_bundle.shot_ids.begin(), base_bundle.shot_ids.end());

  std::vector<std::size_t> evaluated;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (shot_set.count(target.at(i).id) == 0) evaluated.push_back(i);
  }
  if (evaluated.empty()) throw DataError("icl_evaluate: no documents left after shot exclusion");
  if (static_cast<std::size_t>(options.folds) > evaluated.size()) {
    throw DataError("icl_evaluate: more folds than evaluated documents");
  }

  IclResult result;
  result.shot_ids = base_bundle.shot_ids;
  result.evaluated_count = evaluated.size();

  // collect predictions once, keyed by position
  std::vector<std::optional<SentimentLabel>> preds(evaluated.size());
  std::vector<SentimentLabel> golds(evaluated.size());
  for (std::size_t k = 0; k < evaluated.size(); ++k) {
    const Document& doc = target.at(evaluated[k]);
    golds[k] = doc.sentiment;
    std::string article = render_article_text(doc);
    if (options.translate && translator != nullptr) {
      try {
        article = translate(*translator, article, doc.language, "en");
      } catch (const std::exception& e) {
        throw DataError("icl_evaluate: translation failed for document \"" + doc.id + "\": " + e.what());
      }
    }
    const PromptBundle bundle = build_prompt(options.shots_per_label, shot_pool, article);
    std::string response;
    try {
      response = llm.complete({doc.id, bundle.rendered});
    } catch (const std::exception& e) {
      throw DataError("icl_evaluate: LLM client failed for document \"" + doc.id + "\": " + e.what());
    }
    preds[k] = parse_response(response);
    if (!preds[k] && options.retry_invalid_once) {
      response = llm.complete({doc.id, bundle.rendered});
      preds[k] = parse_response(response);
    }
    if (!preds[k]) result.invalid_doc_ids.push_back(doc.id);
  }

  // seeded slicing of the evaluated set
  std::vector<std::size_t> order(evaluated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(Rng::mix(options.seed, 0x1c1));
  rng.shuffle(order);

  const std::size_t folds = static_cast<std::size_t>(options.folds);
  const std::size_t base = order.size() / folds;
  const std::size_t extra = order.size() % folds;
  std::size_t offset = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t block = base + (f < extra ? 1 : 0);
    std::vector<SentimentLabel> slice_golds;
    std::vector<std::optional<SentimentLabel>> slice_preds;
    for (std::size_t k = offset; k < offset + block; ++k) {
      slice_golds.push_back(golds[order[k]]);
      slice_preds.push_back(preds[order[k]]);
    }
    offset += block;
    result.slice_f1.push_back(100.0 * slice_macro_f1(slice_golds, slice_preds));
  }
  if (result.slice_f1.size() >= 2) {
    std::tie(result.mean_f1, result.std_f1) = aggregate_folds(result.slice_f1);
  } else {
    result.mean_f1 = result.slice_f1.at(0);
    result.std_f1 = 0.0;
  }
  return result;
}

}  // namespace xlsent
