#include "xlsent/synth.hpp"

#include <array>
#include <set>

#include "xlsent/errors.hpp"
#include "xlsent/poa.hpp"
#include "xlsent/rng.hpp"

namespace xlsent {

namespace {

struct Stem {
  std::string text;
  bool shared = false;
};

std::string random_stem(Rng& rng, std::set<std::string>& used) {
  while (true) {
    const std::size_t len = 4 + rng.next_below(4);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
      s.push_back(static_cast<char>('a' + rng.next_below(26)));
    }
    if (used.insert(s).second) return s;
  }
}

std::vector<Stem> make_stems(Rng& rng, std::set<std::string>& used, int count, double shared_fraction) {
  std::vector<Stem> stems;
  stems.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Stem stem;
    stem.text = random_stem(rng, used);
    stem.shared = rng.next_double() < shared_fraction;
    stems.push_back(std::move(stem));
  }
  return stems;
}

std::string render(const Stem& stem, bool language_a) {
  if (stem.shared) return stem.text;
  return stem.text + (language_a ? "an" : "ek");
}

std::vector<int> raw_scores_for(SentimentLabel label, Rng& rng) {
  switch (label) {
    case SentimentLabel::negative: {
      static const std::vector<std::vector<int>> options = {{2, 2}, {1, 2, 3}, {2, 2, 3}, {1, 2}};
      return options[rng.next_below(options.size())];
    }
    case SentimentLabel::neutral: {
      static const std::vector<std::vector<int>> options = {{3, 3}, {3, 3, 3}, {2, 4}, {3, 2, 4}};
      return options[rng.next_below(options.size())];
    }
    case SentimentLabel::positive: {
      static const std::vector<std::vector<int>> options = {{4, 4}, {4, 4, 3}, {5, 4}, {4, 5, 3}};
      return options[rng.next_below(options.size())];
    }
  }
  throw DataError("raw_scores_for: invalid label");
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> generate_synthetic_pair(const SynthConfig& config) {
  if (config.train_docs < 3 || config.target_docs < 3) {
    throw DataError("generate_synthetic_pair: need at least 3 documents per language");
  }
  if (config.shared_stems < 0.0 || config.shared_stems > 1.0) {
    throw DataError("generate_synthetic_pair: shared_stems must be in [0,1]");
  }
  Rng stem_rng(Rng::mix(config.seed, 0x57e2));
  std::set<std::string> used;
  const std::vector<Stem> neutral = make_stems(stem_rng, used, config.neutral_stems, config.shared_stems);
  const std::vector<Stem> positive = make_stems(stem_rng, used, config.sentiment_stems, config.shared_stems);
  const std::vector<Stem> negative = make_stems(stem_rng, used, config.sentiment_stems, config.shared_stems);

  auto make_corpus = [&](bool language_a, int doc_count, std::uint64_t seed_tag) {
    Rng rng(Rng::mix(config.seed, seed_tag));
    std::vector<Document> docs;
    for (int n = 0; n < doc_count; ++n) {
      Document doc;
      doc.language = language_a ? config.language_a : config.language_b;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s-%05d", doc.language.c_str(), n);
      doc.id = idbuf;
      doc.sentiment = static_cast<SentimentLabel>(n % 3);

      const std::size_t n_para =
          static_cast<std::size_t>(config.min_paragraphs) +
          rng.next_below(static_cast<std::uint64_t>(config.max_paragraphs - config.min_paragraphs + 1));
      std::vector<SentimentLabel> para_labels;
      for (std::size_t p = 0; p < n_para; ++p) {
        const int third = poa_label(p, n_para, PoaMode::thirds);
        const double signal_rate = third == 1 ? config.mid_signal_rate : config.edge_signal_rate;
        const bool signal =
            doc.sentiment != SentimentLabel::neutral && rng.next_double() < signal_rate;
        SentimentLabel para_label = signal ? doc.sentiment : SentimentLabel::neutral;
        if (signal && rng.next_double() < config.opposite_mix) {
          para_label = doc.sentiment == SentimentLabel::positive ? SentimentLabel::negative
                                                                 : SentimentLabel::positive;
        }
        para_labels.push_back(para_label);

        const std::size_t n_words =
            static_cast<std::size_t>(config.min_words) +
            rng.next_below(static_cast<std::uint64_t>(config.max_words - config.min_words + 1));
        std::string text;
        for (std::size_t w = 0; w < n_words; ++w) {
          SentimentLabel word_pool = para_label;
          if (para_label != SentimentLabel::neutral && rng.next_double() >= config.signal_density) {
            word_pool = SentimentLabel::neutral;
          }
          if (rng.next_double() < config.noise_rate) {
            word_pool = static_cast<SentimentLabel>(rng.next_below(3));
          }
          const std::vector<Stem>* pool = &neutral;
          if (word_pool == SentimentLabel::positive) pool = &positive;
          if (word_pool == SentimentLabel::negative) pool = &negative;
          const Stem& stem = (*pool)[rng.next_below(pool->size())];
          if (!text.empty()) text.push_back(' ');
          text += render(stem, language_a);
        }
        text.push_back('.');
        doc.paragraphs.push_back(std::move(text));
      }
      doc.paragraph_sentiments = std::move(para_labels);
      if (rng.next_double() < config.raw_score_rate) {
        doc.raw_scores = raw_scores_for(doc.sentiment, rng);
      }
      docs.push_back(std::move(doc));
    }
    return LabeledDataset(std::move(docs));
  };

  return {make_corpus(true, config.train_docs, 0xa001), make_corpus(false, config.target_docs, 0xb002)};
}

}  // namespace xlsent
