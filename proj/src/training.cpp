#include "xlsent/training.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "xlsent/checkpoint.hpp"
#include "xlsent/errors.hpp"
#include "xlsent/evaluation.hpp"
#include "xlsent/optimizer.hpp"
#include "xlsent/rng.hpp"

namespace xlsent {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

LossSpec spec_for_regime(TrainingRegime regime) {
  switch (regime) {
    case TrainingRegime::pse: return LossSpec::pse();
    case TrainingRegime::poa: return LossSpec::poa_regime();
    case TrainingRegime::base: break;
  }
  throw DataError("base has no intermediate phase");
}

// Fresh head tensors on top of a transferred encoder body.
void reinit_heads(EncoderParameters& params, std::uint64_t seed) {
  Rng rng(Rng::mix(seed, 0xead5));
  auto normal_fill = [&rng](Matrix& m) {
    for (double& v : m.data()) v = 0.02 * rng.next_normal();
  };
  normal_fill(params.mlm_w);
  params.mlm_b.fill(0.0);
  normal_fill(params.sent_w);
  params.sent_b.fill(0.0);
  normal_fill(params.poa_w);
  params.poa_b.fill(0.0);
  normal_fill(params.doc_w);
  params.doc_b.fill(0.0);
}

}  // namespace

TrainingRegime regime_from_string(const std::string& text) {
  if (text == "base") return TrainingRegime::base;
  if (text == "pse") return TrainingRegime::pse;
  if (text == "poa") return TrainingRegime::poa;
  throw DataError("unknown training regime \"" + text + "\" (expected base|pse|poa)");
}

std::string to_string(TrainingRegime regime) {
  switch (regime) {
    case TrainingRegime::base: return "base";
    case TrainingRegime::pse: return "pse";
    case TrainingRegime::poa: return "poa";
  }
  throw DataError("invalid training regime value");
}

EncoderParameters pretrain_intermediate(const ParagraphDataset& paragraphs, TrainingRegime regime,
                                        const Hyperparameters& hyper, const EncoderConfig& config,
                                        const Vocabulary& vocab,
                                        const std::set<std::string>* forbidden_doc_ids,
                                        TrainReport* report) {
  const LossSpec spec = spec_for_regime(regime);
  if (paragraphs.paragraphs.empty()) throw DataError("pretrain_intermediate: empty paragraph dataset");
  for (const Paragraph& p : paragraphs.paragraphs) {
    if (!p.sentiment) {
      throw DataError("pretrain_intermediate: paragraph " + p.doc_id + "#" + std::to_string(p.index) +
                      " lacks a sentiment label");
    }
    if (regime == TrainingRegime::poa && !p.poa) {
      throw DataError("pretrain_intermediate: paragraph " + p.doc_id + "#" + std::to_string(p.index) +
                      " lacks a poa label (annotate_paragraphs not applied?)");
    }
  }
  if (config.vocab_size != vocab.size()) {
    throw DataError("pretrain_intermediate: config vocab_size " + std::to_string(config.vocab_size) +
                    " != vocabulary size " + std::to_string(vocab.size()));
  }
  const auto start = Clock::now();

  const int budget = std::min(hyper.truncation_budget, config.max_seq_len);
  std::vector<std::vector<int>> encoded;
  encoded.reserve(paragraphs.paragraphs.size());
  for (const Paragraph& p : paragraphs.paragraphs) {
    encoded.push_back(truncate_head_tail(encode(vocab, p.text, /*add_specials=*/true), budget));
  }

  EncoderParameters params = init_parameters(config);
  AdamW optimizer(params, {hyper.lr, hyper.weight_decay, hyper.adam_epsilon, 0.9, 0.999});
  EncoderParameters grads;

  const int epochs = hyper.intermediate_epochs > 0 ? hyper.intermediate_epochs : hyper.epochs;
  const std::size_t n = paragraphs.paragraphs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(hyper.seed, Rng::mix(0x1e0c, static_cast<std::uint64_t>(epoch))));
    shuffle_rng.shuffle(order);
    EpochLosses sums;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(n, begin + static_cast<std::size_t>(hyper.batch_size));
      std::vector<std::vector<int>> rows;
      TrainingBatch batch;
      for (std::size_t i = begin; i < end; ++i) {
        const Paragraph& p = paragraphs.paragraphs[order[i]];
        if (forbidden_doc_ids) {
          if (report) ++report->leakage_checks;
          if (forbidden_doc_ids->count(p.doc_id) > 0) {
            if (report) ++report->leakage_violations;
            throw DataError("pretrain_intermediate: leakage, paragraph of test document \"" + p.doc_id +
                            "\" reached intermediate training");
          }
        }
        rows.push_back(encoded[order[i]]);
        batch.para_labels.push_back(static_cast<int>(*p.sentiment));
        if (regime == TrainingRegime::poa) batch.poa_labels.push_back(*p.poa);
      }
      const std::uint64_t step_seed =
          Rng::mix(hyper.seed, Rng::mix(static_cast<std::uint64_t>(epoch) + 1, begin + 0x5eed));
      batch.tokens = mask_for_mlm(rows, vocab, hyper.mlm_rate, step_seed);
      if (batch.tokens.masked_count() == 0) {
        // rare tiny-batch outcome: corrupt nothing this step and skip the MLM term
        LossSpec no_mlm = spec;
        no_mlm.w_mlm = 0.0;
        ForwardOptions opts{false, config.dropout, Rng::mix(step_seed, 0xd0)};
        const LossBreakdown losses = compute_gradients(params, batch, no_mlm, grads, opts);
        optimizer.step(params, grads);
        sums.sentiment += losses.para;
        sums.poa += losses.poa;
        ++steps;
        continue;
      }
      ForwardOptions opts{false, config.dropout, Rng::mix(step_seed, 0xd0)};
      const LossBreakdown losses = compute_gradients(params, batch, spec, grads, opts);
      optimizer.step(params, grads);
      sums.sentiment += losses.para;
      sums.mlm += losses.mlm;
      sums.poa += losses.poa;
      ++steps;
    }
    if (report) {
      EpochLosses mean;
      mean.sentiment = sums.sentiment / static_cast<double>(steps);
      mean.mlm = sums.mlm / static_cast<double>(steps);
      mean.poa = sums.poa / static_cast<double>(steps);
      report->intermediate_epochs.push_back(mean);
    }
  }
  if (report) report->wall_seconds += seconds_since(start);
  return params;
}

EncoderParameters finetune_document(const EncoderParameters& init, const LabeledDataset& docs,
                                    const FoldPlan& plan, const Hyperparameters& hyper,
                                    const Vocabulary& vocab, TrainReport* report) {
  if (init.config.vocab_size != vocab.size()) {
    throw DataError("finetune_document: checkpoint vocab_size " + std::to_string(init.config.vocab_size) +
                    " does not match vocabulary size " + std::to_string(vocab.size()));
  }
  if (plan.train_ids.empty()) throw DataError("finetune_document: plan has no training documents");
  if (plan.val_ids.empty()) throw DataError("finetune_document: plan has no validation documents");
  const auto start = Clock::now();

  const int budget = std::min(hyper.truncation_budget, init.config.max_seq_len);
  std::vector<const Document*> train_docs;
  for (const std::string& id : plan.train_ids) train_docs.push_back(&docs.by_id(id));
  std::vector<Document> val_docs;
  for (const std::string& id : plan.val_ids) val_docs.push_back(docs.by_id(id));
  const LabeledDataset val_set(std::move(val_docs));
  std::vector<SentimentLabel> val_golds;
  for (const Document& d : val_set.documents()) val_golds.push_back(d.sentiment);

  std::vector<std::vector<int>> encoded;
  encoded.reserve(train_docs.size());
  for (const Document* d : train_docs) encoded.push_back(encode_document(vocab, *d, budget));

  EncoderParameters params = init;
  reinit_heads(params, Rng::mix(hyper.seed, 0xf17e));
  AdamW optimizer(params, {hyper.lr, hyper.weight_decay, hyper.adam_epsilon, 0.9, 0.999});
  EncoderParameters grads;
  const LossSpec spec = LossSpec::document();

  EncoderParameters best = params;
  double best_f1 = -1.0;
  int best_epoch = -1;

  const std::size_t n = train_docs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(hyper.seed, Rng::mix(0xf07d, static_cast<std::uint64_t>(epoch))));
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(n, begin + static_cast<std::size_t>(hyper.batch_size));
      std::vector<std::vector<int>> rows;
      TrainingBatch batch;
      const std::uint64_t step_seed =
          Rng::mix(hyper.seed, Rng::mix(static_cast<std::uint64_t>(epoch) + 0x77, begin));
      Rng unk_rng(Rng::mix(step_seed, 0x111c));
      for (std::size_t i = begin; i < end; ++i) {
        rows.push_back(encoded[order[i]]);
        if (hyper.unk_dropout > 0.0) {
          for (int& id : rows.back()) {
            if (id >= Vocabulary::kNumReserved && unk_rng.next_double() < hyper.unk_dropout) {
              id = Vocabulary::kUnk;
            }
          }
        }
        batch.doc_labels.push_back(static_cast<int>(train_docs[order[i]]->sentiment));
      }
      batch.tokens = pad_batch(rows);
      ForwardOptions opts{false, init.config.dropout, Rng::mix(step_seed, 0xd1)};
      const LossBreakdown losses = compute_gradients(params, batch, spec, grads, opts);
      optimizer.step(params, grads);
      loss_sum += losses.doc;
      ++steps;
    }
    const std::vector<SentimentLabel> val_preds = predict(params, vocab, val_set, budget);
    const double val_f1 = 100.0 * macro_f1(val_golds, val_preds);
    if (report) {
      EpochLosses mean;
      mean.sentiment = loss_sum / static_cast<double>(steps);
      report->finetune_epochs.push_back(mean);
      report->val_f1_per_epoch.push_back(val_f1);
    }
    if (val_f1 > best_f1) {
      best_f1 = val_f1;
      best = params;
      best_epoch = epoch;
    }
  }
  if (report) {
    report->best_epoch = best_epoch;
    report->wall_seconds += seconds_since(start);
  }
  return best;
}

Vocabulary build_fold_vocab(const LabeledDataset& dataset, const FoldPlan& plan, int max_vocab) {
  std::vector<std::string> texts;
  for (const std::string& id : plan.train_ids) {
    for (const std::string& p : dataset.by_id(id).paragraphs) texts.push_back(p);
  }
  for (const std::string& id : plan.val_ids) {
    for (const std::string& p : dataset.by_id(id).paragraphs) texts.push_back(p);
  }
  return train_vocab(texts, max_vocab);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open experiment config \"" + path + "\"");
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "corpus") corpus_path = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "regime") regime = regime_from_string(value);
    else if (key == "poa_mode") poa_mode = poa_mode_from_string(value);
    else if (key == "translation") translation = (value == "yes" || value == "true" || value == "1");
    else if (key == "folds") folds = std::stoi(value);
    else if (key == "max_vocab") max_vocab = std::stoi(value);
    else if (key == "fold") only_fold = std::stoi(value);
    else if (key == "epochs") hyper.epochs = std::stoi(value);
    else if (key == "intermediate_epochs") hyper.intermediate_epochs = std::stoi(value);
    else if (key == "batch_size") hyper.batch_size = std::stoi(value);
    else if (key == "lr") hyper.lr = std::stod(value);
    else if (key == "weight_decay") hyper.weight_decay = std::stod(value);
    else if (key == "adam_epsilon") hyper.adam_epsilon = std::stod(value);
    else if (key == "mlm_rate") hyper.mlm_rate = std::stod(value);
    else if (key == "truncation_budget") hyper.truncation_budget = std::stoi(value);
    else if (key == "seed") hyper.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "d_model") encoder.d_model = std::stoi(value);
    else if (key == "n_layers") encoder.n_layers = std::stoi(value);
    else if (key == "n_heads") encoder.n_heads = std::stoi(value);
    else if (key == "d_ff") encoder.d_ff = std::stoi(value);
    else if (key == "max_seq_len") encoder.max_seq_len = std::stoi(value);
    else if (key == "dropout") encoder.dropout = std::stod(value);
    else if (key == "tie_mlm") encoder.tie_mlm = (value == "yes" || value == "true" || value == "1");
    else throw DataError("unknown config key \"" + key + "\"");
  } catch (const std::invalid_argument&) {
    throw DataError("config key \"" + key + "\": cannot parse value \"" + value + "\"");
  } catch (const std::out_of_range&) {
    throw DataError("config key \"" + key + "\": value \"" + value + "\" out of range");
  }
}

Hyperparameters fold_hyper(const ExperimentConfig& config, int fold_index) {
  Hyperparameters hyper = config.hyper;
  hyper.seed = Rng::mix(config.hyper.seed, static_cast<std::uint64_t>(fold_index) + 0xf01d);
  return hyper;
}

std::string checkpoint_path(const std::string& out_dir, TrainingRegime regime, int fold_index,
                            const std::string& phase) {
  return (fs::path(out_dir) / (to_string(regime) + "_" + std::to_string(fold_index) + "_" + phase + ".ckpt"))
      .string();
}

std::vector<TrainReport> run_experiment(const ExperimentConfig& config) {
  const LabeledDataset dataset = load_corpus(config.corpus_path);
  const std::vector<FoldPlan> plans = make_folds(dataset, config.folds, config.hyper.seed);
  fs::create_directories(config.out_dir);

  std::vector<TrainReport> reports;
  for (const FoldPlan& plan : plans) {
    if (config.only_fold && *config.only_fold != plan.fold_index) continue;
    TrainReport report;
    report.fold_index = plan.fold_index;

    const Hyperparameters hyper = fold_hyper(config, plan.fold_index);
    const Vocabulary vocab = build_fold_vocab(dataset, plan, config.max_vocab);
    EncoderConfig enc = config.encoder;
    enc.vocab_size = vocab.size();
    enc.seed = hyper.seed;

    EncoderParameters body = init_parameters(enc);
    if (config.regime != TrainingRegime::base) {
      ParagraphDataset view = paragraph_view(dataset, plan);
      if (config.regime == TrainingRegime::poa) annotate_paragraphs(view, config.poa_mode);
      const std::set<std::string> forbidden(plan.test_ids.begin(), plan.test_ids.end());
      body = pretrain_intermediate(view, config.regime, hyper, enc, vocab, &forbidden, &report);
      const std::string inter_path =
          checkpoint_path(config.out_dir, config.regime, plan.fold_index, "intermediate");
      save_checkpoint(inter_path, body, vocab);
      report.intermediate_checkpoint = inter_path;
    }

    const EncoderParameters final_params = finetune_document(body, dataset, plan, hyper, vocab, &report);
    const std::string final_path = checkpoint_path(config.out_dir, config.regime, plan.fold_index, "final");
    save_checkpoint(final_path, final_params, vocab);
    report.final_checkpoint = final_path;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace xlsent
