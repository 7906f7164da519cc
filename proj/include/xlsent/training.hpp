#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xlsent/corpus.hpp"
#include "xlsent/encoder.hpp"
#include "xlsent/poa.hpp"
#include "xlsent/tokenizer.hpp"

namespace xlsent {

enum class TrainingRegime { base, pse, poa };

TrainingRegime regime_from_string(const std::string& text);
std::string to_string(TrainingRegime regime);

struct Hyperparameters {
  int epochs = 3;
  int batch_size = 8;
  double lr = 2e-5;
  double weight_decay = 0.01;
  double adam_epsilon = 1e-8;
  double mlm_rate = 0.15;
  int truncation_budget = 512;
  std::uint64_t seed = 0;
  // 0 means: reuse `epochs` for the intermediate phase as well.
  int intermediate_epochs = 0;
  // Train-time word dropout to [UNK] on fine-tuning inputs. Teaches the
  // encoder that unknown words carry no signal, which matters when target
  // languages map out-of-vocabulary words onto [UNK] at inference.
  double unk_dropout = 0.0;
};

struct EpochLosses {
  double sentiment = 0.0;  // document or paragraph head, depending on phase
  double mlm = 0.0;
  double poa = 0.0;
};

struct TrainReport {
  int fold_index = -1;
  std::vector<EpochLosses> intermediate_epochs;
  std::vector<EpochLosses> finetune_epochs;
  std::vector<double> val_f1_per_epoch;  // percent
  int best_epoch = -1;
  std::string intermediate_checkpoint;
  std::string final_checkpoint;
  double wall_seconds = 0.0;
  long leakage_checks = 0;
  long leakage_violations = 0;
};

// Joint optimization of the regime's losses on paragraph batches; every
// batch contributes all active losses summed. `forbidden_doc_ids`, when
// given, is asserted against every consumed paragraph (leakage guard).
EncoderParameters pretrain_intermediate(const ParagraphDataset& paragraphs, TrainingRegime regime,
                                        const Hyperparameters& hyper, const EncoderConfig& config,
                                        const Vocabulary& vocab,
                                        const std::set<std::string>* forbidden_doc_ids = nullptr,
                                        TrainReport* report = nullptr);

// Document-level fine-tuning: encoder body from `init`, heads freshly
// initialized; best-validation-macro-F1 checkpoint selection.
EncoderParameters finetune_document(const EncoderParameters& init, const LabeledDataset& docs,
                                    const FoldPlan& plan, const Hyperparameters& hyper,
                                    const Vocabulary& vocab, TrainReport* report = nullptr);

struct ExperimentConfig {
  std::string corpus_path;
  std::string out_dir = ".";
  TrainingRegime regime = TrainingRegime::base;
  PoaMode poa_mode = PoaMode::thirds;
  bool translation = false;
  int folds = 10;
  int max_vocab = 4000;
  Hyperparameters hyper;
  EncoderConfig encoder;           // vocab_size is filled per fold
  std::optional<int> only_fold;    // restrict the run to a single fold

  static ExperimentConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // config-file / CLI override
};

Vocabulary build_fold_vocab(const LabeledDataset& dataset, const FoldPlan& plan, int max_vocab);

// Per-fold seed derivation and checkpoint naming, shared by run_experiment
// and the CLI's per-phase subcommands so the two routes stay bit-identical.
Hyperparameters fold_hyper(const ExperimentConfig& config, int fold_index);
std::string checkpoint_path(const std::string& out_dir, TrainingRegime regime, int fold_index,
                            const std::string& phase);

// The full per-fold pipeline: (optional) intermediate pretraining on the
// fold's paragraph view, then document fine-tuning; checkpoints named
// {regime}_{fold}_{phase}.ckpt under out_dir.
std::vector<TrainReport> run_experiment(const ExperimentConfig& config);

}  // namespace xlsent
