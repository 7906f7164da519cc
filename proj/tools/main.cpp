#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xlsent/checkpoint.hpp"
#include "xlsent/clients.hpp"
#include "xlsent/corpus.hpp"
#include "xlsent/errors.hpp"
#include "xlsent/evaluation.hpp"
#include "xlsent/icl.hpp"
#include "xlsent/poa.hpp"
#include "xlsent/report.hpp"
#include "xlsent/synth.hpp"
#include "xlsent/training.hpp"
#include "xlsent/transfer.hpp"

namespace fs = std::filesystem;
using namespace xlsent;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void write_file(const std::string& path, const std::string& content) {
  if (!path.empty() && path.find('/') != std::string::npos) {
    fs::create_directories(fs::path(path).parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write output file \"" + path + "\"");
  out << content;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::string current;
  for (char c : csv) {
    if (c == ',') {
      if (!current.empty()) items.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) items.push_back(current);
  return items;
}

std::vector<double> parse_numbers(const std::string& csv) {
  std::vector<double> values;
  for (const std::string& item : split_list(csv)) values.push_back(std::stod(item));
  return values;
}

// experiment config assembled from --config plus repeated --set key=value
struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> overrides;

  ExperimentConfig resolve() const {
    ExperimentConfig config =
        config_path.empty() ? ExperimentConfig{} : ExperimentConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DataError("--set expects key=value, got \"" + kv + "\"");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
  }
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file (key = value lines)");
  cmd->add_option("--set", flags.overrides, "override any config key, e.g. --set epochs=3")
      ->take_all();
}

std::string labels_path_for(const std::string& vectors_path) {
  fs::path p(vectors_path);
  p.replace_extension(".labels");
  return p.string();
}

std::string tag_for(const std::string& path) { return fs::path(path).stem().string(); }

EmbeddedDataset load_embedding_arg(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon != std::string::npos) {
    return load_embedded_dataset(arg.substr(0, colon), arg.substr(colon + 1), tag_for(arg.substr(0, colon)));
  }
  return load_embedded_dataset(arg, labels_path_for(arg), tag_for(arg));
}

EmbeddedDataset embed_corpus_with(const Checkpoint& ckpt, const std::string& corpus_path, int budget) {
  if (!ckpt.vocab) throw DataError("otdd: checkpoint lacks an embedded vocabulary");
  const LabeledDataset docs = load_corpus(corpus_path);
  EmbeddedDataset data;
  data.source = tag_for(corpus_path);
  data.vectors = Matrix(docs.size(), static_cast<std::size_t>(ckpt.params.config.d_model));
  const std::size_t batch_size = 32;
  std::size_t row = 0;
  for (std::size_t start = 0; start < docs.size(); start += batch_size) {
    const std::size_t end = std::min(docs.size(), start + batch_size);
    std::vector<std::vector<int>> rows;
    for (std::size_t i = start; i < end; ++i) {
      rows.push_back(encode_document(*ckpt.vocab, docs.at(i), budget));
    }
    const Matrix pooled = encode_pooled(ckpt.params, pad_batch(rows));
    for (std::size_t r = 0; r < pooled.rows(); ++r, ++row) {
      for (std::size_t j = 0; j < pooled.cols(); ++j) data.vectors(row, j) = pooled(r, j);
    }
  }
  for (const Document& d : docs.documents()) data.labels.push_back(d.sentiment);
  return data;
}

std::vector<int> folds_to_run(const ExperimentConfig& config) {
  std::vector<int> folds;
  if (config.only_fold) {
    folds.push_back(*config.only_fold);
  } else {
    for (int f = 0; f < config.folds; ++f) folds.push_back(f);
  }
  return folds;
}

void print_train_report(const TrainReport& report, TrainingRegime regime) {
  std::cout << to_string(regime) << " fold " << report.fold_index << ":";
  if (!report.intermediate_epochs.empty()) {
    const EpochLosses& last = report.intermediate_epochs.back();
    std::cout << " intermediate[sent=" << last.sentiment << " mlm=" << last.mlm << " poa=" << last.poa
              << "]";
  }
  if (!report.val_f1_per_epoch.empty()) {
    std::cout << " best_val_f1=" << report.val_f1_per_epoch[static_cast<std::size_t>(report.best_epoch)]
              << " (epoch " << report.best_epoch << ")";
  }
  std::cout << " wall=" << report.wall_seconds << "s\n";
}

int run_cli(int argc, char** argv) {
  CLI::App app{"cross-lingual news sentiment laboratory"};
  app.require_subcommand(1);

  // ---- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "validate a JSONL corpus and write it back canonically");
  std::string ingest_in, ingest_out, ingest_lang;
  ingest->add_option("--in", ingest_in, "input corpus (JSON Lines)")->required();
  ingest->add_option("--out", ingest_out, "canonical output path")->required();
  ingest->add_option("--language", ingest_lang, "require this language tag on every record");
  ingest->callback([&] {
    const auto lang = ingest_lang.empty() ? std::nullopt : std::make_optional(ingest_lang);
    const LabeledDataset dataset = load_corpus(ingest_in, lang);
    save_corpus(dataset, ingest_out);
    std::cout << "ingested " << dataset.size() << " documents\n";
  });

  // ---- stats -----------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics as CSV");
  std::string stats_corpora, stats_out;
  stats_cmd->add_option("--corpus", stats_corpora, "corpus file(s), comma separated")->required();
  stats_cmd->add_option("--out", stats_out, "output CSV (stdout when omitted)");
  stats_cmd->callback([&] {
    std::string csv = stats_csv_header() + "\n";
    for (const std::string& path : split_list(stats_corpora)) {
      csv += stats_csv_row(corpus_stats(load_corpus(path))) + "\n";
    }
    if (stats_out.empty()) {
      std::cout << csv;
    } else {
      write_file(stats_out, csv);
    }
  });

  // ---- split -----------------------------------------------------------
  auto* split = app.add_subcommand("split", "write k fold-plan JSON files");
  std::string split_corpus, split_dir = ".";
  int split_k = 10;
  std::uint64_t split_seed = 0;
  split->add_option("--corpus", split_corpus)->required();
  split->add_option("--k", split_k, "number of folds");
  split->add_option("--seed", split_seed);
  split->add_option("--out-dir", split_dir);
  split->callback([&] {
    const LabeledDataset dataset = load_corpus(split_corpus);
    fs::create_directories(split_dir);
    for (const FoldPlan& plan : make_folds(dataset, split_k, split_seed)) {
      write_file((fs::path(split_dir) / ("fold_" + std::to_string(plan.fold_index) + ".json")).string(),
                 plan.to_json() + "\n");
    }
    std::cout << "wrote " << split_k << " fold plans to " << split_dir << "\n";
  });

  // ---- pretrain --------------------------------------------------------
  auto* pretrain = app.add_subcommand("pretrain", "intermediate training (pse or poa) for folds");
  ConfigFlags pre_flags;
  add_config_flags(pretrain, pre_flags);
  std::string pre_regime, pre_poa_mode, pre_corpus;
  int pre_fold = -1;
  pretrain->add_option("--corpus", pre_corpus);
  pretrain->add_option("--regime", pre_regime, "pse|poa");
  pretrain->add_option("--fold", pre_fold, "single fold (default: all)");
  pretrain->add_option("--poa-mode", pre_poa_mode, "thirds|literal");
  pretrain->callback([&] {
    ExperimentConfig config = pre_flags.resolve();
    if (!pre_corpus.empty()) config.corpus_path = pre_corpus;
    if (!pre_regime.empty()) config.regime = regime_from_string(pre_regime);
    if (!pre_poa_mode.empty()) config.poa_mode = poa_mode_from_string(pre_poa_mode);
    if (pre_fold >= 0) config.only_fold = pre_fold;
    if (config.regime == TrainingRegime::base) throw DataError("base has no intermediate phase");

    const LabeledDataset dataset = load_corpus(config.corpus_path);
    const std::vector<FoldPlan> plans = make_folds(dataset, config.folds, config.hyper.seed);
    fs::create_directories(config.out_dir);
    for (int fold : folds_to_run(config)) {
      const FoldPlan& plan = plans.at(static_cast<std::size_t>(fold));
      const Hyperparameters hyper = fold_hyper(config, fold);
      const Vocabulary vocab = build_fold_vocab(dataset, plan, config.max_vocab);
      EncoderConfig enc = config.encoder;
      enc.vocab_size = vocab.size();
      enc.seed = hyper.seed;
      ParagraphDataset view = paragraph_view(dataset, plan);
      if (config.regime == TrainingRegime::poa) annotate_paragraphs(view, config.poa_mode);
      const std::set<std::string> forbidden(plan.test_ids.begin(), plan.test_ids.end());
      TrainReport report;
      report.fold_index = fold;
      const EncoderParameters params =
          pretrain_intermediate(view, config.regime, hyper, enc, vocab, &forbidden, &report);
      save_checkpoint(checkpoint_path(config.out_dir, config.regime, fold, "intermediate"), params, vocab);
      print_train_report(report, config.regime);
    }
  });

  // ---- finetune --------------------------------------------------------
  auto* finetune = app.add_subcommand("finetune", "document-level fine-tuning for folds");
  ConfigFlags fin_flags;
  add_config_flags(finetune, fin_flags);
  std::string fin_regime, fin_corpus, fin_init;
  int fin_fold = -1;
  finetune->add_option("--corpus", fin_corpus);
  finetune->add_option("--regime", fin_regime, "base|pse|poa (selects init checkpoint naming)");
  finetune->add_option("--fold", fin_fold, "single fold (default: all)");
  finetune->add_option("--init", fin_init, "explicit init checkpoint (overrides naming convention)");
  finetune->callback([&] {
    ExperimentConfig config = fin_flags.resolve();
    if (!fin_corpus.empty()) config.corpus_path = fin_corpus;
    if (!fin_regime.empty()) config.regime = regime_from_string(fin_regime);
    if (fin_fold >= 0) config.only_fold = fin_fold;

    const LabeledDataset dataset = load_corpus(config.corpus_path);
    const std::vector<FoldPlan> plans = make_folds(dataset, config.folds, config.hyper.seed);
    fs::create_directories(config.out_dir);
    for (int fold : folds_to_run(config)) {
      const FoldPlan& plan = plans.at(static_cast<std::size_t>(fold));
      const Hyperparameters hyper = fold_hyper(config, fold);
      TrainReport report;
      report.fold_index = fold;

      EncoderParameters body;
      Vocabulary vocab;
      if (config.regime == TrainingRegime::base && fin_init.empty()) {
        vocab = build_fold_vocab(dataset, plan, config.max_vocab);
        EncoderConfig enc = config.encoder;
        enc.vocab_size = vocab.size();
        enc.seed = hyper.seed;
        body = init_parameters(enc);
      } else {
        const std::string init_path =
            fin_init.empty() ? checkpoint_path(config.out_dir, config.regime, fold, "intermediate")
                             : fin_init;
        Checkpoint ckpt = load_checkpoint(init_path);
        if (!ckpt.vocab) throw DataError("finetune: init checkpoint lacks an embedded vocabulary");
        body = std::move(ckpt.params);
        vocab = *ckpt.vocab;
      }
      const EncoderParameters params = finetune_document(body, dataset, plan, hyper, vocab, &report);
      save_checkpoint(checkpoint_path(config.out_dir, config.regime, fold, "final"), params, vocab);
      print_train_report(report, config.regime);
    }
  });

  // ---- eval ------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "score fold checkpoints on target corpora");
  ConfigFlags eval_flags;
  add_config_flags(eval_cmd, eval_flags);
  std::string eval_regime, eval_targets, eval_out, eval_corpus;
  bool eval_monolingual = false;
  eval_cmd->add_option("--regime", eval_regime, "base|pse|poa (checkpoint naming)");
  eval_cmd->add_option("--targets", eval_targets, "name=corpus.jsonl, comma separated");
  eval_cmd->add_option("--corpus", eval_corpus, "source corpus (for --monolingual)");
  eval_cmd->add_flag("--monolingual", eval_monolingual, "score each fold checkpoint on its own test split");
  eval_cmd->add_option("--out", eval_out, "output CSV");
  eval_cmd->callback([&] {
    ExperimentConfig config = eval_flags.resolve();
    if (!eval_regime.empty()) config.regime = regime_from_string(eval_regime);
    if (!eval_corpus.empty()) config.corpus_path = eval_corpus;

    std::vector<Checkpoint> checkpoints;
    for (int fold : folds_to_run(config)) {
      checkpoints.push_back(load_checkpoint(checkpoint_path(config.out_dir, config.regime, fold, "final")));
    }

    EvalReport report;
    if (eval_monolingual) {
      const LabeledDataset dataset = load_corpus(config.corpus_path);
      const std::vector<FoldPlan> plans = make_folds(dataset, config.folds, config.hyper.seed);
      EvalEntry entry;
      entry.language = dataset.at(0).language;
      const std::vector<int> folds = folds_to_run(config);
      for (std::size_t i = 0; i < folds.size(); ++i) {
        const FoldPlan& plan = plans.at(static_cast<std::size_t>(folds[i]));
        std::vector<Document> test_docs;
        for (const std::string& id : plan.test_ids) test_docs.push_back(dataset.by_id(id));
        const LabeledDataset test_set{std::move(test_docs)};
        std::vector<SentimentLabel> golds;
        for (const Document& d : test_set.documents()) golds.push_back(d.sentiment);
        const Checkpoint& ckpt = checkpoints.at(i);
        if (!ckpt.vocab) throw DataError("eval: checkpoint lacks an embedded vocabulary");
        const std::vector<SentimentLabel> preds =
            predict(ckpt.params, *ckpt.vocab, test_set, config.hyper.truncation_budget);
        entry.fold_scores.push_back(100.0 * macro_f1(golds, preds));
      }
      if (entry.fold_scores.size() >= 2) {
        std::tie(entry.mean_f1, entry.std_f1) = aggregate_folds(entry.fold_scores);
      } else {
        entry.mean_f1 = entry.fold_scores.at(0);
      }
      report.regime = to_string(config.regime);
      report.translation = config.translation;
      report.entries.push_back(std::move(entry));
    } else {
      if (eval_targets.empty()) throw DataError("eval: --targets or --monolingual required");
      std::map<std::string, LabeledDataset> targets;
      for (const std::string& item : split_list(eval_targets)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw DataError("eval: --targets expects name=path");
        targets.emplace(item.substr(0, eq), load_corpus(item.substr(eq + 1)));
      }
      report = zero_shot_eval(checkpoints, targets, config.hyper.truncation_budget,
                              to_string(config.regime), config.translation);
    }
    const std::string csv = report.to_csv();
    if (eval_out.empty()) {
      std::cout << csv;
    } else {
      write_file(eval_out, csv);
      std::cout << report.to_table();
    }
  });

  // ---- icl -------------------------------------------------------------
  auto* icl_cmd = app.add_subcommand("icl", "in-context-learning protocol with a pluggable client");
  std::string icl_target, icl_pool, icl_stub, icl_out, icl_cache;
  int icl_shots = 3, icl_folds = 10;
  std::uint64_t icl_seed = 0;
  bool icl_gold_echo = false, icl_translate = false;
  icl_cmd->add_option("--target", icl_target, "target corpus JSONL")->required();
  icl_cmd->add_option("--pool", icl_pool, "shot pool corpus (English examples)")->required();
  icl_cmd->add_option("--shots", icl_shots, "shots per label: 0, 1 or 3");
  icl_cmd->add_option("--folds", icl_folds);
  icl_cmd->add_option("--seed", icl_seed);
  icl_cmd->add_option("--stub", icl_stub, "JSONL doc_id->response stub client");
  icl_cmd->add_flag("--gold-echo", icl_gold_echo, "stub that answers every document's gold label");
  icl_cmd->add_flag("--translate", icl_translate, "translate evaluated articles to English");
  icl_cmd->add_option("--cache", icl_cache, "translation cache JSONL");
  icl_cmd->add_option("--out", icl_out, "output CSV");
  icl_cmd->callback([&] {
    const LabeledDataset target = load_corpus(icl_target);
    const LabeledDataset pool = load_corpus(icl_pool);
    std::unique_ptr<LlmClient> client;
    if (icl_gold_echo) {
      client = std::make_unique<FileBackedLlmClient>(make_gold_echo_client(target));
    } else if (!icl_stub.empty()) {
      client = std::make_unique<FileBackedLlmClient>(icl_stub);
    } else {
      throw DataError("icl: provide --stub FILE or --gold-echo");
    }
    std::shared_ptr<TranslationClient> translator = std::make_shared<IdentityTranslationClient>();
    if (!icl_cache.empty()) translator = std::make_shared<CachingTranslationClient>(translator, icl_cache);

    IclOptions options;
    options.shots_per_label = icl_shots;
    options.folds = icl_folds;
    options.seed = icl_seed;
    options.translate = icl_translate;
    const IclResult result = icl_evaluate(*client, translator.get(), target, pool, options);

    EvalReport report;
    report.regime = "icl-" + std::to_string(icl_shots) + "shot";
    report.translation = icl_translate;
    EvalEntry entry;
    entry.language = target.at(0).language;
    entry.mean_f1 = result.mean_f1;
    entry.std_f1 = result.std_f1;
    entry.fold_scores = result.slice_f1;
    report.entries.push_back(std::move(entry));
    const std::string csv = report.to_csv();
    if (icl_out.empty()) {
      std::cout << csv;
    } else {
      write_file(icl_out, csv);
    }
    std::cout << "evaluated " << result.evaluated_count << " documents, " << result.invalid_doc_ids.size()
              << " invalid responses\n";
  });

  // ---- otdd ------------------------------------------------------------
  auto* otdd_cmd = app.add_subcommand("otdd", "optimal-transport dataset distances");
  std::string otdd_source, otdd_targets, otdd_out, otdd_solver = "sinkhorn", otdd_ckpt;
  std::string otdd_label_mode = "gaussian";
  int otdd_max_points = 1000;
  double otdd_epsilon = 0.1;
  std::uint64_t otdd_seed = 0;
  int otdd_budget = 512;
  otdd_cmd->add_option("--source", otdd_source, "source embeddings file (or corpus with --checkpoint)")
      ->required();
  otdd_cmd->add_option("--targets", otdd_targets, "target embeddings files, comma separated")->required();
  otdd_cmd->add_option("--solver", otdd_solver, "sinkhorn|exact");
  otdd_cmd->add_option("--label-mode", otdd_label_mode, "gaussian|exact");
  otdd_cmd->add_option("--max-points", otdd_max_points);
  otdd_cmd->add_option("--epsilon", otdd_epsilon);
  otdd_cmd->add_option("--seed", otdd_seed);
  otdd_cmd->add_option("--checkpoint", otdd_ckpt, "embed corpora in-pipeline with this checkpoint");
  otdd_cmd->add_option("--truncation-budget", otdd_budget);
  otdd_cmd->add_option("--out", otdd_out, "output CSV");
  otdd_cmd->callback([&] {
    OtddConfig config;
    if (otdd_solver == "exact") {
      config.solver = OtddConfig::Solver::exact;
    } else if (otdd_solver != "sinkhorn") {
      throw DataError("otdd: unknown solver \"" + otdd_solver + "\"");
    }
    if (otdd_label_mode == "exact") {
      config.label_mode = LabelDistMode::exact;
    } else if (otdd_label_mode != "gaussian") {
      throw DataError("otdd: unknown label mode \"" + otdd_label_mode + "\"");
    }
    config.max_points = otdd_max_points;
    config.epsilon = otdd_epsilon;
    config.seed = otdd_seed;

    EmbeddedDataset source;
    std::vector<EmbeddedDataset> targets;
    if (!otdd_ckpt.empty()) {
      const Checkpoint ckpt = load_checkpoint(otdd_ckpt);
      source = embed_corpus_with(ckpt, otdd_source, otdd_budget);
      for (const std::string& path : split_list(otdd_targets)) {
        targets.push_back(embed_corpus_with(ckpt, path, otdd_budget));
      }
    } else {
      source = load_embedding_arg(otdd_source);
      for (const std::string& path : split_list(otdd_targets)) {
        targets.push_back(load_embedding_arg(path));
      }
    }
    std::vector<OtddReport> reports;
    for (const EmbeddedDataset& target : targets) reports.push_back(otdd(source, target, config));
    normalize_by_max(reports);
    const std::string csv = otdd_csv(reports);
    if (otdd_out.empty()) {
      std::cout << csv;
    } else {
      write_file(otdd_out, csv);
    }
  });

  // ---- shift -----------------------------------------------------------
  auto* shift = app.add_subcommand("shift", "chi-squared topic-shift tests");
  std::string shift_source, shift_targets, shift_out;
  std::uint64_t shift_seed = 0;
  bool shift_no_downsample = false;
  shift->add_option("--source", shift_source, "name=assignments.csv")->required();
  shift->add_option("--targets", shift_targets, "name=assignments.csv, comma separated")->required();
  shift->add_option("--seed", shift_seed);
  shift->add_flag("--no-downsample", shift_no_downsample, "skip down-sampling the source");
  shift->add_option("--out", shift_out, "output CSV");
  shift->callback([&] {
    auto parse_named = [](const std::string& item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw DataError("shift: expected name=path, got \"" + item + "\"");
      return std::make_pair(item.substr(0, eq), item.substr(eq + 1));
    };
    const auto [source_name, source_path] = parse_named(shift_source);
    const auto source_assignments = load_topic_assignments(source_path);

    std::vector<ShiftRow> rows;
    for (const std::string& item : split_list(shift_targets)) {
      const auto [target_name, target_path] = parse_named(item);
      const auto target_assignments = load_topic_assignments(target_path);
      auto source_used = source_assignments;
      if (!shift_no_downsample && source_used.size() > target_assignments.size()) {
        source_used = downsample(source_used, target_assignments.size(), shift_seed);
      }
      ShiftRow row;
      row.source = source_name;
      row.target = target_name;
      row.result =
          chi_squared_shift(counts_from_assignments(source_used), counts_from_assignments(target_assignments));
      rows.push_back(std::move(row));
    }
    const std::string csv = shift_csv(rows);
    if (shift_out.empty()) {
      std::cout << csv;
    } else {
      write_file(shift_out, csv);
    }
  });

  // ---- correlate -------------------------------------------------------
  auto* correlate_cmd = app.add_subcommand("correlate", "correlation of two sequences");
  std::string corr_x, corr_y, corr_method = "pearson", corr_out;
  correlate_cmd->add_option("--x", corr_x, "comma-separated values")->required();
  correlate_cmd->add_option("--y", corr_y, "comma-separated values")->required();
  correlate_cmd->add_option("--method", corr_method, "pearson|spearman");
  correlate_cmd->add_option("--out", corr_out);
  correlate_cmd->callback([&] {
    CorrelationMethod method = CorrelationMethod::pearson;
    if (corr_method == "spearman") {
      method = CorrelationMethod::spearman;
    } else if (corr_method != "pearson") {
      throw DataError("correlate: unknown method \"" + corr_method + "\"");
    }
    const double r = correlation(parse_numbers(corr_x), parse_numbers(corr_y), method);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s,%.6f\n", corr_method.c_str(), r);
    if (corr_out.empty()) {
      std::cout << buf;
    } else {
      write_file(corr_out, buf);
    }
  });

  // ---- report ----------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "merge eval CSVs into table + plot-ready CSV");
  std::string report_inputs, report_table, report_plot;
  report_cmd->add_option("--inputs", report_inputs, "eval CSVs, comma separated")->required();
  report_cmd->add_option("--out-table", report_table);
  report_cmd->add_option("--out-plot", report_plot);
  report_cmd->callback([&] {
    std::vector<ReportRow> rows;
    for (const std::string& path : split_list(report_inputs)) {
      const std::vector<ReportRow> part = read_eval_csv(path);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    const std::string table = merged_table(rows);
    const std::string plot = plot_csv(rows);
    if (report_table.empty()) {
      std::cout << table;
    } else {
      write_file(report_table, table);
    }
    if (report_plot.empty()) {
      std::cout << plot;
    } else {
      write_file(report_plot, plot);
    }
  });

  // ---- synth -----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a paired pseudo-language corpus");
  SynthConfig synth_config;
  std::string synth_out_a, synth_out_b;
  synth->add_option("--out-a", synth_out_a, "first pseudo-language corpus path")->required();
  synth->add_option("--out-b", synth_out_b, "second pseudo-language corpus path")->required();
  synth->add_option("--train-docs", synth_config.train_docs);
  synth->add_option("--target-docs", synth_config.target_docs);
  synth->add_option("--shared-stems", synth_config.shared_stems);
  synth->add_option("--noise", synth_config.noise_rate);
  synth->add_option("--seed", synth_config.seed);
  synth->callback([&] {
    const auto [corpus_a, corpus_b] = generate_synthetic_pair(synth_config);
    save_corpus(corpus_a, synth_out_a);
    save_corpus(corpus_b, synth_out_b);
    std::cout << "wrote " << corpus_a.size() << " + " << corpus_b.size() << " documents\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
