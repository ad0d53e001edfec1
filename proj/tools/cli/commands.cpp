#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "checkpoint.hpp"
#include "dataset_json.hpp"
#include "scrbm/data.hpp"
#include "scrbm/errors.hpp"
#include "scrbm/inference.hpp"
#include "scrbm/metrics.hpp"
#include "scrbm/rnn.hpp"
#include "scrbm/training.hpp"
#include "verify.hpp"

namespace scrbm::cli {

namespace {

struct DataFlags {
  std::string format = "json";
  std::size_t label_column = 1;
  int prefix_suffix = 3;
  bool no_word = false;
  bool no_lowercase = false;
  bool no_orthographic = false;
  std::size_t min_count = 1;
  std::size_t synth_sequences = 200;
  std::size_t synth_length = 20;
  double synth_noise = 0.0;

  FeatureTemplate feature_template() const {
    FeatureTemplate t;
    t.use_word = !no_word;
    t.use_lowercase = !no_lowercase;
    t.prefix_suffix_max = prefix_suffix;
    t.orthographic_flags = !no_orthographic;
    t.min_count = min_count;
    return t;
  }
};

struct TrainFlags {
  std::string data;
  std::string valid;
  std::string model = "scrbm";
  std::size_t hidden = 100;
  std::string optimizer = "adam";
  double lr = 1e-3;
  std::size_t batch = 1;
  std::size_t epochs = 100;
  std::size_t check_every = 10;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::string h0 = "learned";
  std::string free_energy = "recurrent";
  std::string out;
  std::string metrics;
  double l2 = 0.0;
  double clip = 0.0;
  bool memoryless = false;
};

struct EvalFlags {
  std::string model_file;
  std::string data;
};

struct VerifyFlags {
  std::string suite = "all";
  std::size_t trials = 0;  // 0 = suite default
  std::uint64_t seed = 1;
  std::string inject_fault = "none";
};

struct ReproFlags {
  std::string data;
  std::string partition = "cv";
  std::size_t hidden = 1000;
  double lr = 1e-3;
  std::size_t batch = 1;
  std::size_t epochs = 100;
  std::size_t check_every = 10;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::size_t max_folds = 0;  // 0 = all folds
};

void add_data_flags(CLI::App& cmd, DataFlags& f) {
  cmd.add_option("--format", f.format, "Input format")
      ->check(CLI::IsMember({"ocr", "conll", "melody", "synth", "json"}));
  cmd.add_option("--label-column", f.label_column, "CoNLL column holding the tag")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--prefix-suffix", f.prefix_suffix, "CoNLL prefix/suffix length (0-4)")
      ->check(CLI::Range(0, 4));
  cmd.add_flag("--no-word", f.no_word, "CoNLL: drop the word-identity feature");
  cmd.add_flag("--no-lowercase", f.no_lowercase, "CoNLL: drop the lowercased-word feature");
  cmd.add_flag("--no-orthographic", f.no_orthographic, "CoNLL: drop capital/digit/hyphen flags");
  cmd.add_option("--min-count", f.min_count, "CoNLL: minimum feature count")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--synth-sequences", f.synth_sequences, "Synthetic training sequences")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--synth-length", f.synth_length, "Synthetic sequence length")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--synth-noise", f.synth_noise, "Synthetic label flip probability")
      ->check(CLI::Range(0.0, 0.4999));
}

Json template_to_json(const DataFlags& f) {
  return {{"label_column", f.label_column}, {"prefix_suffix", f.prefix_suffix},
          {"use_word", !f.no_word},        {"use_lowercase", !f.no_lowercase},
          {"orthographic", !f.no_orthographic}, {"min_count", f.min_count}};
}

FeatureTemplate template_from_json(const Json& j, const DataFlags& fallback) {
  FeatureTemplate t = fallback.feature_template();
  t.use_word = j.value("use_word", t.use_word);
  t.use_lowercase = j.value("use_lowercase", t.use_lowercase);
  t.prefix_suffix_max = j.value("prefix_suffix", t.prefix_suffix_max);
  t.orthographic_flags = j.value("orthographic", t.orthographic_flags);
  t.min_count = j.value("min_count", t.min_count);
  return t;
}

// ---- dataset loading ---------------------------------------------------------

Dataset load_primary(const DataFlags& f, const std::string& path, std::uint64_t seed) {
  if (f.format == "synth") {
    if (path.empty()) return synth_markov(f.synth_sequences, f.synth_length, f.synth_noise, seed);
    return synth_from_bits(load_bit_sequences(path));
  }
  if (path.empty()) throw ContractViolation("--data is required for format " + f.format);
  if (f.format == "ocr") return load_ocr(path);
  if (f.format == "conll") return load_conll(path, f.feature_template(), f.label_column);
  if (f.format == "melody") {
    const auto melodies = load_melodies(path);
    return encode_melody(melodies);
  }
  return load_dataset_json(path);
}

// Encodes a held-out file the way the reference (training) data was encoded.
Dataset load_against(const DataFlags& f, const FeatureTemplate& tmpl, std::size_t label_column,
                     const std::string& path, const Dataset& reference) {
  if (f.format == "synth") return synth_from_bits(load_bit_sequences(path));
  if (f.format == "ocr") return load_ocr(path);
  if (f.format == "conll") return load_conll(path, tmpl, label_column, reference);
  if (f.format == "melody") {
    const auto melodies = load_melodies(path);
    return encode_melody(melodies, reference);
  }
  return load_dataset_json(path);
}

Dataset reference_from_checkpoint(const Checkpoint& ckpt) {
  Dataset ref;
  ref.n_visible = ckpt.dims().n_visible;
  ref.n_classes = ckpt.dims().n_classes;
  ref.class_names = ckpt.class_names;
  ref.feature_names = ckpt.feature_names;
  ref.task_kind = ckpt.task_kind;
  return ref;
}

Dataset load_for_checkpoint(const DataFlags& f, const std::string& path, const Checkpoint& ckpt) {
  if (path.empty()) throw ContractViolation("--data is required");
  const Json tmpl_json = ckpt.config.value("template", Json::object());
  const FeatureTemplate tmpl = template_from_json(tmpl_json, f);
  const std::size_t label_column = tmpl_json.value("label_column", f.label_column);
  Dataset ds = load_against(f, tmpl, label_column, path, reference_from_checkpoint(ckpt));
  if (ds.empty()) throw DataError("dataset " + path + " contains no sequences");
  if (ds.n_visible != ckpt.dims().n_visible || ds.n_classes != ckpt.dims().n_classes) {
    throw DataError("dataset dims (M=" + std::to_string(ds.n_visible) + ", K=" +
                    std::to_string(ds.n_classes) + ") do not match the checkpoint (M=" +
                    std::to_string(ckpt.dims().n_visible) + ", K=" +
                    std::to_string(ckpt.dims().n_classes) + ")");
  }
  ds.validate();
  return ds;
}

// ---- report formatting ---------------------------------------------------------

std::string number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json report_json(const EvalReport& r) {
  auto nullable = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
  return {{"sequence_error", nullable(r.sequence_error)},
          {"token_error", nullable(r.token_error)},
          {"avg_nll_nats", nullable(r.avg_nll_nats)},
          {"nll_regime", std::string(to_string(r.regime))},
          {"teacher_forced_nll_nats", nullable(r.teacher_forced_nll_nats)},
          {"cross_entropy_bits", nullable(r.cross_entropy_bits)},
          {"n_sequences", r.n_sequences},
          {"n_tokens", r.n_tokens},
          {"clamped_probabilities", r.clamped_probabilities}};
}

class MetricsCsv {
 public:
  explicit MetricsCsv(const std::string& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot write metrics file " + path);
    out_ << "epoch,split,avg_nll,sequence_error,cross_entropy_bits\n";
    out_.flush();
  }

  void append(std::size_t epoch, std::string_view split, const EvalReport& r) {
    if (!out_.is_open()) return;
    out_ << epoch << ',' << split << ',' << number(r.avg_nll_nats) << ','
         << number(r.sequence_error) << ',' << number(r.cross_entropy_bits) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

Json history_json(const TrainHistory& h) {
  Json records = Json::array();
  for (const auto& r : h.records) {
    records.push_back({{"epoch", r.epoch},
                       {"train_nll", r.train_nll},
                       {"valid_nll", r.valid_nll},
                       {"valid_error", r.valid_error},
                       {"selection", r.selection}});
  }
  return {{"checks", std::move(records)},
          {"best_check_index", h.best_check_index},
          {"stop_reason", h.stop_reason == StopReason::EarlyStop ? "early_stop" : "max_epochs"}};
}

// ---- commands -----------------------------------------------------------------

int cmd_train(const TrainFlags& t, const DataFlags& d, std::ostream& out) {
  if (t.out.empty()) throw ContractViolation("--out is required");
  const ModelKind kind = parse_model_kind(t.model);

  TrainConfig cfg;
  cfg.n_hidden = t.hidden;
  cfg.model.initial_state = parse_initial_state(t.h0);
  cfg.model.free_energy = parse_free_energy_form(t.free_energy);
  cfg.optimizer = parse_optimizer(t.optimizer);
  cfg.learning_rate = t.lr;
  cfg.batch_size = t.batch;
  cfg.max_epochs = t.epochs;
  cfg.check_every_epochs = t.check_every;
  cfg.patience_checks = t.patience;
  cfg.seed = t.seed;
  cfg.l2 = t.l2;
  if (t.clip > 0.0) cfg.grad_clip_norm = t.clip;
  cfg.freeze_recurrence = t.memoryless;
  cfg.validate();

  const Dataset train_set = load_primary(d, t.data, t.seed);
  if (train_set.empty()) throw DataError("training data contains no sequences");
  Dataset valid_set;
  if (!t.valid.empty()) {
    valid_set = load_against(d, d.feature_template(), d.label_column, t.valid, train_set);
  } else if (d.format == "synth" && t.data.empty()) {
    valid_set = synth_markov((d.synth_sequences + 3) / 4, d.synth_length, d.synth_noise, t.seed + 1);
  }

  MetricsCsv csv(t.metrics);
  auto observer = [&](const CheckReport& r) {
    if (r.train) csv.append(r.epoch, "train", *r.train);
    csv.append(r.epoch, "valid", r.valid);
  };

  Checkpoint ckpt;
  TrainHistory history;
  if (kind == ModelKind::Scrbm) {
    auto result = train(train_set, valid_set, cfg, observer);
    ckpt.model = std::move(result.params);
    history = std::move(result.history);
  } else {
    auto result = train_rnn(train_set, valid_set, cfg, observer);
    ckpt.model = std::move(result.params);
    history = std::move(result.history);
  }

  ckpt.class_names = train_set.class_names;
  ckpt.feature_names = train_set.feature_names;
  ckpt.task_kind = train_set.task_kind;
  ckpt.seed = t.seed;
  ckpt.epoch = history.records.empty() ? 0 : history.records[history.best_check_index].epoch;
  ckpt.config = {{"format", d.format},
                 {"model", t.model},
                 {"hidden", t.hidden},
                 {"optimizer", t.optimizer},
                 {"lr", t.lr},
                 {"batch", t.batch},
                 {"epochs", t.epochs},
                 {"check_every", t.check_every},
                 {"patience", t.patience},
                 {"h0", t.h0},
                 {"free_energy", t.free_energy},
                 {"l2", t.l2},
                 {"clip", t.clip},
                 {"memoryless", t.memoryless},
                 {"template", template_to_json(d)}};
  save_checkpoint(ckpt, t.out);

  Json summary = {{"checkpoint", t.out}, {"history", history_json(history)}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_eval(const EvalFlags& e, const DataFlags& d, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(e.model_file);
  const Dataset ds = load_for_checkpoint(d, e.data, ckpt);
  const EvalReport report = std::visit([&](const auto& p) { return evaluate(p, ds); }, ckpt.model);
  Json j = report_json(report);
  j["model_kind"] = std::string(to_string(ckpt.kind()));
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_predict(const EvalFlags& e, const DataFlags& d, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(e.model_file);
  const Dataset ds = load_for_checkpoint(d, e.data, ckpt);
  for (const auto& ex : ds.examples) {
    std::vector<std::size_t> labels;
    if (const auto* p = std::get_if<ModelParams>(&ckpt.model)) {
      labels = decode(*p, ex.inputs).labels;
    } else {
      const auto fwd = rnn_forward(std::get<RnnParams>(ckpt.model), ex.inputs);
      for (const auto& post : fwd.posteriors) labels.push_back(argmax(post));
    }
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (t) out << ' ';
      if (labels[t] < ckpt.class_names.size()) {
        out << ckpt.class_names[labels[t]];
      } else {
        out << labels[t];
      }
    }
    out << '\n';
  }
  return kExitOk;
}

int cmd_verify(const VerifyFlags& v, std::ostream& out) {
  const FaultInjection fault =
      v.inject_fault == "sign-flip" ? FaultInjection::SignFlip : FaultInjection::None;
  auto trials = [&](std::size_t fallback) { return v.trials ? v.trials : fallback; };

  std::vector<SuiteResult> results;
  const bool all = v.suite == "all";
  if (all || v.suite == "gradcheck") {
    results.push_back(run_gradcheck(trials(100), v.seed, fault));
    results.push_back(run_rnn_gradcheck(trials(100), v.seed, fault));
  }
  if (all || v.suite == "oracle") results.push_back(run_oracle_suite(trials(500), v.seed));
  if (all || v.suite == "normalization") {
    results.push_back(run_normalization_suite(trials(50), v.seed));
  }

  bool ok = true;
  for (const auto& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%-14s trials=%-4zu max_error=%.3e threshold=%.0e %s (%.2fs)",
                  r.name.c_str(), r.trials, r.max_error, r.threshold, r.passed() ? "PASS" : "FAIL",
                  r.seconds);
    out << line << '\n';
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_repro_ocr(const ReproFlags& r, std::ostream& out, std::ostream& err) {
  const Dataset all = load_ocr(r.data);
  if (all.empty()) throw DataError("OCR file contains no words");
  const auto splits = r.partition == "ms" ? ocr_ms_groups(all) : ocr_cv_folds(all);

  TrainConfig cfg;
  cfg.n_hidden = r.hidden;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.learning_rate = r.lr;
  cfg.batch_size = r.batch;
  cfg.max_epochs = r.epochs;
  cfg.check_every_epochs = r.check_every;
  cfg.patience_checks = r.patience;
  cfg.seed = r.seed;
  cfg.validate();

  const std::size_t n = r.max_folds ? std::min(r.max_folds, splits.size()) : splits.size();
  Json folds = Json::array();
  double seq_sum = 0.0;
  double tok_sum = 0.0;
  for (std::size_t g = 0; g < n; ++g) {
    const auto& split = splits[g];
    if (split.train.empty() || split.test.empty()) throw DataError("fold " + std::to_string(g) + " is empty");
    const auto result = train(split.train, split.valid, cfg);
    const EvalReport rep = evaluate(result.params, split.test);
    err << "fold " << g << ": sequence_error=" << rep.sequence_error
        << " token_error=" << rep.token_error << '\n';
    folds.push_back({{"fold", g},
                     {"train_words", split.train.examples.size()},
                     {"test_words", split.test.examples.size()},
                     {"sequence_error", rep.sequence_error},
                     {"token_error", rep.token_error},
                     {"best_epoch", result.history.records[result.history.best_check_index].epoch}});
    seq_sum += rep.sequence_error;
    tok_sum += rep.token_error;
  }
  Json summary = {{"partition", r.partition},
                  {"hidden", r.hidden},
                  {"folds", std::move(folds)},
                  {"mean_sequence_error", seq_sum / static_cast<double>(n)},
                  {"mean_token_error", tok_sum / static_cast<double>(n)}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequence classification RBM: train, evaluate, predict, verify"};
  app.require_subcommand(1);

  DataFlags data;
  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write the best checkpoint");
  add_data_flags(*train_cmd, data);
  train_cmd->add_option("--data", tf.data, "Training data (optional for --format=synth)");
  train_cmd->add_option("--valid", tf.valid, "Validation data");
  train_cmd->add_option("--model", tf.model, "Model family")->check(CLI::IsMember({"scrbm", "rnn"}));
  train_cmd->add_option("--hidden", tf.hidden, "Hidden units")->check(CLI::PositiveNumber);
  train_cmd->add_option("--optimizer", tf.optimizer)->check(CLI::IsMember({"sgd", "adam"}));
  train_cmd->add_option("--lr", tf.lr, "Learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tf.batch, "Sequences per minibatch")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", tf.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--check-every", tf.check_every, "Epochs between validation checks")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", tf.patience, "Checks without improvement before stopping")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tf.seed, "Random seed");
  train_cmd->add_option("--h0", tf.h0, "Initial mean-field state")
      ->check(CLI::IsMember({"learned", "sigmoid-c"}));
  train_cmd->add_option("--free-energy", tf.free_energy, "Free-energy form")
      ->check(CLI::IsMember({"recurrent", "printed"}));
  train_cmd->add_option("--out", tf.out, "Checkpoint path")->required();
  train_cmd->add_option("--metrics", tf.metrics, "Metrics CSV path");
  train_cmd->add_option("--l2", tf.l2, "L2 penalty on weight matrices")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--clip", tf.clip, "Global gradient-norm clip (0 = off)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_flag("--memoryless", tf.memoryless, "Hold W_hh at zero");

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint; prints a JSON report");
  add_data_flags(*eval_cmd, data);
  eval_cmd->add_option("--model-file", ef.model_file, "Checkpoint")->required();
  eval_cmd->add_option("--data", ef.data, "Evaluation data")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Decode every sequence; one line each");
  add_data_flags(*predict_cmd, data);
  predict_cmd->add_option("--model-file", ef.model_file, "Checkpoint")->required();
  predict_cmd->add_option("--data", ef.data, "Input data")->required();

  VerifyFlags vf;
  auto* verify_cmd = app.add_subcommand("verify", "Run the brute-force verification suites");
  verify_cmd->add_option("--suite", vf.suite)
      ->check(CLI::IsMember({"gradcheck", "oracle", "normalization", "all"}));
  verify_cmd->add_option("--trials", vf.trials, "Trials per suite (default per suite)");
  verify_cmd->add_option("--seed", vf.seed);
  verify_cmd->add_option("--inject-fault", vf.inject_fault)
      ->check(CLI::IsMember({"none", "sign-flip"}))
      ->group("");  // test hook, hidden from --help

  auto* oracle_cmd = app.add_subcommand("oracle-check", "Same as verify --suite=oracle");
  oracle_cmd->add_option("--trials", vf.trials);
  oracle_cmd->add_option("--seed", vf.seed);

  ReproFlags rf;
  auto* repro_cmd = app.add_subcommand("repro-ocr", "Fold-by-fold OCR run (cv or ms protocol)");
  repro_cmd->add_option("--data", rf.data, "OCR letter file")->required();
  repro_cmd->add_option("--partition", rf.partition)->check(CLI::IsMember({"cv", "ms"}));
  repro_cmd->add_option("--hidden", rf.hidden)->check(CLI::PositiveNumber);
  repro_cmd->add_option("--lr", rf.lr)->check(CLI::PositiveNumber);
  repro_cmd->add_option("--batch", rf.batch)->check(CLI::PositiveNumber);
  repro_cmd->add_option("--epochs", rf.epochs)->check(CLI::PositiveNumber);
  repro_cmd->add_option("--check-every", rf.check_every)->check(CLI::PositiveNumber);
  repro_cmd->add_option("--patience", rf.patience)->check(CLI::PositiveNumber);
  repro_cmd->add_option("--seed", rf.seed);
  repro_cmd->add_option("--max-folds", rf.max_folds, "Stop after this many folds (0 = all)");

  std::vector<std::string> argv_storage{"scrbm"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadFlags;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(tf, data, out);
    if (eval_cmd->parsed()) return cmd_eval(ef, data, out);
    if (predict_cmd->parsed()) return cmd_predict(ef, data, out);
    if (verify_cmd->parsed()) return cmd_verify(vf, out);
    if (oracle_cmd->parsed()) {
      vf.suite = "oracle";
      return cmd_verify(vf, out);
    }
    if (repro_cmd->parsed()) return cmd_repro_ocr(rf, out, err);
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const NumericFault& e) {
    err << "numeric fault: " << e.what() << '\n';
    return kExitNumericFault;
  } catch (const OracleLimitExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadFlags;
  }
  return kExitBadFlags;
}

}  // namespace scrbm::cli
