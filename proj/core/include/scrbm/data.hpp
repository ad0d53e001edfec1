#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scrbm/model.hpp"

namespace scrbm {

enum class TaskKind { Labelling, NextEvent };

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

/// Labelled sequences plus the vocabularies that give indices their meaning.
/// The hidden size is a model choice, so only M and K live here.
struct Dataset {
  std::size_t n_visible = 0;
  std::size_t n_classes = 0;
  std::vector<SequenceExample> examples;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;  // optional
  TaskKind task_kind = TaskKind::Labelling;
  std::vector<int> folds;  // per example when the source carries a fold id

  // Warning counters filled by loaders that map against a training vocabulary.
  std::size_t unseen_labels = 0;
  std::size_t unseen_inputs = 0;

  bool empty() const { return examples.empty(); }
  std::size_t n_tokens() const;
  ModelDims model_dims(std::size_t n_hidden) const { return {n_visible, n_hidden, n_classes}; }

  /// Every label < K, every feature index < M, vocabulary sizes consistent.
  void validate() const;

  /// Same vocabularies, examples picked by index (folds follow along).
  Dataset subset(std::span<const std::size_t> indices) const;
};

// ---- OCR -------------------------------------------------------------------

inline constexpr std::size_t kOcrPixels = 128;
inline constexpr std::size_t kOcrLetters = 26;

/// Tab-separated letter rows: id, letter, next_id, word_id, position, fold,
/// then 128 pixel values. Rows are chained into words through next_id, with
/// -1 ending a word.
Dataset load_ocr(const std::filesystem::path& path);
Dataset parse_ocr(std::istream& in);

struct DataSplit {
  Dataset train;
  Dataset valid;  // empty when the protocol has no model selection
  Dataset test;
};

/// "ms" protocol: group g trains on fold g, validates on fold g+1 (mod 10),
/// tests on the remaining folds.
std::vector<DataSplit> ocr_ms_groups(const Dataset& all);
/// "cv" protocol: fold g is the test set, the rest is training data.
std::vector<DataSplit> ocr_cv_folds(const Dataset& all);

// ---- CoNLL-style column files ----------------------------------------------

struct FeatureTemplate {
  bool use_word = true;
  bool use_lowercase = true;
  int prefix_suffix_max = 3;     // 0..4
  bool orthographic_flags = true;  // capitalized, digit, hyphen
  std::size_t min_count = 1;

  void validate() const;
};

/// Feature strings emitted for one token, in template order.
std::vector<std::string> token_features(std::string_view word, const FeatureTemplate& tmpl);

/// Builds feature and label vocabularies from this file (sorted for
/// determinism). Column 0 holds the word; `label_column` selects the tag.
Dataset load_conll(const std::filesystem::path& path, const FeatureTemplate& tmpl,
                   std::size_t label_column);
Dataset parse_conll(std::istream& in, const FeatureTemplate& tmpl, std::size_t label_column);

/// Maps a held-out file through `reference`'s vocabularies. Unseen features
/// are dropped; unseen labels map to class 0 and are counted.
Dataset load_conll(const std::filesystem::path& path, const FeatureTemplate& tmpl,
                   std::size_t label_column, const Dataset& reference);
Dataset parse_conll(std::istream& in, const FeatureTemplate& tmpl, std::size_t label_column,
                    const Dataset& reference);

// ---- Melodies ----------------------------------------------------------------

using Melody = std::vector<int>;

/// One space-separated pitch sequence per line; blank lines are skipped.
std::vector<Melody> load_melodies(const std::filesystem::path& path);
std::vector<Melody> parse_melodies(std::istream& in);

/// Next-event encoding: label at t is s^t, input is one-hot(s^{t-1}), and the
/// first input is the zero vector. Vocabulary = sorted distinct pitches.
Dataset encode_melody(std::span<const Melody> melodies);

/// Encodes against a training vocabulary. Unseen input pitches become the
/// zero vector; steps whose label is unseen are left unscored.
Dataset encode_melody(std::span<const Melody> melodies, const Dataset& reference);

// ---- Synthetic XOR chain -------------------------------------------------------

/// y^t = x^t XOR y^{t-1}, y^0 = 0.
std::vector<std::size_t> xor_labels(std::span<const int> bits);

/// Input bits become one-hot vectors over M = 2; labels follow xor_labels.
SequenceExample xor_example(std::span<const int> bits);

/// Bernoulli(0.5) input bits, XOR-chain labels, each label flipped
/// independently with probability flip_noise.
Dataset synth_markov(std::size_t n_sequences, std::size_t length, double flip_noise,
                     std::uint64_t seed);

/// Noise-free XOR dataset from explicit bit sequences.
Dataset synth_from_bits(std::span<const std::vector<int>> sequences);

/// One whitespace-separated 0/1 sequence per line.
std::vector<std::vector<int>> load_bit_sequences(const std::filesystem::path& path);

}  // namespace scrbm
