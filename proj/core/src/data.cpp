#include "scrbm/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scrbm/errors.hpp"

namespace scrbm {

std::string_view to_string(TaskKind k) {
  return k == TaskKind::Labelling ? "labelling" : "next_event";
}

TaskKind parse_task_kind(std::string_view s) {
  if (s == "labelling") return TaskKind::Labelling;
  if (s == "next_event") return TaskKind::NextEvent;
  throw ContractViolation("unknown task kind '" + std::string(s) + "'");
}

std::size_t Dataset::n_tokens() const {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.length();
  return n;
}

void Dataset::validate() const {
  if (!class_names.empty() && class_names.size() != n_classes) {
    throw DataError("class name count does not match n_classes");
  }
  if (!feature_names.empty() && feature_names.size() != n_visible) {
    throw DataError("feature name count does not match n_visible");
  }
  if (!folds.empty() && folds.size() != examples.size()) {
    throw DataError("fold list length does not match example count");
  }
  for (const auto& ex : examples) {
    if (ex.inputs.empty() || ex.inputs.size() != ex.labels.size()) {
      throw DataError("example with inconsistent lengths");
    }
    if (!ex.scored.empty() && ex.scored.size() != ex.inputs.size()) {
      throw DataError("scoring mask length does not match example length");
    }
    for (std::size_t t = 0; t < ex.length(); ++t) {
      if (ex.labels[t] >= n_classes) throw DataError("label index out of range");
      const auto& active = ex.inputs[t].active();
      if (!active.empty() && active.back().index >= n_visible) {
        throw DataError("feature index out of range");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.n_visible = n_visible;
  out.n_classes = n_classes;
  out.class_names = class_names;
  out.feature_names = feature_names;
  out.task_kind = task_kind;
  for (std::size_t i : indices) {
    out.examples.push_back(examples.at(i));
    if (!folds.empty()) out.folds.push_back(folds[i]);
  }
  return out;
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                    std::string(field) + "'");
  }
  return value;
}

std::vector<std::string> letter_names() {
  std::vector<std::string> names;
  for (char ch = 'a'; ch <= 'z'; ++ch) names.emplace_back(1, ch);
  return names;
}

}  // namespace

// ---- OCR -------------------------------------------------------------------

Dataset load_ocr(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_ocr(in);
}

Dataset parse_ocr(std::istream& in) {
  struct Row {
    long id;
    std::size_t letter;
    long next_id;
    int fold;
    SparseInput pixels;
  };

  std::vector<Row> rows;
  std::unordered_map<long, std::size_t> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split_ws(line);
    if (fields.size() != 6 + kOcrPixels) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(6 + kOcrPixels) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Row row;
    row.id = parse_number<long>(fields[0], line_no, "id");
    if (fields[1].size() != 1 || fields[1][0] < 'a' || fields[1][0] > 'z') {
      throw DataError("line " + std::to_string(line_no) + ": letter must be a-z");
    }
    row.letter = static_cast<std::size_t>(fields[1][0] - 'a');
    row.next_id = parse_number<long>(fields[2], line_no, "next_id");
    row.fold = parse_number<int>(fields[5], line_no, "fold");
    std::vector<Feature> active;
    for (std::size_t p = 0; p < kOcrPixels; ++p) {
      const double v = parse_number<double>(fields[6 + p], line_no, "pixel");
      if (v != 0.0) active.push_back({static_cast<std::uint32_t>(p), v});
    }
    row.pixels = SparseInput(std::move(active));
    if (!by_id.emplace(row.id, rows.size()).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate id " +
                      std::to_string(row.id));
    }
    rows.push_back(std::move(row));
  }

  std::vector<bool> referenced(rows.size(), false);
  for (const auto& row : rows) {
    if (row.next_id == -1) continue;
    auto it = by_id.find(row.next_id);
    if (it == by_id.end()) {
      throw DataError("broken chain: id " + std::to_string(row.id) + " points to missing id " +
                      std::to_string(row.next_id));
    }
    if (referenced[it->second]) {
      throw DataError("broken chain: id " + std::to_string(row.next_id) +
                      " has two predecessors");
    }
    referenced[it->second] = true;
  }

  Dataset ds;
  ds.n_visible = kOcrPixels;
  ds.n_classes = kOcrLetters;
  ds.class_names = letter_names();
  std::vector<bool> visited(rows.size(), false);
  for (std::size_t head = 0; head < rows.size(); ++head) {
    if (referenced[head]) continue;
    SequenceExample ex;
    for (std::size_t r = head;;) {
      visited[r] = true;
      ex.inputs.push_back(rows[r].pixels);
      ex.labels.push_back(rows[r].letter);
      if (rows[r].next_id == -1) break;
      r = by_id.at(rows[r].next_id);
    }
    ds.examples.push_back(std::move(ex));
    ds.folds.push_back(rows[head].fold);
  }
  if (std::find(visited.begin(), visited.end(), false) != visited.end()) {
    throw DataError("broken chain: cycle in next_id links");
  }
  return ds;
}

namespace {

std::vector<int> distinct_folds(const Dataset& all) {
  if (all.folds.size() != all.examples.size()) {
    throw DataError("dataset carries no fold ids");
  }
  std::set<int> s(all.folds.begin(), all.folds.end());
  return {s.begin(), s.end()};
}

std::vector<std::size_t> indices_where(const Dataset& all, auto&& pred) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < all.examples.size(); ++i) {
    if (pred(all.folds[i])) idx.push_back(i);
  }
  return idx;
}

}  // namespace

std::vector<DataSplit> ocr_ms_groups(const Dataset& all) {
  const auto folds = distinct_folds(all);
  if (folds.size() < 3) throw DataError("ms protocol needs at least 3 folds");
  std::vector<DataSplit> out;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    const int train_fold = folds[g];
    const int valid_fold = folds[(g + 1) % folds.size()];
    DataSplit split;
    split.train = all.subset(indices_where(all, [&](int f) { return f == train_fold; }));
    split.valid = all.subset(indices_where(all, [&](int f) { return f == valid_fold; }));
    split.test = all.subset(
        indices_where(all, [&](int f) { return f != train_fold && f != valid_fold; }));
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<DataSplit> ocr_cv_folds(const Dataset& all) {
  const auto folds = distinct_folds(all);
  if (folds.size() < 2) throw DataError("cv protocol needs at least 2 folds");
  std::vector<DataSplit> out;
  for (int test_fold : folds) {
    DataSplit split;
    split.train = all.subset(indices_where(all, [&](int f) { return f != test_fold; }));
    split.valid = all.subset(std::vector<std::size_t>{});
    split.test = all.subset(indices_where(all, [&](int f) { return f == test_fold; }));
    out.push_back(std::move(split));
  }
  return out;
}

// ---- CoNLL -----------------------------------------------------------------

void FeatureTemplate::validate() const {
  if (prefix_suffix_max < 0 || prefix_suffix_max > 4) {
    throw ContractViolation("prefix_suffix_max must be in 0..4");
  }
  if (min_count < 1) throw ContractViolation("min_count must be >= 1");
}

std::vector<std::string> token_features(std::string_view word, const FeatureTemplate& tmpl) {
  std::vector<std::string> out;
  if (tmpl.use_word) out.push_back("w=" + std::string(word));
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (tmpl.use_lowercase) out.push_back("lw=" + lower);
  for (int k = 1; k <= tmpl.prefix_suffix_max; ++k) {
    const auto n = static_cast<std::size_t>(k);
    if (lower.size() < n) break;
    out.push_back("p" + std::to_string(k) + "=" + lower.substr(0, n));
    out.push_back("s" + std::to_string(k) + "=" + lower.substr(lower.size() - n));
  }
  if (tmpl.orthographic_flags) {
    auto any = [&](auto pred) {
      return std::any_of(word.begin(), word.end(),
                         [&](char ch) { return pred(static_cast<unsigned char>(ch)); });
    };
    if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0]))) out.push_back("cap");
    if (any([](unsigned char ch) { return std::isdigit(ch) != 0; })) out.push_back("digit");
    if (any([](unsigned char ch) { return ch == '-'; })) out.push_back("hyphen");
  }
  return out;
}

namespace {

struct Token {
  std::string word;
  std::string label;
};
using Sentence = std::vector<Token>;

std::vector<Sentence> read_columns(std::istream& in, std::size_t label_column) {
  if (label_column == 0) throw ContractViolation("label column 0 holds the word");
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line.rfind("-DOCSTART-", 0) == 0) continue;
    const auto cols = split_ws(line);
    if (width == 0) width = cols.size();
    if (cols.size() != width) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " columns, got " + std::to_string(cols.size()));
    }
    if (label_column >= width) {
      throw DataError("line " + std::to_string(line_no) + ": label column " +
                      std::to_string(label_column) + " missing");
    }
    current.push_back({std::string(cols[0]), std::string(cols[label_column])});
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

Dataset encode_conll(const std::vector<Sentence>& sentences, const FeatureTemplate& tmpl,
                     const std::map<std::string, std::uint32_t>& features,
                     const std::map<std::string, std::size_t>& labels, bool count_unseen) {
  Dataset ds;
  ds.n_visible = features.size();
  ds.n_classes = labels.size();
  ds.class_names.resize(labels.size());
  for (const auto& [name, idx] : labels) ds.class_names[idx] = name;
  ds.feature_names.resize(features.size());
  for (const auto& [name, idx] : features) ds.feature_names[idx] = name;

  for (const auto& sentence : sentences) {
    SequenceExample ex;
    for (const auto& tok : sentence) {
      std::vector<Feature> active;
      for (const auto& f : token_features(tok.word, tmpl)) {
        auto it = features.find(f);
        if (it != features.end()) active.push_back({it->second, 1.0});
      }
      std::sort(active.begin(), active.end(),
                [](const Feature& a, const Feature& b) { return a.index < b.index; });
      active.erase(std::unique(active.begin(), active.end(),
                               [](const Feature& a, const Feature& b) { return a.index == b.index; }),
                   active.end());
      ex.inputs.emplace_back(std::move(active));
      auto lit = labels.find(tok.label);
      if (lit != labels.end()) {
        ex.labels.push_back(lit->second);
      } else {
        if (!count_unseen) throw DataError("label '" + tok.label + "' missing from vocabulary");
        ++ds.unseen_labels;
        ex.labels.push_back(0);
      }
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace

Dataset parse_conll(std::istream& in, const FeatureTemplate& tmpl, std::size_t label_column) {
  tmpl.validate();
  const auto sentences = read_columns(in, label_column);

  std::map<std::string, std::size_t> counts;
  std::set<std::string> label_set;
  for (const auto& s : sentences) {
    for (const auto& tok : s) {
      for (const auto& f : token_features(tok.word, tmpl)) ++counts[f];
      label_set.insert(tok.label);
    }
  }
  std::map<std::string, std::uint32_t> features;
  for (const auto& [name, n] : counts) {
    if (n >= tmpl.min_count) {
      features.emplace(name, static_cast<std::uint32_t>(features.size()));
    }
  }
  std::map<std::string, std::size_t> labels;
  for (const auto& l : label_set) labels.emplace(l, labels.size());
  return encode_conll(sentences, tmpl, features, labels, false);
}

Dataset parse_conll(std::istream& in, const FeatureTemplate& tmpl, std::size_t label_column,
                    const Dataset& reference) {
  tmpl.validate();
  const auto sentences = read_columns(in, label_column);
  std::map<std::string, std::uint32_t> features;
  for (std::size_t i = 0; i < reference.feature_names.size(); ++i) {
    features.emplace(reference.feature_names[i], static_cast<std::uint32_t>(i));
  }
  std::map<std::string, std::size_t> labels;
  for (std::size_t i = 0; i < reference.class_names.size(); ++i) {
    labels.emplace(reference.class_names[i], i);
  }
  Dataset ds = encode_conll(sentences, tmpl, features, labels, true);
  ds.n_visible = reference.n_visible;
  ds.n_classes = reference.n_classes;
  return ds;
}

Dataset load_conll(const std::filesystem::path& path, const FeatureTemplate& tmpl,
                   std::size_t label_column) {
  auto in = open_or_throw(path);
  return parse_conll(in, tmpl, label_column);
}

Dataset load_conll(const std::filesystem::path& path, const FeatureTemplate& tmpl,
                   std::size_t label_column, const Dataset& reference) {
  auto in = open_or_throw(path);
  return parse_conll(in, tmpl, label_column, reference);
}

// ---- Melodies ----------------------------------------------------------------

std::vector<Melody> load_melodies(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_melodies(in);
}

std::vector<Melody> parse_melodies(std::istream& in) {
  std::vector<Melody> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Melody m;
    for (auto field : split_ws(line)) m.push_back(parse_number<int>(field, line_no, "pitch"));
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

Dataset encode_with_vocab(std::span<const Melody> melodies, const std::vector<int>& vocab,
                          bool allow_unseen) {
  std::map<int, std::uint32_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<std::uint32_t>(i));

  Dataset ds;
  ds.task_kind = TaskKind::NextEvent;
  ds.n_visible = vocab.size();
  ds.n_classes = vocab.size();
  for (int p : vocab) ds.class_names.push_back(std::to_string(p));
  ds.feature_names = ds.class_names;

  for (const auto& melody : melodies) {
    if (melody.empty()) continue;
    SequenceExample ex;
    bool masked = false;
    for (std::size_t t = 0; t < melody.size(); ++t) {
      if (t == 0) {
        ex.inputs.emplace_back();
      } else if (auto it = index.find(melody[t - 1]); it != index.end()) {
        ex.inputs.push_back(SparseInput::one_hot(it->second));
      } else {
        ++ds.unseen_inputs;
        ex.inputs.emplace_back();
      }
      if (auto it = index.find(melody[t]); it != index.end()) {
        ex.labels.push_back(it->second);
        ex.scored.push_back(1);
      } else {
        if (!allow_unseen) throw DataError("pitch missing from vocabulary");
        ++ds.unseen_labels;
        ex.labels.push_back(0);
        ex.scored.push_back(0);
        masked = true;
      }
    }
    if (!masked) ex.scored.clear();
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace

Dataset encode_melody(std::span<const Melody> melodies) {
  std::set<int> pitches;
  for (const auto& m : melodies) pitches.insert(m.begin(), m.end());
  return encode_with_vocab(melodies, {pitches.begin(), pitches.end()}, false);
}

Dataset encode_melody(std::span<const Melody> melodies, const Dataset& reference) {
  std::vector<int> vocab;
  for (const auto& name : reference.class_names) vocab.push_back(std::stoi(name));
  Dataset ds = encode_with_vocab(melodies, vocab, true);
  return ds;
}

// ---- Synthetic XOR chain -------------------------------------------------------

std::vector<std::size_t> xor_labels(std::span<const int> bits) {
  std::vector<std::size_t> labels;
  labels.reserve(bits.size());
  std::size_t prev = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw ContractViolation("xor inputs must be 0 or 1");
    prev = static_cast<std::size_t>(b) ^ prev;
    labels.push_back(prev);
  }
  return labels;
}

SequenceExample xor_example(std::span<const int> bits) {
  SequenceExample ex;
  ex.labels = xor_labels(bits);
  for (int b : bits) ex.inputs.push_back(SparseInput::one_hot(static_cast<std::uint32_t>(b)));
  return ex;
}

namespace {
Dataset empty_xor_dataset() {
  Dataset ds;
  ds.n_visible = 2;
  ds.n_classes = 2;
  ds.class_names = {"0", "1"};
  ds.feature_names = {"x=0", "x=1"};
  return ds;
}
}  // namespace

Dataset synth_markov(std::size_t n_sequences, std::size_t length, double flip_noise,
                     std::uint64_t seed) {
  if (length == 0) throw ContractViolation("synthetic sequences need length >= 1");
  if (!(flip_noise >= 0.0 && flip_noise < 0.5)) {
    throw ContractViolation("flip_noise must lie in [0, 0.5)");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution flip(flip_noise);

  Dataset ds = empty_xor_dataset();
  for (std::size_t s = 0; s < n_sequences; ++s) {
    std::vector<int> bits(length);
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    SequenceExample ex = xor_example(bits);
    if (flip_noise > 0.0) {
      for (auto& y : ex.labels) {
        if (flip(rng)) y ^= 1U;
      }
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset synth_from_bits(std::span<const std::vector<int>> sequences) {
  Dataset ds = empty_xor_dataset();
  for (const auto& bits : sequences) {
    if (bits.empty()) throw DataError("empty bit sequence");
    ds.examples.push_back(xor_example(bits));
  }
  return ds;
}

std::vector<std::vector<int>> load_bit_sequences(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<std::vector<int>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::vector<int> bits;
    for (auto field : split_ws(line)) {
      const int b = parse_number<int>(field, line_no, "bit");
      if (b != 0 && b != 1) throw DataError("line " + std::to_string(line_no) + ": bits must be 0/1");
      bits.push_back(b);
    }
    out.push_back(std::move(bits));
  }
  return out;
}

}  // namespace scrbm
