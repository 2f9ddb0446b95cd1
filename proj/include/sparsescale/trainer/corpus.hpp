#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sparsescale::trainer {

/// Character-level vocabulary: the distinct bytes of the source text, sorted.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::string& text);

  int size() const { return static_cast<int>(symbols_.size()); }
  int encode(char c) const;  // throws ConfigError for unknown symbols
  char decode(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  const std::string& symbols() const { return symbols_; }

 private:
  std::string symbols_;
  int index_[256] = {};
};

/// Encoded text split into a training prefix and a disjoint held-out suffix.
struct Corpus {
  Vocabulary vocab;
  std::vector<int> train;
  std::vector<int> held_out;
};

Corpus corpus_from_text(const std::string& text, double held_out_fraction = 0.1);
Corpus load_corpus(const std::filesystem::path& path, double held_out_fraction = 0.1);

}  // namespace sparsescale::trainer
