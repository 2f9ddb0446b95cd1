#include "sparsescale/trainer/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::trainer {

Vocabulary::Vocabulary(const std::string& text) {
  bool seen[256] = {};
  for (unsigned char c : text) seen[c] = true;
  std::fill(std::begin(index_), std::end(index_), -1);
  for (int c = 0; c < 256; ++c)
    if (seen[c]) {
      index_[c] = static_cast<int>(symbols_.size());
      symbols_.push_back(static_cast<char>(c));
    }
}

int Vocabulary::encode(char c) const {
  const int id = index_[static_cast<unsigned char>(c)];
  if (id < 0 || symbols_.empty()) throw ConfigError("symbol outside the vocabulary");
  return id;
}

Corpus corpus_from_text(const std::string& text, double held_out_fraction) {
  if (!(held_out_fraction > 0.0 && held_out_fraction < 1.0))
    throw ConfigError("held-out fraction must lie in (0, 1)");
  if (text.size() < 2) throw ConfigError("corpus is too short");
  Corpus c;
  c.vocab = Vocabulary(text);
  const auto split = static_cast<std::size_t>(
      static_cast<double>(text.size()) * (1.0 - held_out_fraction));
  c.train.reserve(split);
  for (std::size_t i = 0; i < text.size(); ++i)
    (i < split ? c.train : c.held_out).push_back(c.vocab.encode(text[i]));
  return c;
}

Corpus load_corpus(const std::filesystem::path& path, double held_out_fraction) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open corpus '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return corpus_from_text(ss.str(), held_out_fraction);
}

}  // namespace sparsescale::trainer
