#include "xlsent/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "xlsent/errors.hpp"
#include "xlsent/rng.hpp"

namespace xlsent {

namespace {

const std::vector<std::string> kReservedTokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;  // keep UTF-8 continuation bytes inside words
}

}  // namespace

std::vector<std::string> word_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) throw DataError("vocabulary: id " + std::to_string(id) + " out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens_by_id) {
  if (tokens_by_id.size() < kNumReserved) throw DataError("vocabulary: fewer than 5 tokens");
  for (int i = 0; i < kNumReserved; ++i) {
    if (tokens_by_id[static_cast<std::size_t>(i)] != kReservedTokens[static_cast<std::size_t>(i)]) {
      throw DataError("vocabulary: reserved token " + std::to_string(i) + " must be " +
                      kReservedTokens[static_cast<std::size_t>(i)]);
    }
  }
  Vocabulary vocab;
  vocab.id_to_token_ = tokens_by_id;
  for (std::size_t i = 0; i < tokens_by_id.size(); ++i) {
    if (!vocab.token_to_id_.emplace(tokens_by_id[i], static_cast<int>(i)).second) {
      throw DataError("vocabulary: duplicate token \"" + tokens_by_id[i] + "\"");
    }
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file \"" + path + "\"");
  for (int id = 0; id < size(); ++id) {
    out << id_to_token_[static_cast<std::size_t>(id)] << '\t' << id << '\n';
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file \"" + path + "\"");
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("vocabulary file line " + std::to_string(line_no) + ": missing tab separator");
    }
    const std::string token = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    if (id != static_cast<int>(tokens.size())) {
      throw DataError("vocabulary file line " + std::to_string(line_no) + ": ids must be consecutive from 0");
    }
    tokens.push_back(token);
  }
  return from_tokens(tokens);
}

Vocabulary train_vocab(const std::vector<std::string>& corpus, int max_size) {
  if (max_size < Vocabulary::kNumReserved + 1) throw DataError("train_vocab: max_size must be >= 6");
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : corpus) {
    for (const std::string& token : word_tokens(text)) ++counts[token];
  }
  if (counts.empty()) throw DataError("train_vocab: empty corpus");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t keep = std::min<std::size_t>(ranked.size(),
                                                 static_cast<std::size_t>(max_size - Vocabulary::kNumReserved));
  std::vector<std::string> tokens = kReservedTokens;
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(ranked[i].first);
  return Vocabulary::from_tokens(tokens);
}

std::vector<int> encode(const Vocabulary& vocab, const std::string& text, bool add_specials) {
  std::vector<int> ids;
  if (add_specials) ids.push_back(Vocabulary::kCls);
  for (const std::string& token : word_tokens(text)) ids.push_back(vocab.id_of(token));
  if (add_specials) ids.push_back(Vocabulary::kSep);
  return ids;
}

std::string decode(const Vocabulary& vocab, const std::vector<int>& ids) {
  std::string text;
  for (int id : ids) {
    if (id < Vocabulary::kNumReserved) continue;
    if (!text.empty()) text.push_back(' ');
    text += vocab.token_of(id);
  }
  return text;
}

std::vector<int> truncate_head_tail(const std::vector<int>& ids, int budget) {
  if (budget < 2 || budget % 2 != 0) {
    throw DataError("truncate_head_tail: budget must be an even integer >= 2, got " + std::to_string(budget));
  }
  const std::size_t b = static_cast<std::size_t>(budget);
  if (ids.size() <= b) return ids;
  const std::size_t half = b / 2;
  std::vector<int> out(ids.begin(), ids.begin() + static_cast<long>(half));
  out.insert(out.end(), ids.end() - static_cast<long>(half), ids.end());
  return out;
}

std::size_t MaskedBatch::masked_count() const {
  std::size_t count = 0;
  for (const auto& row : mask_positions) {
    for (std::uint8_t m : row) count += m;
  }
  return count;
}

MaskedBatch pad_batch(const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) throw DataError("pad_batch: empty batch");
  std::size_t max_len = 0;
  for (const auto& row : rows) max_len = std::max(max_len, row.size());
  if (max_len == 0) throw DataError("pad_batch: all rows empty");
  MaskedBatch batch;
  for (const auto& row : rows) {
    std::vector<int> ids(max_len, Vocabulary::kPad);
    std::vector<std::uint8_t> attn(max_len, 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      ids[i] = row[i];
      attn[i] = 1;
    }
    batch.input_ids.push_back(std::move(ids));
    batch.target_ids.emplace_back(max_len, -1);
    batch.mask_positions.emplace_back(max_len, 0);
    batch.attention_mask.push_back(std::move(attn));
  }
  return batch;
}

MaskedBatch mask_for_mlm(const std::vector<std::vector<int>>& rows, const Vocabulary& vocab,
                         double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw DataError("mask_for_mlm: rate must be in [0,1]");
  MaskedBatch batch = pad_batch(rows);
  Rng rng(seed);
  const int vocab_size = vocab.size();
  for (std::size_t r = 0; r < batch.input_ids.size(); ++r) {
    for (std::size_t c = 0; c < batch.input_ids[r].size(); ++c) {
      if (!batch.attention_mask[r][c]) continue;
      const int original = batch.input_ids[r][c];
      if (original < Vocabulary::kNumReserved) continue;  // never mask specials or padding
      if (rng.next_double() >= rate) continue;
      batch.mask_positions[r][c] = 1;
      batch.target_ids[r][c] = original;
      const double bucket = rng.next_double();
      if (bucket < 0.8) {
        batch.input_ids[r][c] = Vocabulary::kMask;
      } else if (bucket < 0.9) {
        batch.input_ids[r][c] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(vocab_size)));
      }  // else leave unchanged
    }
  }
  return batch;
}

}  // namespace xlsent
