#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace xlsent {

// Word-level vocabulary with five reserved ids. Immutable once trained.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static constexpr int kNumReserved = 5;

  Vocabulary() = default;

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token_of(int id) const;

  void save(const std::string& path) const;  // token<TAB>id, reserved first
  static Vocabulary load(const std::string& path);

  static Vocabulary from_tokens(const std::vector<std::string>& tokens_by_id);

 private:
  std::map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Lowercased alphanumeric word splitting; non-ASCII bytes count as letters.
std::vector<std::string> word_tokens(const std::string& text);

// Top-(max_size-5) tokens by frequency, ties broken lexicographically.
Vocabulary train_vocab(const std::vector<std::string>& corpus, int max_size);

std::vector<int> encode(const Vocabulary& vocab, const std::string& text, bool add_specials);

// Inverse of encode for in-vocabulary text (modulo casing); specials skipped.
std::string decode(const Vocabulary& vocab, const std::vector<int>& ids);

// Keeps the first budget/2 and last budget/2 ids of over-long sequences.
std::vector<int> truncate_head_tail(const std::vector<int>& ids, int budget);

struct MaskedBatch {
  std::vector<std::vector<int>> input_ids;       // corrupted ids, padded
  std::vector<std::vector<int>> target_ids;      // original id at masked positions, -1 elsewhere
  std::vector<std::vector<std::uint8_t>> mask_positions;
  std::vector<std::vector<std::uint8_t>> attention_mask;  // 1 at real tokens

  std::size_t batch_size() const { return input_ids.size(); }
  std::size_t seq_len() const { return input_ids.empty() ? 0 : input_ids[0].size(); }
  std::size_t masked_count() const;
};

// Pads rows to the longest row, then corrupts each non-special position
// independently with probability `rate`: 80% -> [MASK], 10% -> random vocab
// id, 10% -> unchanged. Deterministic per seed.
MaskedBatch mask_for_mlm(const std::vector<std::vector<int>>& rows, const Vocabulary& vocab,
                         double rate, std::uint64_t seed);

// Padding + attention masks without any corruption (fine-tuning batches).
MaskedBatch pad_batch(const std::vector<std::vector<int>>& rows);

}  // namespace xlsent
