#include "xlsent/poa.hpp"

#include <algorithm>

#include "xlsent/errors.hpp"

namespace xlsent {

PoaMode poa_mode_from_string(const std::string& text) {
  if (text == "thirds") return PoaMode::thirds;
  if (text == "literal") return PoaMode::literal;
  throw DataError("unknown poa mode \"" + text + "\" (expected thirds|literal)");
}

std::string to_string(PoaMode mode) {
  return mode == PoaMode::thirds ? "thirds" : "literal";
}

int poa_label(std::size_t index, std::size_t doc_len, PoaMode mode) {
  if (doc_len < 1) throw DataError("poa_label: doc_len must be >= 1");
  if (index >= doc_len) {
    throw DataError("poa_label: index " + std::to_string(index) + " >= doc_len " + std::to_string(doc_len));
  }
  if (index == doc_len - 1) return 2;  // final-paragraph exception governs
  if (mode == PoaMode::thirds) {
    return static_cast<int>(std::min<std::size_t>(3 * index / doc_len, 2));
  }
  // literal: 3*floor(index/(doc_len-1)); non-final paragraphs floor to 0,
  // so the clamp only matters at the final index, already handled above.
  return static_cast<int>(std::min<std::size_t>(3 * (index / (doc_len - 1)), 2));
}

void annotate_paragraphs(ParagraphDataset& paragraphs, PoaMode mode) {
  for (Paragraph& p : paragraphs.paragraphs) {
    auto it = paragraphs.doc_lengths.find(p.doc_id);
    if (it == paragraphs.doc_lengths.end()) {
      throw DataError("annotate_paragraphs: unknown document \"" + p.doc_id + "\"");
    }
    p.poa = poa_label(p.index, it->second, mode);
  }
}

}  // namespace xlsent
