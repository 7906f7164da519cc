#pragma once

#include <cstddef>
#include <string>

#include "xlsent/corpus.hpp"

namespace xlsent {

// Position label of a paragraph within its article: 0 = beginning third,
// 1 = intermediate third, 2 = final third.
enum class PoaMode {
  thirds,   // min(floor(3*index/doc_len), 2); default
  literal,  // 3*floor(index/(doc_len-1)), clamped to {0,1,2}
};

PoaMode poa_mode_from_string(const std::string& text);
std::string to_string(PoaMode mode);

// The final paragraph is always labelled 2, in both modes; this also covers
// single-paragraph documents, where the literal formula would divide by zero.
int poa_label(std::size_t index, std::size_t doc_len, PoaMode mode = PoaMode::thirds);

// Adds the position label to every paragraph. Idempotent; needs no manual labels.
void annotate_paragraphs(ParagraphDataset& paragraphs, PoaMode mode = PoaMode::thirds);

}  // namespace xlsent
