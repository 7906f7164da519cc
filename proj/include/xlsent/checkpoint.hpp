#pragma once

#include <optional>
#include <string>

#include "xlsent/encoder.hpp"
#include "xlsent/tokenizer.hpp"

namespace xlsent {

struct Checkpoint {
  EncoderParameters params;
  std::optional<Vocabulary> vocab;
};

// Versioned container: magic + JSON header (config, optional vocabulary,
// tensor directory) followed by the named tensors as little-endian IEEE-754
// float64 arrays. save -> load round-trips bit-exactly.
void save_checkpoint(const std::string& path, const EncoderParameters& params,
                     const std::optional<Vocabulary>& vocab = std::nullopt);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace xlsent
