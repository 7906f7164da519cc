#pragma once

#include <array>
#include <string>
#include <vector>

namespace xlsent {

enum class SentimentLabel : int { negative = 0, neutral = 1, positive = 2 };

inline constexpr int kNumClasses = 3;

inline constexpr std::array<SentimentLabel, 3> kAllLabels = {
    SentimentLabel::negative, SentimentLabel::neutral, SentimentLabel::positive};

std::string to_string(SentimentLabel label);

// Case-folds the input; throws DataError on anything but the three labels.
SentimentLabel label_from_string(const std::string& text);

// Mean-of-Likert aggregation: mean <= 2.4 -> negative, mean >= 3.6 ->
// positive, strictly between -> neutral.
SentimentLabel aggregate_annotations(const std::vector<int>& scores);

}  // namespace xlsent
