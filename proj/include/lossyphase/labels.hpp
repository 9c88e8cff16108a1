#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace lossyphase {

/// Two-fold coincidence labels. A and B count the interferometer outputs,
/// C the photons removed by the loss.
enum class Label { AA = 0, AB, BB, AC, BC, CC };

inline constexpr std::size_t kLabelCount = 6;
inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::AA, Label::AB, Label::BB, Label::AC, Label::BC, Label::CC};

constexpr std::size_t index(Label l) { return static_cast<std::size_t>(l); }

constexpr std::string_view label_name(Label l) {
  constexpr std::array<std::string_view, kLabelCount> names = {"AA", "AB", "BB",
                                                               "AC", "BC", "CC"};
  return names[index(l)];
}

inline std::optional<Label> parse_label(std::string_view s) {
  for (Label l : kAllLabels) {
    if (label_name(l) == s) return l;
  }
  return std::nullopt;
}

/// Number of photons that reached counter C for this label.
constexpr int lost_photons(Label l) {
  switch (l) {
    case Label::AA:
    case Label::AB:
    case Label::BB:
      return 0;
    case Label::AC:
    case Label::BC:
      return 1;
    case Label::CC:
      return 2;
  }
  return 0;
}

using LabelProbs = std::array<double, kLabelCount>;
using LabelCounts = std::array<std::int64_t, kLabelCount>;

inline double total(const LabelProbs& p) {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

inline std::int64_t total(const LabelCounts& c) {
  std::int64_t s = 0;
  for (auto v : c) s += v;
  return s;
}

}  // namespace lossyphase
