#pragma once

#include <array>
#include <string>
#include <vector>

#include "mfwidth/classify.hpp"

namespace fixture {

struct SurveyRow {
  const char* instrument;
  mfwidth::classify::Mode mode;
  double width;
  int group;  // as published, 1-based
};

// Published instrument survey: widths, playing modes and group labels.
inline std::vector<SurveyRow> survey() {
  using mfwidth::classify::Mode;
  return {
      {"Banjo", Mode::Plucked, 0.672, 1},
      {"Cittern", Mode::Plucked, 0.630, 1},
      {"Dotara", Mode::Plucked, 0.643, 1},
      {"Ektara", Mode::Plucked, 0.723, 1},
      {"Harp", Mode::Plucked, 0.686, 1},
      {"Hawaian Guitar", Mode::Plucked, 0.632, 1},
      {"Kora", Mode::Plucked, 0.626, 1},
      {"Mohan Veena", Mode::Plucked, 0.717, 1},
      {"Spanish Guitar", Mode::Plucked, 0.749, 1},
      {"English Guitar", Mode::Plucked, 0.716, 1},
      {"Portuguese Guitar", Mode::Plucked, 0.584, 1},
      {"Harpichord", Mode::Plucked, 0.675, 1},
      {"Sarod", Mode::Plucked, 0.702, 1},
      {"Murchang", Mode::Plucked, 0.715, 1},
      {"Sitar", Mode::Plucked, 0.428, 2},
      {"Veena", Mode::Plucked, 0.483, 2},
      {"Rudra Veena", Mode::Plucked, 0.387, 2},
      {"Surbahar", Mode::Plucked, 0.495, 2},
      {"Tanpura", Mode::Plucked, 0.506, 2},
      {"Mandolin", Mode::Plucked, 0.824, 3},
      {"Mandriola", Mode::Plucked, 0.812, 3},
      {"Esraj", Mode::Bowed, 0.803, 4},
      {"Rawanhata", Mode::Bowed, 0.896, 4},
      {"Sarengi", Mode::Bowed, 0.912, 4},
      {"Piano", Mode::Struck, 0.531, 5},
      {"Santoor", Mode::Struck, 0.515, 5},
  };
}

inline std::vector<mfwidth::classify::WidthRecord> survey_records() {
  std::vector<mfwidth::classify::WidthRecord> out;
  for (const auto& r : survey()) out.push_back({r.instrument, r.mode, r.width});
  return out;
}

// Published listener confusion percentages (rows: true plucked, struck,
// bowed; columns: perceived in the same order).
inline constexpr std::array<std::array<double, 3>, 3> kListenerPercentages = {{
    {73.14, 23.14, 3.71},
    {22, 78, 0},
    {4, 1, 95},
}};

inline constexpr std::array<std::array<const char*, 3>, 3> kListenerCells = {{
    {"73.14", "23.14", "3.71"},
    {"22", "78", "0"},
    {"4", "1", "95"},
}};

// Group width ranges as quoted in the survey discussion.
struct QuotedRange {
  int group;
  double lo;
  double hi;
};
inline constexpr std::array<QuotedRange, 3> kQuotedSpans = {{
    {2, 0.35, 0.50},
    {5, 0.50, 0.55},
    {4, 0.80, 0.90},
}};

}  // namespace fixture
