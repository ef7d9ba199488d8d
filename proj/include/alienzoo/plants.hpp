#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace alienzoo {

inline constexpr int kNumPlants = 5;
inline constexpr int kMaxLeaves = 6;
inline constexpr int kGridPoints = 16807;  // 7^5
inline constexpr double kMinGrowth = 0.1;
inline constexpr double kMaxGrowth = 1.9;

enum class Experiment { Exp1 = 1, Exp2 = 2 };

std::string_view to_string(Experiment e);
Experiment experiment_from_int(int n);  // throws ValidationError for anything but 1 or 2

/// Leaf counts for plants 1..5 in canonical order. Always within [0, 6].
class PlantVector {
 public:
  PlantVector() = default;
  /// Throws ValidationError if any count is outside [0, 6].
  explicit PlantVector(const std::array<int, kNumPlants>& leaves);

  int operator[](std::size_t i) const { return leaves_[i]; }
  const std::array<int, kNumPlants>& leaves() const { return leaves_; }
  std::array<double, kNumPlants> as_point() const;

  /// Grid index in [0, 16807): plant 1 is the most significant base-7 digit.
  int grid_index() const;
  static PlantVector from_grid_index(int index);

  /// Parses "0,5,0,1,0".
  static PlantVector parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const PlantVector&, const PlantVector&) = default;

 private:
  std::array<int, kNumPlants> leaves_{};
};

int l1_distance(const PlantVector& a, const PlantVector& b);

}  // namespace alienzoo
