#include "alienzoo/plants.hpp"

#include <charconv>
#include <cstdlib>

#include "alienzoo/errors.hpp"

namespace alienzoo {

std::string_view to_string(Experiment e) {
  return e == Experiment::Exp1 ? "exp1" : "exp2";
}

Experiment experiment_from_int(int n) {
  if (n == 1) return Experiment::Exp1;
  if (n == 2) return Experiment::Exp2;
  throw ValidationError("unknown experiment " + std::to_string(n) + " (expected 1 or 2)",
                        {"experiment"});
}

PlantVector::PlantVector(const std::array<int, kNumPlants>& leaves) : leaves_(leaves) {
  for (int i = 0; i < kNumPlants; ++i) {
    if (leaves[i] < 0 || leaves[i] > kMaxLeaves) {
      throw ValidationError("plant " + std::to_string(i + 1) + " has " +
                                std::to_string(leaves[i]) + " leaves; allowed range is 0..6",
                            {"leaves"});
    }
  }
}

std::array<double, kNumPlants> PlantVector::as_point() const {
  std::array<double, kNumPlants> p{};
  for (int i = 0; i < kNumPlants; ++i) p[i] = leaves_[i];
  return p;
}

int PlantVector::grid_index() const {
  int idx = 0;
  for (int v : leaves_) idx = idx * (kMaxLeaves + 1) + v;
  return idx;
}

PlantVector PlantVector::from_grid_index(int index) {
  if (index < 0 || index >= kGridPoints) {
    throw ValidationError("grid index out of range");
  }
  std::array<int, kNumPlants> leaves{};
  for (int i = kNumPlants - 1; i >= 0; --i) {
    leaves[i] = index % (kMaxLeaves + 1);
    index /= (kMaxLeaves + 1);
  }
  return PlantVector(leaves);
}

PlantVector PlantVector::parse(std::string_view text) {
  std::array<int, kNumPlants> leaves{};
  std::size_t pos = 0;
  for (int i = 0; i < kNumPlants; ++i) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc()) {
      throw ValidationError("expected 5 comma-separated integers, got '" + std::string(text) + "'",
                            {"leaves"});
    }
    leaves[i] = value;
    pos = static_cast<std::size_t>(ptr - text.data());
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (i + 1 < kNumPlants) {
      if (pos >= text.size() || text[pos] != ',') {
        throw ValidationError("expected 5 comma-separated integers, got '" + std::string(text) +
                                  "'",
                              {"leaves"});
      }
      ++pos;
    }
  }
  if (pos != text.size()) {
    throw ValidationError("trailing characters in plant vector '" + std::string(text) + "'",
                          {"leaves"});
  }
  return PlantVector(leaves);
}

std::string PlantVector::to_string() const {
  std::string out;
  for (int i = 0; i < kNumPlants; ++i) {
    if (i) out += ',';
    out += std::to_string(leaves_[i]);
  }
  return out;
}

int l1_distance(const PlantVector& a, const PlantVector& b) {
  int d = 0;
  for (int i = 0; i < kNumPlants; ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace alienzoo
