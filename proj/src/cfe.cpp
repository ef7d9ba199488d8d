#include "alienzoo/cfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alienzoo/errors.hpp"

namespace alienzoo {

void CfeConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < kMaxGrowth - kMinGrowth)) {
    throw ValidationError("cfe epsilon must lie in [0, 1.8)", {"epsilon"});
  }
  if (!(delta_improve > 0.0)) {
    throw ValidationError("cfe delta_improve must be > 0", {"delta_improve"});
  }
}

namespace {

double threshold_for(const GrowthModel& model, const PlantVector& x, const CfeConfig& config,
                     const std::vector<LeafBox>& leaves) {
  if (config.mode == CfeMode::StrictImprove) return model.predict(x) + config.delta_improve;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& l : leaves) best = std::max(best, l.value);
  return best - config.epsilon;
}

// (distance asc, value desc, suggestion asc)
bool better(int dist, double value, const PlantVector& s, const Counterfactual& incumbent) {
  if (dist != incumbent.distance) return dist < incumbent.distance;
  if (value != incumbent.predicted_growth) return value > incumbent.predicted_growth;
  return s < incumbent.suggestion;
}

bool already_optimal(const GrowthModel& model, const PlantVector& x, const CfeConfig& config,
                     double threshold) {
  return config.mode == CfeMode::MaxTarget && model.predict(x) >= threshold;
}

}  // namespace

TargetSet target_set(const GrowthModel& model, const PlantVector& x, const CfeConfig& config) {
  auto leaves = enumerate_leaves(model);
  TargetSet out;
  out.threshold = threshold_for(model, x, config, leaves);
  for (auto& l : leaves) {
    if (l.value >= out.threshold) out.leaves.push_back(std::move(l));
  }
  return out;
}

std::optional<BoxProjection> closest_integer_point_in_box(const PlantVector& x, const Box& box) {
  std::array<int, kNumPlants> leaves{};
  int distance = 0;
  for (int f = 0; f < kNumPlants; ++f) {
    const auto& iv = box[f];
    double lo_int = iv.lo_open ? std::floor(iv.lo) + 1.0 : std::ceil(iv.lo);
    double hi_int = iv.hi_open ? std::ceil(iv.hi) - 1.0 : std::floor(iv.hi);
    lo_int = std::max(lo_int, 0.0);
    hi_int = std::min(hi_int, static_cast<double>(kMaxLeaves));
    if (lo_int > hi_int) return std::nullopt;
    const int v = static_cast<int>(std::clamp(static_cast<double>(x[f]), lo_int, hi_int));
    leaves[f] = v;
    distance += std::abs(v - x[f]);
  }
  return BoxProjection{PlantVector(leaves), distance};
}

std::optional<Counterfactual> compute_cfe(const GrowthModel& model, const PlantVector& x,
                                          const CfeConfig& config) {
  const auto targets = target_set(model, x, config);
  if (targets.leaves.empty() || already_optimal(model, x, config, targets.threshold)) {
    return std::nullopt;
  }
  std::optional<Counterfactual> best;
  for (const auto& leaf : targets.leaves) {
    const auto proj = closest_integer_point_in_box(x, leaf.box);
    if (!proj || proj->point == x) continue;
    if (!best || better(proj->distance, leaf.value, proj->point, *best)) {
      best = Counterfactual{proj->point, leaf.value, proj->distance, x};
    }
  }
  return best;
}

std::optional<Counterfactual> brute_force_cfe(const GrowthModel& model, const PlantVector& x,
                                              const CfeConfig& config) {
  const auto threshold = target_set(model, x, config).threshold;
  if (already_optimal(model, x, config, threshold)) return std::nullopt;
  std::optional<Counterfactual> best;
  for (int idx = 0; idx < kGridPoints; ++idx) {
    const auto p = PlantVector::from_grid_index(idx);
    if (p == x) continue;
    const double g = model.predict(p);
    if (g < threshold) continue;
    const int d = l1_distance(p, x);
    if (!best || better(d, g, p, *best)) best = Counterfactual{p, g, d, x};
  }
  return best;
}

}  // namespace alienzoo
