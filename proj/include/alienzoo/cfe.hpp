#pragma once

#include <optional>
#include <vector>

#include "alienzoo/tree_model.hpp"

namespace alienzoo {

enum class CfeMode { MaxTarget, StrictImprove };

struct CfeConfig {
  CfeMode mode = CfeMode::MaxTarget;
  double epsilon = 0.05;        // MaxTarget: accept leaves within epsilon of the best leaf
  double delta_improve = 0.09;  // StrictImprove: required gain over the current prediction

  /// Throws ValidationError unless 0 <= epsilon < 1.8 and delta_improve > 0.
  void validate() const;
};

struct Counterfactual {
  PlantVector suggestion;
  double predicted_growth = 0.0;
  int distance = 0;  // L1 in leaf counts
  PlantVector factual;

  friend bool operator==(const Counterfactual&, const Counterfactual&) = default;
};

struct TargetSet {
  double threshold = 0.0;
  std::vector<LeafBox> leaves;  // every leaf with value >= threshold
};

TargetSet target_set(const GrowthModel& model, const PlantVector& x, const CfeConfig& config);

struct BoxProjection {
  PlantVector point;
  int distance = 0;
};

/// Nearest integer point of box ∩ [0,6]^5 to x under L1; nullopt if some side holds no integer.
std::optional<BoxProjection> closest_integer_point_in_box(const PlantVector& x, const Box& box);

/// Leaf-enumeration search. Minimal L1 distance, then higher leaf value, then the
/// lexicographically smallest suggestion.
std::optional<Counterfactual> compute_cfe(const GrowthModel& model, const PlantVector& x,
                                          const CfeConfig& config);

/// Same contract as compute_cfe, by scanning every point of {0..6}^5.
std::optional<Counterfactual> brute_force_cfe(const GrowthModel& model, const PlantVector& x,
                                              const CfeConfig& config);

}  // namespace alienzoo
