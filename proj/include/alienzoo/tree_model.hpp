#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "alienzoo/data_gen.hpp"

namespace alienzoo {

/// Flat node storage; children are indices into GrowthModel::nodes(), root at 0.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean training label of the node
  std::size_t n_samples = 0;
};

struct ModelMetrics {
  double r_squared = 0.0;
  double mse = 0.0;
  bool r_squared_defined = true;  // false when the evaluation labels have zero variance
};

struct TreeOptions {
  int max_depth = 7;
  std::size_t min_samples_leaf = 5;
};

/// One interval per feature. Each bound is either closed or open.
struct Interval {
  double lo = 0.0;
  double hi = kMaxLeaves;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double x) const {
    return (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  }
};

using Box = std::array<Interval, kNumPlants>;

bool box_contains(const Box& box, const Point& x);

struct LeafBox {
  Box box;
  double value = 0.0;
  int node = -1;
};

class GrowthModel {
 public:
  GrowthModel(std::vector<TreeNode> nodes, int max_depth, Experiment experiment,
               ModelMetrics metrics = {});

  double predict(const Point& x) const;
  double predict(const PlantVector& p) const { return predict(p.as_point()); }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int max_depth() const { return max_depth_; }
  Experiment experiment() const { return experiment_; }
  const ModelMetrics& metrics() const { return metrics_; }
  void set_metrics(const ModelMetrics& m) { metrics_ = m; }

  /// Longest root-to-leaf path, in splits.
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
  int max_depth_;
  Experiment experiment_;
  ModelMetrics metrics_;
};

/// Greedy CART with weighted variance reduction. Candidate thresholds are midpoints of
/// consecutive distinct values; ties go to the lowest feature, then the lowest threshold.
GrowthModel fit_tree(const Dataset& train, const TreeOptions& options);

ModelMetrics evaluate(const GrowthModel& model, const Dataset& test);

/// Leaf boxes, clipped to the domain [0, 6]^5, in depth-first (left before right) order.
std::vector<LeafBox> enumerate_leaves(const GrowthModel& model);

/// JSON tree document: {max_depth, experiment, metrics, nodes: [...]}.
std::string serialize(const GrowthModel& model);
GrowthModel deserialize(const std::string& document);

GrowthModel load_model(const std::string& path);
void save_model(const GrowthModel& model, const std::string& path);

}  // namespace alienzoo
