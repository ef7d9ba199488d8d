#include "alienzoo/tree_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "alienzoo/errors.hpp"

namespace alienzoo {

using nlohmann::json;

bool box_contains(const Box& box, const Point& x) {
  for (int f = 0; f < kNumPlants; ++f) {
    if (!box[f].contains(x[f])) return false;
  }
  return true;
}

GrowthModel::GrowthModel(std::vector<TreeNode> nodes, int max_depth, Experiment experiment,
                         ModelMetrics metrics)
    : nodes_(std::move(nodes)), max_depth_(max_depth), experiment_(experiment), metrics_(metrics) {
  if (nodes_.empty()) throw ValidationError("model has no nodes");
  if (max_depth_ < 1) throw ValidationError("max_depth must be >= 1");
}

double GrowthModel::predict(const Point& x) const {
  int i = 0;
  while (!nodes_[i].is_leaf) {
    const auto& n = nodes_[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

int GrowthModel::depth() const {
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    if (nodes_[i].is_leaf) {
      deepest = std::max(deepest, d);
    } else {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return deepest;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sumL^2/nL + sumR^2/nR
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeOptions& options)
      : samples_(data.samples()), options_(options) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> idx(samples_.size());
    std::iota(idx.begin(), idx.end(), 0);
    grow(idx, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& idx, int depth) {
    const int self = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0, sumsq = 0.0;
    for (auto i : idx) {
      sum += samples_[i].growth;
      sumsq += samples_[i].growth * samples_[i].growth;
    }
    const double n = static_cast<double>(idx.size());
    nodes_[self].value = sum / n;
    nodes_[self].n_samples = idx.size();

    const double sse = sumsq - sum * sum / n;
    const bool pure = sse <= 1e-12 * std::max(1.0, sumsq);
    if (depth >= options_.max_depth || pure || idx.size() < 2 * options_.min_samples_leaf) {
      return self;
    }

    const auto split = best_split(idx, sum * sum / n);
    if (split.feature < 0) return self;

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx) {
      (samples_[i].point[split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    nodes_[self].is_leaf = false;
    nodes_[self].feature = split.feature;
    nodes_[self].threshold = split.threshold;
    const int left = grow(left_idx, depth + 1);
    const int right = grow(right_idx, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  SplitChoice best_split(const std::vector<std::size_t>& idx, double parent_score) const {
    SplitChoice best;
    best.score = parent_score;
    const std::size_t n = idx.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, options_.min_samples_leaf);
    std::vector<std::pair<double, double>> column(n);  // (feature value, label)

    double total = 0.0;
    for (auto i : idx) total += samples_[i].growth;

    for (int f = 0; f < kNumPlants; ++f) {
      for (std::size_t k = 0; k < n; ++k) {
        column[k] = {samples_[idx[k]].point[f], samples_[idx[k]].growth};
      }
      std::sort(column.begin(), column.end());
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += column[k].second;
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(nr);
        // Strictly better (beyond rounding) keeps the lowest feature and threshold on ties.
        if (score > best.score + 1e-10 * std::max(1.0, std::abs(best.score))) {
          best.feature = f;
          best.threshold = 0.5 * (column[k].first + column[k + 1].first);
          best.score = score;
        }
      }
    }
    return best;
  }

  const std::vector<GrowthSample>& samples_;
  TreeOptions options_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

GrowthModel fit_tree(const Dataset& train, const TreeOptions& options) {
  if (options.max_depth < 1) throw ValidationError("max_depth must be >= 1", {"max_depth"});
  TreeBuilder builder(train, options);
  return GrowthModel(builder.build(), options.max_depth, train.experiment());
}

ModelMetrics evaluate(const GrowthModel& model, const Dataset& test) {
  const auto& samples = test.samples();
  double mean = 0.0;
  for (const auto& s : samples) mean += s.growth;
  mean /= static_cast<double>(samples.size());

  double sse = 0.0, sst = 0.0;
  for (const auto& s : samples) {
    const double e = s.growth - model.predict(s.point);
    sse += e * e;
    sst += (s.growth - mean) * (s.growth - mean);
  }
  ModelMetrics m;
  m.mse = sse / static_cast<double>(samples.size());
  if (sst <= 0.0) {
    m.r_squared_defined = false;
    m.r_squared = std::nan("");
  } else {
    m.r_squared = 1.0 - sse / sst;
  }
  return m;
}

std::vector<LeafBox> enumerate_leaves(const GrowthModel& model) {
  std::vector<LeafBox> out;
  const auto& nodes = model.nodes();
  std::vector<std::pair<int, Box>> stack{{0, Box{}}};
  while (!stack.empty()) {
    auto [i, box] = stack.back();
    stack.pop_back();
    const auto& node = nodes[i];
    if (node.is_leaf) {
      out.push_back({box, node.value, i});
      continue;
    }
    Box left = box, right = box;
    const double t = node.threshold;
    auto& li = left[node.feature];
    auto& ri = right[node.feature];
    if (t < li.hi) {
      li.hi = t;
      li.hi_open = false;
    }
    if (t >= ri.lo) {
      ri.lo = t;
      ri.lo_open = true;
    }
    // Right pushed first so the left subtree is emitted first.
    stack.emplace_back(node.right, right);
    stack.emplace_back(node.left, left);
  }
  return out;
}

std::string serialize(const GrowthModel& model) {
  json nodes = json::array();
  for (const auto& n : model.nodes()) {
    json j;
    if (n.is_leaf) {
      j = {{"kind", "leaf"}, {"value", n.value}, {"n", n.n_samples}};
    } else {
      j = {{"kind", "split"}, {"feature", n.feature}, {"threshold", n.threshold},
           {"left", n.left},  {"right", n.right},     {"value", n.value},
           {"n", n.n_samples}};
    }
    nodes.push_back(std::move(j));
  }
  json doc = {{"max_depth", model.max_depth()},
              {"experiment", static_cast<int>(model.experiment())},
              {"nodes", std::move(nodes)}};
  const auto& m = model.metrics();
  doc["metrics"] = {{"mse", m.mse},
                    {"r_squared", m.r_squared_defined ? json(m.r_squared) : json(nullptr)}};
  return doc.dump(1);
}

namespace {

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

GrowthModel deserialize(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("tree document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("tree document must be a JSON object");
  const int max_depth = required<int>(doc, "max_depth", "tree");
  if (max_depth < 1) throw ParseError("tree: max_depth must be >= 1");
  Experiment experiment;
  try {
    experiment = experiment_from_int(required<int>(doc, "experiment", "tree"));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("tree: ") + e.what());
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw ParseError("tree: 'nodes' must be a nonempty array");
  }

  const auto& jnodes = doc["nodes"];
  const int count = static_cast<int>(jnodes.size());
  std::vector<TreeNode> nodes(count);
  std::vector<int> parents(count, 0);
  for (int i = 0; i < count; ++i) {
    const auto& j = jnodes[i];
    const std::string where = "tree node " + std::to_string(i);
    if (!j.is_object()) throw ParseError(where + ": must be an object");
    const auto kind = required<std::string>(j, "kind", where);
    auto& n = nodes[i];
    n.value = required<double>(j, "value", where);
    n.n_samples = required<std::size_t>(j, "n", where);
    if (kind == "leaf") {
      n.is_leaf = true;
    } else if (kind == "split") {
      n.is_leaf = false;
      n.feature = required<int>(j, "feature", where);
      n.threshold = required<double>(j, "threshold", where);
      n.left = required<int>(j, "left", where);
      n.right = required<int>(j, "right", where);
      if (n.feature < 0 || n.feature >= kNumPlants) {
        throw ParseError(where + ": feature " + std::to_string(n.feature) + " out of range 0..4");
      }
      if (!std::isfinite(n.threshold)) throw ParseError(where + ": threshold must be finite");
      for (int child : {n.left, n.right}) {
        if (child < 0 || child >= count) {
          throw ParseError(where + ": child index " + std::to_string(child) + " out of range");
        }
        if (child == 0) throw ParseError(where + ": the root cannot be a child");
        if (++parents[child] > 1) {
          throw ParseError("tree node " + std::to_string(child) + " has more than one parent");
        }
      }
    } else {
      throw ParseError(where + ": unknown kind '" + kind + "'");
    }
  }
  // Every node must hang off the root exactly once.
  std::vector<bool> seen(count, false);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int reached = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    seen[i] = true;
    ++reached;
    if (d > max_depth) throw ParseError("tree: a path exceeds max_depth");
    if (!nodes[i].is_leaf) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  if (reached != count) throw ParseError("tree: some nodes are unreachable from the root");

  ModelMetrics metrics;
  if (doc.contains("metrics") && doc["metrics"].is_object()) {
    const auto& m = doc["metrics"];
    metrics.mse = m.value("mse", 0.0);
    if (m.contains("r_squared") && m["r_squared"].is_number()) {
      metrics.r_squared = m["r_squared"].get<double>();
    } else {
      metrics.r_squared_defined = false;
      metrics.r_squared = std::nan("");
    }
  }
  return GrowthModel(std::move(nodes), max_depth, experiment, metrics);
}

GrowthModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

void save_model(const GrowthModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path);
  out << serialize(model) << '\n';
}

}  // namespace alienzoo
