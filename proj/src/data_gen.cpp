#include "alienzoo/data_gen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "alienzoo/csv.hpp"
#include "alienzoo/errors.hpp"

namespace alienzoo {

namespace {

constexpr double kGrowthSlack = 1e-9;

bool valid_growth(double g) {
  return std::isfinite(g) && g >= kMinGrowth - kGrowthSlack && g <= kMaxGrowth + kGrowthSlack;
}

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < kNumPlants; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

Dataset::Dataset(std::vector<GrowthSample> samples, Experiment experiment, Provenance provenance)
    : samples_(std::move(samples)), experiment_(experiment), provenance_(provenance) {
  if (samples_.empty()) throw ValidationError("dataset must not be empty");
  for (const auto& s : samples_) {
    if (!valid_growth(s.growth)) {
      throw ValidationError("growth " + std::to_string(s.growth) + " outside [0.1, 1.9]");
    }
  }
}

double growth_truth(Experiment experiment, const PlantVector& p) {
  const int p2 = p[1], p4 = p[3], p5 = p[4];
  bool qualifies = (p4 == 1 || p4 == 2) && p2 >= 1 && p2 <= 5;
  if (experiment == Experiment::Exp1) qualifies = qualifies && p5 >= 4;
  return qualifies ? 1.0 + 0.18 * p2 : kMinGrowth;
}

Dataset generate_grid(Experiment experiment, int replicates) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1", {"replicates"});
  std::vector<GrowthSample> samples;
  samples.reserve(static_cast<std::size_t>(kGridPoints) * replicates);
  for (int idx = 0; idx < kGridPoints; ++idx) {
    const auto p = PlantVector::from_grid_index(idx);
    const GrowthSample s{p.as_point(), growth_truth(experiment, p)};
    for (int r = 0; r < replicates; ++r) samples.push_back(s);
  }
  return Dataset(std::move(samples), experiment, Provenance::Grid);
}

int growth_bin(double growth, int n_bins) {
  const double width = (kMaxGrowth - kMinGrowth) / n_bins;
  // Bin edges coincide with the decided growth levels, so nudge before flooring.
  const int bin = static_cast<int>(std::floor((growth - kMinGrowth) / width + 1e-9));
  return std::clamp(bin, 0, n_bins - 1);
}

Dataset smote_balance(const Dataset& dataset, const SmoteOptions& options) {
  if (options.n_bins < 1) throw ValidationError("n_bins must be >= 1", {"n_bins"});
  if (options.k < 1) throw ValidationError("k must be >= 1", {"k"});

  const auto& samples = dataset.samples();
  std::vector<std::vector<std::size_t>> bins(options.n_bins);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    bins[growth_bin(samples[i].growth, options.n_bins)].push_back(i);
  }
  std::size_t majority = 0;
  for (const auto& b : bins) majority = std::max(majority, b.size());

  std::vector<GrowthSample> out(samples.begin(), samples.end());
  out.reserve(majority * std::count_if(bins.begin(), bins.end(),
                                       [](const auto& b) { return !b.empty(); }));
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int b = 0; b < options.n_bins; ++b) {
    const auto& members = bins[b];
    if (members.empty() || members.size() == majority) continue;

    // Distinct coordinates of this bin, each with the labels of its copies.
    std::map<Point, std::vector<double>> by_point;
    for (auto i : members) by_point[samples[i].point].push_back(samples[i].growth);
    std::vector<Point> distinct;
    distinct.reserve(by_point.size());
    for (const auto& [pt, labels] : by_point) distinct.push_back(pt);

    if (distinct.size() < 2) {
      throw ValidationError("label bin " + std::to_string(b) + " has " +
                            std::to_string(distinct.size()) +
                            " distinct point(s); SMOTE needs at least 2 to interpolate");
    }
    const std::size_t k = std::min<std::size_t>(options.k, distinct.size() - 1);

    // k nearest distinct neighbours per distinct point (ties by index order).
    std::vector<std::vector<std::size_t>> neighbours(distinct.size());
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      cand.clear();
      for (std::size_t j = 0; j < distinct.size(); ++j) {
        if (j != i) cand.emplace_back(squared_distance(distinct[i], distinct[j]), j);
      }
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
      for (std::size_t n = 0; n < k; ++n) neighbours[i].push_back(cand[n].second);
    }

    std::map<Point, std::size_t> distinct_index;
    for (std::size_t i = 0; i < distinct.size(); ++i) distinct_index[distinct[i]] = i;

    std::uniform_int_distribution<std::size_t> pick_member(0, members.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neighbour(0, k - 1);
    for (std::size_t n = members.size(); n < majority; ++n) {
      const auto& base = samples[members[pick_member(rng)]];
      const auto di = distinct_index.at(base.point);
      const auto nn = neighbours[di][pick_neighbour(rng)];
      const auto& nn_labels = by_point.at(distinct[nn]);
      const double nn_label = nn_labels[0];
      const double lambda = unit(rng);
      GrowthSample synth;
      for (int f = 0; f < kNumPlants; ++f) {
        synth.point[f] = base.point[f] + lambda * (distinct[nn][f] - base.point[f]);
      }
      synth.growth = base.growth + lambda * (nn_label - base.growth);
      out.push_back(synth);
    }
  }
  return Dataset(std::move(out), dataset.experiment(), Provenance::Balanced);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)", {"test_fraction"});
  }
  const std::size_t n = dataset.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n) {
    throw ValidationError("test_fraction " + std::to_string(test_fraction) + " on " +
                          std::to_string(n) + " samples leaves an empty split");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<GrowthSample> test, train;
  test.reserve(n_test);
  train.reserve(n - n_test);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_test ? test : train).push_back(dataset.samples()[order[i]]);
  }
  return {Dataset(std::move(train), dataset.experiment(), Provenance::Train),
          Dataset(std::move(test), dataset.experiment(), Provenance::Test)};
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  CsvWriter w(out);
  w.row({"p1", "p2", "p3", "p4", "p5", "growth"});
  for (const auto& s : dataset.samples()) {
    std::vector<std::string> cells;
    for (double v : s.point) cells.push_back(format_double(v));
    cells.push_back(format_double(s.growth));
    w.row(cells);
  }
}

Dataset read_csv(std::istream& in, Experiment experiment, Provenance provenance) {
  const auto table = read_csv_table(in);
  const std::vector<std::string> expected{"p1", "p2", "p3", "p4", "p5", "growth"};
  if (table.header != expected) {
    throw ParseError("dataset CSV header must be p1,p2,p3,p4,p5,growth");
  }
  std::vector<GrowthSample> samples;
  samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    GrowthSample s;
    for (int f = 0; f < kNumPlants; ++f) s.point[f] = parse_double(table.rows[r][f]);
    s.growth = parse_double(table.rows[r][kNumPlants]);
    samples.push_back(s);
  }
  return Dataset(std::move(samples), experiment, provenance);
}

}  // namespace alienzoo
