#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "alienzoo/plants.hpp"

namespace alienzoo {

using Point = std::array<double, kNumPlants>;

struct GrowthSample {
  Point point{};
  double growth = kMinGrowth;
};

enum class Provenance { Grid, Balanced, Train, Test };

/// Immutable after construction; the constructor enforces nonemptiness and the growth range.
class Dataset {
 public:
  Dataset(std::vector<GrowthSample> samples, Experiment experiment, Provenance provenance);

  const std::vector<GrowthSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  Experiment experiment() const { return experiment_; }
  Provenance provenance() const { return provenance_; }

 private:
  std::vector<GrowthSample> samples_;
  Experiment experiment_;
  Provenance provenance_;
};

/// Ground-truth growth rate. Plant 2 scales growth linearly over 1..5 inside the
/// qualifying region (plant 4 in {1,2}, and for Exp1 also plant 5 >= 4); 0.1 elsewhere.
double growth_truth(Experiment experiment, const PlantVector& p);

/// Every point of {0..6}^5 repeated `replicates` times, in grid-index order.
Dataset generate_grid(Experiment experiment, int replicates);

struct SmoteOptions {
  int n_bins = 10;
  int k = 5;
  std::uint64_t seed = 0;
};

/// Label bin of `growth` among `n_bins` equal-width bins over [0.1, 1.9].
int growth_bin(double growth, int n_bins);

/// Label-binned SMOTE: every nonempty bin is oversampled up to the majority-bin count.
/// Originals come first (input order), then synthetic samples bin by bin.
/// Neighbour search runs over the distinct coordinate vectors of a bin, so replicated
/// grid points never pair with their own copies.
Dataset smote_balance(const Dataset& dataset, const SmoteOptions& options);

/// Seeded shuffle, then the first round(test_fraction * N) samples form the test set.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed);

void write_csv(std::ostream& out, const Dataset& dataset);
Dataset read_csv(std::istream& in, Experiment experiment, Provenance provenance);

}  // namespace alienzoo
