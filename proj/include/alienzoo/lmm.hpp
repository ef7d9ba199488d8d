#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace alienzoo {

/// One observation of the long-format table.
struct LongRow {
  std::string subject;
  std::string group;
  int trial = 0;
  double y = 0.0;
};

/// Treatment-coded design: intercept, group, trial (categorical), group x trial.
/// Reference levels are the lexicographically first group and the lowest trial.
struct LmmDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> terms;
  std::vector<int> subject;  // subject index per row
  int n_subjects = 0;
};

/// Builds the design; throws ValidationError if a group has fewer than 2 subjects.
LmmDesign build_lmm_design(const std::vector<LongRow>& rows);

struct LmmFit {
  std::map<std::string, double> fixed_effects;
  double sigma2_subject = 0.0;
  double sigma2_residual = 0.0;
  double variance_ratio = 0.0;  // sigma2_subject / sigma2_residual
  double reml_loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Random-intercept model by profiled REML: golden-section search over log variance ratio
/// in [-10, 10], converged once the bracket is narrower than 1e-6. Throws ValidationError
/// naming the collinear terms when the design is rank deficient.
LmmFit fit_lmm_random_intercept(const std::vector<LongRow>& rows);

/// Closed-form GLS fit with the variance ratio held fixed (0 gives ordinary least squares).
LmmFit fit_lmm_at_ratio(const std::vector<LongRow>& rows, double variance_ratio);

/// Profiled REML log-likelihood at a fixed variance ratio.
double reml_loglik_at(const std::vector<LongRow>& rows, double variance_ratio);

}  // namespace alienzoo
