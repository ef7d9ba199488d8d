#include "alienzoo/lmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "alienzoo/errors.hpp"

namespace alienzoo {

LmmDesign build_lmm_design(const std::vector<LongRow>& rows) {
  if (rows.empty()) throw ValidationError("mixed model needs data");
  std::set<std::string> groups;
  std::set<int> trials;
  std::map<std::string, int> subjects;
  std::map<std::string, std::set<std::string>> subjects_by_group;
  for (const auto& r : rows) {
    groups.insert(r.group);
    trials.insert(r.trial);
    subjects.emplace(r.subject, static_cast<int>(subjects.size()));
    subjects_by_group[r.group].insert(r.subject);
  }
  for (const auto& [g, subs] : subjects_by_group) {
    if (subs.size() < 2) {
      throw ValidationError("group '" + g + "' has fewer than 2 subjects", {"group"});
    }
  }

  const std::vector<std::string> group_levels(groups.begin(), groups.end());
  const std::vector<int> trial_levels(trials.begin(), trials.end());
  LmmDesign d;
  d.terms.emplace_back("(Intercept)");
  for (std::size_t g = 1; g < group_levels.size(); ++g) {
    d.terms.push_back("group[" + group_levels[g] + "]");
  }
  for (std::size_t t = 1; t < trial_levels.size(); ++t) {
    d.terms.push_back("trial[" + std::to_string(trial_levels[t]) + "]");
  }
  for (std::size_t g = 1; g < group_levels.size(); ++g) {
    for (std::size_t t = 1; t < trial_levels.size(); ++t) {
      d.terms.push_back("group[" + group_levels[g] + "]:trial[" + std::to_string(trial_levels[t]) +
                        "]");
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(d.terms.size());
  const auto n_g = static_cast<Eigen::Index>(group_levels.size());
  const auto n_t = static_cast<Eigen::Index>(trial_levels.size());
  d.x = Eigen::MatrixXd::Zero(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[i];
    const auto g = std::distance(group_levels.begin(),
                                 std::find(group_levels.begin(), group_levels.end(), r.group));
    const auto t = std::distance(trial_levels.begin(),
                                 std::find(trial_levels.begin(), trial_levels.end(), r.trial));
    d.x(i, 0) = 1.0;
    if (g > 0) d.x(i, g) = 1.0;
    if (t > 0) d.x(i, (n_g - 1) + t) = 1.0;
    if (g > 0 && t > 0) d.x(i, (n_g - 1) + (n_t - 1) + (g - 1) * (n_t - 1) + t) = 1.0;
    d.y(i) = r.y;
    d.subject.push_back(subjects.at(r.subject));
  }
  d.n_subjects = static_cast<int>(subjects.size());
  return d;
}

namespace {

void check_rank(const LmmDesign& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  if (qr.rank() == d.x.cols()) return;
  // Name each column that adds nothing to the span of the columns before it.
  std::vector<std::string> collinear;
  Eigen::MatrixXd kept(d.x.rows(), 0);
  for (Eigen::Index c = 0; c < d.x.cols(); ++c) {
    Eigen::MatrixXd trial(d.x.rows(), kept.cols() + 1);
    trial << kept, d.x.col(c);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q(trial);
    if (q.rank() == trial.cols()) {
      kept = std::move(trial);
    } else {
      collinear.push_back(d.terms[c]);
    }
  }
  std::string msg = "singular mixed-model design; collinear terms:";
  for (const auto& t : collinear) msg += " " + t;
  throw ValidationError(msg, collinear);
}

/// Per-subject sufficient statistics, so each REML evaluation costs O(subjects * p^2).
class ProfiledReml {
 public:
  explicit ProfiledReml(const LmmDesign& d) : p_(d.x.cols()), n_(d.x.rows()) {
    const auto m = d.n_subjects;
    xtx_.assign(m, Eigen::MatrixXd::Zero(p_, p_));
    xt1_.assign(m, Eigen::VectorXd::Zero(p_));
    xty_.assign(m, Eigen::VectorXd::Zero(p_));
    sum_y_.assign(m, 0.0);
    yty_.assign(m, 0.0);
    count_.assign(m, 0.0);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const int s = d.subject[i];
      const Eigen::VectorXd xi = d.x.row(i).transpose();
      xtx_[s] += xi * xi.transpose();
      xt1_[s] += xi;
      xty_[s] += xi * d.y(i);
      sum_y_[s] += d.y(i);
      yty_[s] += d.y(i) * d.y(i);
      count_[s] += 1.0;
    }
  }

  struct Result {
    Eigen::VectorXd beta;
    double sigma2 = 0.0;
    double loglik = 0.0;
  };

  Result evaluate(double lambda) const {
    // V_i^{-1} = I - c_i 11', c_i = lambda / (1 + lambda n_i); log|V_i| = log(1 + lambda n_i).
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p_, p_);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p_);
    double yvy = 0.0, logdet_v = 0.0;
    for (std::size_t s = 0; s < xtx_.size(); ++s) {
      const double c = lambda / (1.0 + lambda * count_[s]);
      a += xtx_[s] - c * xt1_[s] * xt1_[s].transpose();
      b += xty_[s] - c * xt1_[s] * sum_y_[s];
      yvy += yty_[s] - c * sum_y_[s] * sum_y_[s];
      logdet_v += std::log1p(lambda * count_[s]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    Result r;
    r.beta = llt.solve(b);
    const double dof = static_cast<double>(n_ - p_);
    const double rss = std::max(yvy - r.beta.dot(b), 0.0);
    r.sigma2 = rss / dof;
    const Eigen::MatrixXd l = llt.matrixL();
    double logdet_a = 0.0;
    for (Eigen::Index i = 0; i < p_; ++i) logdet_a += 2.0 * std::log(l(i, i));
    r.loglik = -0.5 * (dof * (std::log(2.0 * std::numbers::pi * r.sigma2) + 1.0) + logdet_v +
                       logdet_a);
    return r;
  }

 private:
  Eigen::Index p_, n_;
  std::vector<Eigen::MatrixXd> xtx_;
  std::vector<Eigen::VectorXd> xt1_, xty_;
  std::vector<double> sum_y_, yty_, count_;
};

LmmFit make_fit(const LmmDesign& d, const ProfiledReml::Result& r, double lambda) {
  LmmFit fit;
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    fit.fixed_effects[d.terms[i]] = r.beta(static_cast<Eigen::Index>(i));
  }
  fit.sigma2_residual = r.sigma2;
  fit.sigma2_subject = lambda * r.sigma2;
  fit.variance_ratio = lambda;
  fit.reml_loglik = r.loglik;
  return fit;
}

LmmDesign checked_design(const std::vector<LongRow>& rows) {
  auto d = build_lmm_design(rows);
  if (d.x.rows() <= d.x.cols()) {
    throw ValidationError("mixed model needs more observations than fixed-effect terms");
  }
  check_rank(d);
  return d;
}

}  // namespace

LmmFit fit_lmm_at_ratio(const std::vector<LongRow>& rows, double variance_ratio) {
  if (!(variance_ratio >= 0.0)) throw ValidationError("variance ratio must be >= 0");
  const auto d = checked_design(rows);
  ProfiledReml reml(d);
  auto fit = make_fit(d, reml.evaluate(variance_ratio), variance_ratio);
  fit.converged = true;
  return fit;
}

double reml_loglik_at(const std::vector<LongRow>& rows, double variance_ratio) {
  const auto d = checked_design(rows);
  return ProfiledReml(d).evaluate(variance_ratio).loglik;
}

LmmFit fit_lmm_random_intercept(const std::vector<LongRow>& rows) {
  const auto d = checked_design(rows);
  ProfiledReml reml(d);
  auto objective = [&](double log_ratio) { return reml.evaluate(std::exp(log_ratio)).loglik; };

  constexpr double kLo = -10.0, kHi = 10.0, kTol = 1e-6;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kLo, hi = kHi;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  int iterations = 0;
  while (hi - lo >= kTol && iterations < 200) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
    ++iterations;
  }
  double best = 0.5 * (lo + hi);
  double best_f = objective(best);
  // The optimum may sit on the bracket boundary (e.g. no subject variance).
  for (double edge : {kLo, kHi}) {
    const double f = objective(edge);
    if (f > best_f) {
      best = edge;
      best_f = f;
    }
  }
  const double lambda = std::exp(best);
  auto fit = make_fit(d, reml.evaluate(lambda), lambda);
  fit.converged = hi - lo < kTol;
  fit.iterations = iterations;
  return fit;
}

}  // namespace alienzoo
