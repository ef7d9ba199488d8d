#pragma once

#include <span>
#include <string>

namespace alienzoo {

enum class StatisticKind { U, T };
enum class EffectKind { RankBiserialR, CohensD };
enum class TestMethod { Exact, NormalApprox, Welch };

std::string to_string(StatisticKind k);
std::string to_string(EffectKind k);
std::string to_string(TestMethod m);

struct TestResult {
  double statistic = 0.0;
  StatisticKind statistic_kind = StatisticKind::U;
  double p_value = 1.0;
  double effect_size = 0.0;
  EffectKind effect_kind = EffectKind::RankBiserialR;
  TestMethod method = TestMethod::Exact;
  double df = 0.0;  // Welch-Satterthwaite; 0 for rank tests
};

/// Two-sided Wilcoxon-Mann-Whitney. U = min(U_a, U_b) with midranks. Exact null distribution
/// when n_a + n_b <= 20 without ties, otherwise normal approximation with tie and continuity
/// correction. Effect size is |rank-biserial r| = 1 - 2U / (n_a n_b).
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Exact two-sided p-value for U_min under the no-ties null (dynamic programming).
double mann_whitney_exact_p(double u_min, int n_a, int n_b);
/// Normal-approximation p-value with tie correction (`tie_term` = sum of t^3 - t).
double mann_whitney_normal_p(double u, int n_a, int n_b, double tie_term);

/// Welch two-sample t-test; effect size is Cohen's d with the pooled SD.
TestResult welch_t(std::span<const double> a, std::span<const double> b);

double normal_cdf(double z);
/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

struct Descriptives {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;   // NaN for n < 2
  double sem = 0.0;  // NaN for n < 2
};

Descriptives describe(std::span<const double> x);

}  // namespace alienzoo
