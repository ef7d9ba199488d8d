#include "alienzoo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "alienzoo/errors.hpp"

namespace alienzoo {

std::string to_string(StatisticKind k) { return k == StatisticKind::U ? "U" : "t"; }
std::string to_string(EffectKind k) {
  return k == EffectKind::RankBiserialR ? "rank_biserial_r" : "cohens_d";
}
std::string to_string(TestMethod m) {
  switch (m) {
    case TestMethod::Exact: return "exact";
    case TestMethod::NormalApprox: return "normal_approx";
    case TestMethod::Welch: return "welch";
  }
  return "?";
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

constexpr int kExactMaxN = 20;

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

struct Ranked {
  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum over tie groups of t^3 - t
};

Ranked rank_samples(std::span<const double> a, std::span<const double> b) {
  std::vector<std::pair<double, bool>> pooled;  // (value, from a)
  pooled.reserve(a.size() + b.size());
  for (double v : a) pooled.emplace_back(v, true);
  for (double v : b) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  Ranked r;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1) r.tie_term += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) {
      if (pooled[k].second) r.rank_sum_a += midrank;
    }
    i = j + 1;
  }
  return r;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

double mann_whitney_exact_p(double u_min, int n_a, int n_b) {
  // counts[j][u]: arrangements of j "a" items among the first i pooled ranks with U = u,
  // built up one rank at a time.
  const int max_u = n_a * n_b;
  std::vector<std::vector<double>> counts(n_a + 1, std::vector<double>(max_u + 1, 0.0));
  counts[0][0] = 1.0;
  for (int i = 1; i <= n_a + n_b; ++i) {
    // Rank i joins as a "b" (U unchanged) or as the j-th "a", which is beaten by the
    // (i - j) b-items already placed.
    for (int j = std::min(i, n_a); j >= 1; --j) {
      const int b_before = i - j;
      if (b_before > n_b) continue;
      for (int u = max_u; u >= b_before; --u) counts[j][u] += counts[j - 1][u - b_before];
    }
  }
  const auto& dist = counts[n_a];
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  const auto cut = static_cast<int>(std::floor(u_min + 1e-9));
  double lower = 0.0;
  for (int u = 0; u <= std::min(cut, max_u); ++u) lower += dist[u];
  return std::min(1.0, 2.0 * lower / total);
}

double mann_whitney_normal_p(double u, int n_a, int n_b, double tie_term) {
  const double na = n_a, nb = n_b, n = na + nb;
  const double mean = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw ValidationError("Mann-Whitney U needs at least one observation per group");
  }
  const auto na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  const auto ranked = rank_samples(a, b);
  const double u_a = ranked.rank_sum_a - na * (na + 1.0) / 2.0;
  const double u_b = static_cast<double>(na) * nb - u_a;
  const double u = std::min(u_a, u_b);

  TestResult r;
  r.statistic = u;
  r.statistic_kind = StatisticKind::U;
  r.effect_kind = EffectKind::RankBiserialR;
  r.effect_size = std::abs(1.0 - 2.0 * u / (static_cast<double>(na) * nb));
  if (na + nb <= kExactMaxN && ranked.tie_term == 0.0) {
    r.method = TestMethod::Exact;
    r.p_value = mann_whitney_exact_p(u, na, nb);
  } else {
    r.method = TestMethod::NormalApprox;
    r.p_value = mann_whitney_normal_p(u, na, nb, ranked.tie_term);
  }
  return r;
}

Descriptives describe(std::span<const double> x) {
  Descriptives d;
  d.n = x.size();
  if (x.empty()) {
    d.mean = d.sd = d.sem = std::nan("");
    return d;
  }
  d.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  if (x.size() < 2) {
    d.sd = d.sem = std::nan("");
    return d;
  }
  double ss = 0.0;
  for (double v : x) ss += (v - d.mean) * (v - d.mean);
  d.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  d.sem = d.sd / std::sqrt(static_cast<double>(x.size()));
  return d;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("Welch t-test needs at least two observations per group");
  }
  const auto da = describe(a), db = describe(b);
  const double va = da.sd * da.sd, vb = db.sd * db.sd;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  if (va == 0.0 && vb == 0.0) {
    throw ValidationError("Welch t-test is undefined when both samples have zero variance");
  }
  const double se2 = va / na + vb / nb;
  TestResult r;
  r.statistic_kind = StatisticKind::T;
  r.method = TestMethod::Welch;
  r.effect_kind = EffectKind::CohensD;
  r.statistic = (da.mean - db.mean) / std::sqrt(se2);
  r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  r.p_value = std::min(1.0, 2.0 * student_t_cdf(-std::abs(r.statistic), r.df));
  const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  r.effect_size = (da.mean - db.mean) / pooled;
  return r;
}

}  // namespace alienzoo
