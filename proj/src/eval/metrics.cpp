#include <cmath>
#include <limits>

#include "socialgat/errors.hpp"
#include "socialgat/eval.hpp"

namespace socialgat::eval {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {
  if (classes < 2) throw ParameterError("confusion matrix needs at least 2 classes");
}

ConfusionMatrix ConfusionMatrix::from_pairs(std::size_t classes, std::span<const std::size_t> gold,
                                            std::span<const std::size_t> predicted) {
  if (gold.size() != predicted.size()) {
    throw ShapeError(std::to_string(gold.size()) + " gold labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], predicted[i]);
  return cm;
}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::size_t count) {
  if (gold >= n_ || predicted >= n_) {
    throw IndexError("class index out of range for " + std::to_string(n_) + " classes");
  }
  counts_[gold * n_ + predicted] += count;
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (std::size_t c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::support(std::size_t cls) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(cls, j);
  return s;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void require_classes(const ConfusionMatrix& cm, std::size_t n, const char* metric) {
  if (cm.classes() != n) {
    throw ShapeError(std::string(metric) + " needs a " + std::to_string(n) + "x" +
                     std::to_string(n) + " confusion matrix, got " + std::to_string(cm.classes()) +
                     "x" + std::to_string(cm.classes()));
  }
}

}  // namespace

double f1_from(double precision, double recall) {
  return ratio(2.0 * precision * recall, precision + recall);
}

Prf precision_recall_f1(const ConfusionMatrix& cm, std::size_t cls) {
  if (cls >= cm.classes()) throw IndexError("class " + std::to_string(cls) + " out of range");
  double tp = static_cast<double>(cm.at(cls, cls));
  double predicted = 0.0, gold = 0.0;
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    predicted += static_cast<double>(cm.at(k, cls));
    gold += static_cast<double>(cm.at(cls, k));
  }
  Prf r;
  r.precision = ratio(tp, predicted);
  r.recall = ratio(tp, gold);
  r.f1 = f1_from(r.precision, r.recall);
  return r;
}

double avg_rec(double r_pos, double r_neg, double r_neu) { return (r_pos + r_neg + r_neu) / 3.0; }

double avg_rec(const ConfusionMatrix& cm) {
  require_classes(cm, 3, "avg_rec");
  return avg_rec(precision_recall_f1(cm, 0).recall, precision_recall_f1(cm, 1).recall,
                 precision_recall_f1(cm, 2).recall);
}

double f_avg(double f_favor, double f_against) { return (f_favor + f_against) / 2.0; }

double f_avg(const ConfusionMatrix& cm) {
  require_classes(cm, 3, "f_avg");
  return f_avg(precision_recall_f1(cm, 0).f1, precision_recall_f1(cm, 1).f1);
}

double f1_hateful(const ConfusionMatrix& cm) {
  require_classes(cm, 2, "f1_hateful");
  return precision_recall_f1(cm, 1).f1;
}

double task_metric(text::Task task, const ConfusionMatrix& cm) {
  switch (task) {
    case text::Task::kSentiment: return avg_rec(cm);
    case text::Task::kStance: return f_avg(cm);
    case text::Task::kHate: return f1_hateful(cm);
  }
  return 0.0;
}

const char* task_metric_name(text::Task task) {
  switch (task) {
    case text::Task::kSentiment: return "avg_rec";
    case text::Task::kStance: return "f_avg";
    case text::Task::kHate: return "f1_hateful";
  }
  return "?";
}

MetricReport report(text::Task task, const ConfusionMatrix& cm) {
  MetricReport r;
  r.task = task;
  r.metric = task_metric(task, cm);
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    r.per_class.push_back(precision_recall_f1(cm, c));
    r.support.push_back(cm.support(c));
  }
  return r;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw StatisticError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw StatisticError("sample standard deviation needs at least 2 values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
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
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw ParameterError("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::min(1.0, std::max(0.0, incomplete_beta(df / 2.0, 0.5, x)));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw StatisticError("Welch's t test needs at least 2 values per sample");
  }
  const double ma = mean(a), mb = mean(b);
  const double sa = sample_std(a), sb = sample_std(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = sa * sa / na, vb = sb * sb / nb;
  WelchResult r;
  if (va + vb == 0.0) {
    if (ma == mb) {
      r.t = 0.0;
      r.df = na + nb - 2.0;
      r.p = 1.0;
      return r;
    }
    throw StatisticError("Welch's t test is undefined for two constant samples with different means");
  }
  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace socialgat::eval
