#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "socialgat/text.hpp"

namespace socialgat::eval {

/// o x o counts; rows are gold classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);
  static ConfusionMatrix from_pairs(std::size_t classes, std::span<const std::size_t> gold,
                                    std::span<const std::size_t> predicted);

  void add(std::size_t gold, std::size_t predicted, std::size_t count = 1);
  std::size_t classes() const noexcept { return n_; }
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_.at(gold * n_ + predicted); }
  std::size_t total() const noexcept;
  std::size_t support(std::size_t cls) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 0/0 counts as 0.
Prf precision_recall_f1(const ConfusionMatrix& cm, std::size_t cls);
double f1_from(double precision, double recall);

/// Mean recall over the three sentiment classes.
double avg_rec(const ConfusionMatrix& cm);
double avg_rec(double r_pos, double r_neg, double r_neu);
/// Mean of FAVOR and AGAINST F1; NEUTRAL is ignored.
double f_avg(const ConfusionMatrix& cm);
double f_avg(double f_favor, double f_against);
/// F1 of HATEFUL (class 1) in a 2x2 matrix.
double f1_hateful(const ConfusionMatrix& cm);

/// avg_rec, f_avg or f1_hateful by task.
double task_metric(text::Task task, const ConfusionMatrix& cm);
const char* task_metric_name(text::Task task);

struct MetricReport {
  text::Task task = text::Task::kSentiment;
  double metric = 0.0;
  std::vector<Prf> per_class;
  std::vector<std::size_t> support;
};

MetricReport report(text::Task task, const ConfusionMatrix& cm);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Unequal-variance two-sample t test, two-sided p.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees.
double t_two_sided_p(double t, double df);

double mean(std::span<const double> xs);
/// Sample (n - 1) standard deviation.
double sample_std(std::span<const double> xs);

}  // namespace socialgat::eval
