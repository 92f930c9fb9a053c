#include <cmath>

#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"

namespace socialgat::embed {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 1e-300)) return false;
  for (double& x : v) x /= n;
  return true;
}

void remove_component(std::vector<double>& v, const std::vector<double>& u) {
  const double c = dot(v, u);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
}

// Leading eigenvector of the symmetric PSD matrix `cov`, orthogonal to
// `against`. Returns zeros when the remaining spectrum vanishes.
std::vector<double> leading_eigenvector(const std::vector<double>& cov, std::size_t d,
                                        const std::vector<std::vector<double>>& against,
                                        double scale) {
  std::vector<double> v(d), next(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
  for (const auto& u : against) remove_component(v, u);
  if (!normalize(v)) return std::vector<double>(d, 0.0);
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += cov[r * d + c] * v[c];
      next[r] = s;
    }
    for (const auto& u : against) {
      remove_component(next, u);
      remove_component(next, u);
    }
    if (std::sqrt(dot(next, next)) <= 1e-13 * scale) {
      // No variance left in this subspace; keep any orthonormal direction so
      // the projection is still a rigid map.
      return v;
    }
    normalize(next);
    double diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) diff = std::max(diff, std::abs(next[i] - v[i]));
    v.swap(next);
    if (diff < 1e-14) break;
  }
  return v;
}

}  // namespace

std::vector<std::array<double, 2>> pca2d(const EmbeddingTable& table) {
  const std::size_t n = table.size();
  if (n < 3) throw ParameterError("pca2d needs at least 3 vectors, got " + std::to_string(n));
  const std::size_t d = table.dim();
  std::vector<double> mean(d, 0.0);
  for (const auto& id : table.ids()) {
    const auto v = table.vector(id);
    for (std::size_t i = 0; i < d; ++i) mean[i] += v[i];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> centered;
  centered.reserve(n);
  for (const auto& id : table.ids()) {
    const auto v = table.vector(id);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < d; ++i) row[i] = v[i] - mean[i];
    centered.push_back(std::move(row));
  }
  std::vector<double> cov(d * d, 0.0);
  for (const auto& row : centered)
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) cov[r * d + c] += row[r] * row[c];
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += cov[i * d + i];

  std::vector<std::array<double, 2>> out(n, {0.0, 0.0});
  if (!(trace > 0.0)) return out;
  std::vector<std::vector<double>> comps;
  for (int k = 0; k < 2 && static_cast<std::size_t>(k) < d; ++k) {
    comps.push_back(leading_eigenvector(cov, d, comps, trace));
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < comps.size(); ++k) out[r][k] = dot(centered[r], comps[k]);
  return out;
}

}  // namespace socialgat::embed
