#include "multimon/polynomial.hpp"

#include <cmath>
#include <numeric>

namespace multimon {

void ModePolynomial::add(const Monomial& m, double coeff) {
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double ModePolynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void ModePolynomial::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < tol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

double ModePolynomial::evaluate(const std::vector<double>& x) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double prod = c;
    for (int v = 0; v < nvars_; ++v) {
      for (int p = 0; p < m[v]; ++p) prod *= x[v];
    }
    sum += prod;
  }
  return sum;
}

ModePolynomial ModePolynomial::degree_filtered(int min_degree,
                                               int max_degree) const {
  ModePolynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    const int deg = std::accumulate(m.begin(), m.end(), 0);
    if (deg >= min_degree && deg <= max_degree) out.add(m, c);
  }
  return out;
}

}  // namespace multimon
