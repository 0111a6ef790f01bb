#pragma once

#include <map>
#include <vector>

namespace multimon {

// Exponent tuple, one entry per mode.
using Monomial = std::vector<int>;

// Sparse multivariate polynomial over the scaled mode coordinates
// x_mu = mode_flux / zpf_mu. Coefficients are in GHz.
class ModePolynomial {
 public:
  explicit ModePolynomial(int nvars = 0) : nvars_(nvars) {}

  int nvars() const { return nvars_; }
  void add(const Monomial& m, double coeff);
  double coefficient(const Monomial& m) const;
  const std::map<Monomial, double>& terms() const { return terms_; }

  // Drops terms with |coeff| below tol.
  void prune(double tol);

  // Classical evaluation at a real coordinate vector.
  double evaluate(const std::vector<double>& x) const;

  // Sum of degree-n terms restricted to a single variable, as coefficients.
  ModePolynomial degree_filtered(int min_degree, int max_degree) const;

 private:
  int nvars_;
  std::map<Monomial, double> terms_;
};

}  // namespace multimon
