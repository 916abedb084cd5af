#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "strobo/core_types.hpp"

namespace strobo {

/// Distinct spectrum of a Hermitian H and the monic relation
/// H^mu = sum_k coefficients[k] H^k.
struct MinimalPolynomialInfo {
  std::vector<double> distinct_eigenvalues;  // ascending
  int mu = 0;
  std::vector<double> monic_coefficients;    // c_0 .. c_{mu-1}
};

/// Propagator expansion weights: exp(-iHt) = sum_k values[k] H^k.
struct AlphaCoefficients {
  std::vector<Complex> values;
  double time = 0.0;
};

/// cluster_tol <= 0 selects the default 1e-8 * spectral norm of H.
MinimalPolynomialInfo minimal_polynomial(const HermitianOperator& h, double cluster_tol = 0.0);

AlphaCoefficients alpha_at(const MinimalPolynomialInfo& info, double t);

/// RK4 integration of the coefficient ODE; independent of the interpolation route.
AlphaCoefficients alpha_via_ode(const MinimalPolynomialInfo& info, double t, double step = 1e-4);

UnitaryOperator propagator(const HermitianOperator& h, double t);

/// Returns (I, H, H^2, ..., H^{count-1}) by repeated multiplication.
std::vector<CMatrix> hamiltonian_powers(const HermitianOperator& h, int count);

/// Read-mostly cache of H^k keyed on the matrix entries and the number of powers.
class PowerCache {
 public:
  std::shared_ptr<const std::vector<CMatrix>> get(const HermitianOperator& h, int count);
  std::size_t size() const;
  void clear();

  static PowerCache& shared();

 private:
  static constexpr std::size_t kMaxEntries = 256;
  using Key = std::pair<std::vector<double>, int>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const std::vector<CMatrix>>> entries_;
};

}  // namespace strobo
