#pragma once

#include <complex>
#include <string>
#include <vector>
#include <initializer_list>

#include <Eigen/Dense>

namespace strobo {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kNormTol = 1e-10;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

/// Unit-norm complex amplitude vector of a d-level pure state (d >= 2).
class StateVector {
 public:
  /// Throws DegenerateInput unless `components` already has unit norm.
  explicit StateVector(CVector components);

  const CVector& components() const noexcept { return components_; }
  int dim() const noexcept { return static_cast<int>(components_.size()); }
  Complex operator[](int j) const { return components_(j); }

 private:
  CVector components_;
};

/// Self-adjoint d x d matrix; the Hamiltonian or a test matrix in L_Phi.
class HermitianOperator {
 public:
  /// Throws NotHermitian when entries differ from their adjoint by more than 1e-12.
  explicit HermitianOperator(CMatrix entries);

  const CMatrix& entries() const noexcept { return entries_; }
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }

 private:
  CMatrix entries_;
};

class UnitaryOperator {
 public:
  explicit UnitaryOperator(CMatrix entries);

  const CMatrix& entries() const noexcept { return entries_; }
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }

 private:
  CMatrix entries_;
};

/// Rank-one projector |i><i| with a label identifying the measurement setting.
struct Projector {
  StateVector direction;
  std::string label;

  CMatrix matrix() const;
};

struct BlochParameters {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2 pi)
};

StateVector make_state(const std::vector<Complex>& components);
StateVector make_state(const CVector& components);
StateVector make_state(std::initializer_list<Complex> components);

double fidelity(const StateVector& a, const StateVector& b);

StateVector bloch_to_state(const BlochParameters& p);

/// Inverse of bloch_to_state up to global phase; poles map to phi = 0.
BlochParameters state_to_bloch(const StateVector& s);

/// Rotates so that the first nonzero component is real and non-negative.
StateVector canonical_phase(const StateVector& s);
CVector canonical_phase(const CVector& v);

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double phi);

}  // namespace strobo
