#include "strobo/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "strobo/error.hpp"

namespace strobo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::SingularLambda: return "SingularLambda";
    case ErrorKind::NoInvertibleTimes: return "NoInvertibleTimes";
    case ErrorKind::FrameDeficient: return "FrameDeficient";
    case ErrorKind::InconsistentData: return "InconsistentData";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DataMismatch: return "DataMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

StateVector::StateVector(CVector components) : components_(std::move(components)) {
  if (components_.size() < 2) {
    throw Error(ErrorKind::DegenerateInput, "state dimension must be at least 2");
  }
  if (!components_.allFinite()) {
    throw Error(ErrorKind::DegenerateInput, "state has non-finite components");
  }
  if (std::abs(components_.squaredNorm() - 1.0) > kNormTol) {
    throw Error(ErrorKind::DegenerateInput, "state is not normalized");
  }
}

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "operator must be a non-empty square matrix");
  }
  if (!entries_.allFinite()) {
    throw Error(ErrorKind::DomainError, "operator has non-finite entries");
  }
  const double dev = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (dev > kHermitianTol) {
    throw Error(ErrorKind::NotHermitian,
                "max |H - H^dagger| = " + std::to_string(dev));
  }
}

UnitaryOperator::UnitaryOperator(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "unitary must be square");
  }
  const auto n = entries_.rows();
  const double dev =
      (entries_ * entries_.adjoint() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (dev > kUnitaryTol) {
    throw Error(ErrorKind::DomainError, "matrix is not unitary");
  }
}

CMatrix Projector::matrix() const {
  const auto& v = direction.components();
  return v * v.adjoint();
}

StateVector make_state(const CVector& components) {
  if (components.size() == 0) {
    throw Error(ErrorKind::DegenerateInput, "empty component list");
  }
  const double norm = components.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::DegenerateInput, "zero or non-finite vector");
  }
  return StateVector(components / norm);
}

StateVector make_state(const std::vector<Complex>& components) {
  CVector v(static_cast<Eigen::Index>(components.size()));
  for (std::size_t j = 0; j < components.size(); ++j) v(static_cast<Eigen::Index>(j)) = components[j];
  return make_state(v);
}

StateVector make_state(std::initializer_list<Complex> components) {
  return make_state(std::vector<Complex>(components));
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "fidelity of states with different dimension");
  }
  const double f = std::norm(a.components().dot(b.components()));
  return std::clamp(f, 0.0, 1.0);
}

double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

StateVector bloch_to_state(const BlochParameters& p) {
  if (!(p.theta >= 0.0 && p.theta <= std::numbers::pi)) {
    throw Error(ErrorKind::DomainError, "theta outside [0, pi]");
  }
  if (!std::isfinite(p.phi)) {
    throw Error(ErrorKind::DomainError, "phi is not finite");
  }
  CVector v(2);
  v(0) = std::cos(p.theta / 2.0);
  v(1) = std::sin(p.theta / 2.0) * std::polar(1.0, p.phi);
  return StateVector(v);
}

CVector canonical_phase(const CVector& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::abs(v(j)) > 1e-14 * scale) {
      const Complex rot = std::conj(v(j)) / std::abs(v(j));
      CVector out = v * rot;
      out(j) = std::abs(v(j));
      return out;
    }
  }
  return v;
}

StateVector canonical_phase(const StateVector& s) {
  CVector v = canonical_phase(s.components());
  return StateVector(v / v.norm());
}

BlochParameters state_to_bloch(const StateVector& s) {
  if (s.dim() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "Bloch parameters need a qubit state");
  }
  const Complex a = s[0];
  const Complex b = s[1];
  const double ra = std::abs(a);
  const double rb = std::abs(b);
  BlochParameters p;
  p.theta = 2.0 * std::atan2(rb, ra);
  if (ra < 1e-14 || rb < 1e-14) {
    p.phi = 0.0;
  } else {
    p.phi = wrap_angle(std::arg(b) - std::arg(a));
  }
  return p;
}

}  // namespace strobo
