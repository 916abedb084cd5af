#include "strobo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "strobo/error.hpp"

namespace strobo {

namespace {

// Coefficients (ascending powers) of prod_j (x - roots[j]).
std::vector<double> poly_from_roots(const std::vector<double>& roots) {
  std::vector<double> p{1.0};
  for (double r : roots) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      next[k + 1] += p[k];
      next[k] -= r * p[k];
    }
    p = std::move(next);
  }
  return p;
}

}  // namespace

MinimalPolynomialInfo minimal_polynomial(const HermitianOperator& h, double cluster_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.entries(), Eigen::EigenvaluesOnly);
  const RVector evals = solver.eigenvalues();  // ascending
  const double spectral_norm = evals.cwiseAbs().maxCoeff();
  const double tol = cluster_tol > 0.0 ? cluster_tol : 1e-8 * spectral_norm;

  // Clusters of consecutive eigenvalues whose gaps stay within tol; each
  // cluster is represented by its mean.
  MinimalPolynomialInfo info;
  double sum = evals(0);
  int count = 1;
  for (Eigen::Index j = 1; j < evals.size(); ++j) {
    if (evals(j) - evals(j - 1) > tol) {
      info.distinct_eigenvalues.push_back(sum / count);
      sum = 0.0;
      count = 0;
    }
    sum += evals(j);
    ++count;
  }
  info.distinct_eigenvalues.push_back(sum / count);
  info.mu = static_cast<int>(info.distinct_eigenvalues.size());

  const auto p = poly_from_roots(info.distinct_eigenvalues);
  info.monic_coefficients.resize(info.mu);
  for (int k = 0; k < info.mu; ++k) info.monic_coefficients[k] = -p[k];
  return info;
}

AlphaCoefficients alpha_at(const MinimalPolynomialInfo& info, double t) {
  if (!std::isfinite(t)) throw Error(ErrorKind::DomainError, "time must be finite");
  const int mu = info.mu;
  const auto& lam = info.distinct_eigenvalues;

  std::vector<Complex> alpha(mu, Complex{0.0, 0.0});
  for (int j = 0; j < mu; ++j) {
    // Lagrange basis L_j expanded in monomials, scaled by f(lambda_j).
    std::vector<double> others;
    double denom = 1.0;
    for (int m = 0; m < mu; ++m) {
      if (m == j) continue;
      others.push_back(lam[m]);
      denom *= lam[j] - lam[m];
    }
    const auto basis = poly_from_roots(others);
    const Complex weight = std::polar(1.0, -lam[j] * t) / denom;
    for (int k = 0; k < mu; ++k) alpha[k] += weight * basis[k];
  }
  return {std::move(alpha), t};
}

AlphaCoefficients alpha_via_ode(const MinimalPolynomialInfo& info, double t, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::DomainError, "ODE step must be positive");
  if (!std::isfinite(t)) throw Error(ErrorKind::DomainError, "time must be finite");
  const int mu = info.mu;
  const auto& c = info.monic_coefficients;
  const Complex minus_i{0.0, -1.0};

  using State = Eigen::VectorXcd;
  auto rhs = [&](const State& a) {
    State d(mu);
    for (int k = 0; k < mu; ++k) {
      const Complex prev = k > 0 ? a(k - 1) : Complex{0.0, 0.0};
      d(k) = minus_i * (prev + c[k] * a(mu - 1));
    }
    return d;
  };

  State a = State::Zero(mu);
  a(0) = 1.0;
  const auto n = static_cast<long>(std::ceil(std::abs(t) / step));
  if (n > 0) {
    const double h = t / static_cast<double>(n);
    for (long s = 0; s < n; ++s) {
      const State k1 = rhs(a);
      const State k2 = rhs(a + 0.5 * h * k1);
      const State k3 = rhs(a + 0.5 * h * k2);
      const State k4 = rhs(a + h * k3);
      a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return {std::vector<Complex>(a.data(), a.data() + mu), t};
}

UnitaryOperator propagator(const HermitianOperator& h, double t) {
  if (!std::isfinite(t)) throw Error(ErrorKind::DomainError, "time must be finite");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.entries());
  const CMatrix& v = solver.eigenvectors();
  const RVector& lam = solver.eigenvalues();
  CVector phases(lam.size());
  for (Eigen::Index j = 0; j < lam.size(); ++j) phases(j) = std::polar(1.0, -lam(j) * t);
  return UnitaryOperator(v * phases.asDiagonal() * v.adjoint());
}

std::vector<CMatrix> hamiltonian_powers(const HermitianOperator& h, int count) {
  const auto d = h.dim();
  std::vector<CMatrix> out;
  out.reserve(std::max(count, 0));
  if (count <= 0) return out;
  out.push_back(CMatrix::Identity(d, d));
  for (int k = 1; k < count; ++k) out.push_back(h.entries() * out.back());
  return out;
}

std::shared_ptr<const std::vector<CMatrix>> PowerCache::get(const HermitianOperator& h,
                                                            int count) {
  const CMatrix& m = h.entries();
  Key key{std::vector<double>(reinterpret_cast<const double*>(m.data()),
                              reinterpret_cast<const double*>(m.data()) + 2 * m.size()),
          count};
  key.first.push_back(static_cast<double>(m.rows()));
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto powers = std::make_shared<const std::vector<CMatrix>>(hamiltonian_powers(h, count));
  std::unique_lock lock(mutex_);
  if (entries_.size() >= kMaxEntries) entries_.clear();
  auto [it, inserted] = entries_.emplace(std::move(key), std::move(powers));
  return it->second;
}

std::size_t PowerCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void PowerCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

PowerCache& PowerCache::shared() {
  static PowerCache cache;
  return cache;
}

}  // namespace strobo
