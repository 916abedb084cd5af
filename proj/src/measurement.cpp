#include "strobo/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/policies/policy.hpp>

#include "strobo/error.hpp"
#include "strobo/frame.hpp"
#include "strobo/log.hpp"
#include "strobo/spectral.hpp"

namespace strobo {

namespace {

void require_same_dim(const HermitianOperator& h, const StateVector& psi0, const Projector& m) {
  if (h.dim() != psi0.dim() || h.dim() != m.direction.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "Hamiltonian, state and projector dimensions differ");
  }
}

double factored_unclamped(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                          double t) {
  const auto info = minimal_polynomial(h);
  const auto alpha = alpha_at(info, t);
  const auto phi = krylov_vectors(h, m.direction, info.mu);
  double sum = 0.0;
  for (int k = 0; k < info.mu; ++k) {
    sum += std::norm(alpha.values[static_cast<std::size_t>(k)]) *
           std::norm(phi[static_cast<std::size_t>(k)].dot(psi0.components()));
  }
  return sum;
}

}  // namespace

double measure_exact(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                     double t) {
  require_same_dim(h, psi0, m);
  const auto u = propagator(h, t);
  const double p = std::norm(m.direction.components().dot(u.entries() * psi0.components()));
  return std::min(p, 1.0);
}

double measure_factored(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                        double t) {
  require_same_dim(h, psi0, m);
  const double raw = factored_unclamped(h, psi0, m, t);
  if (raw < 0.0 || raw > 1.0) {
    if (raw < -1e-12 || raw > 1.0 + 1e-12) {
      log().warn("factored model value {} at t = {} outside [0, 1]; clamped", raw, t);
    }
    return std::clamp(raw, 0.0, 1.0);
  }
  return raw;
}

double model_discrepancy(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                         double t) {
  return std::abs(measure_exact(h, psi0, m, t) - measure_factored(h, psi0, m, t));
}

double add_shot_noise(double p, std::int64_t shots, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::DomainError, "probability outside [0, 1]");
  if (shots < 1) throw Error(ErrorKind::DomainError, "shots must be >= 1");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  std::mt19937_64 rng(seed);
  // 53-bit uniform in (0, 1).
  const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;

  using namespace boost::math::policies;
  using Policy = policy<discrete_quantile<integer_round_up>>;
  const boost::math::binomial_distribution<double, Policy> dist(static_cast<double>(shots), p);
  const double k = boost::math::quantile(dist, u);
  return k / static_cast<double>(shots);
}

std::vector<MeasurementRecord> simulate_records(const HermitianOperator& h,
                                                const StateVector& psi0,
                                                const std::vector<Projector>& projectors,
                                                const std::vector<double>& times, DataModel model,
                                                std::optional<std::int64_t> shots,
                                                std::uint64_t seed, Execution exec) {
  for (const auto& p : projectors) require_same_dim(h, psi0, p);
  if (shots && *shots < 1) throw Error(ErrorKind::DomainError, "shots must be >= 1");
  const int nt = static_cast<int>(times.size());
  const int total = static_cast<int>(projectors.size()) * nt;
  return map_indices<MeasurementRecord>(total, exec, [&](int n) {
    const auto& p = projectors[static_cast<std::size_t>(n / nt)];
    const double t = times[static_cast<std::size_t>(n % nt)];
    double value = model == DataModel::Exact ? measure_exact(h, psi0, p, t)
                                             : measure_factored(h, psi0, p, t);
    if (shots) value = add_shot_noise(std::clamp(value, 0.0, 1.0), *shots,
                                      derive_seed(seed, static_cast<std::uint64_t>(n)));
    return MeasurementRecord{p.label, t, value, shots};
  });
}

}  // namespace strobo
