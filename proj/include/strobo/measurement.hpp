#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strobo/core_types.hpp"
#include "strobo/parallel.hpp"

namespace strobo {

struct MeasurementRecord {
  std::string projector_label;
  double time = 0.0;
  double value = 0.0;
  std::optional<std::int64_t> shots;  // empty: exact probability

  bool exact() const noexcept { return !shots.has_value(); }
  bool operator==(const MeasurementRecord&) const = default;
};

/// |<i| exp(-iHt) |psi0>|^2, the ground-truth forward model.
double measure_exact(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                     double t);

/// sum_k |alpha_k(t)|^2 |<H^k i|psi0>|^2, clamped to [0, 1].
double measure_factored(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                        double t);

double model_discrepancy(const HermitianOperator& h, const StateVector& psi0, const Projector& m,
                         double t);

/// k / shots with k ~ Binomial(shots, p), by CDF inversion of one mt19937_64 draw.
double add_shot_noise(double p, std::int64_t shots, std::uint64_t seed);

enum class DataModel { Exact, Factored };

/// Records for every (projector, time) pair, projector-major. With `shots`,
/// record n is perturbed using derive_seed(seed, n).
std::vector<MeasurementRecord> simulate_records(const HermitianOperator& h,
                                                const StateVector& psi0,
                                                const std::vector<Projector>& projectors,
                                                const std::vector<double>& times, DataModel model,
                                                std::optional<std::int64_t> shots = std::nullopt,
                                                std::uint64_t seed = 0,
                                                Execution exec = Execution::Parallel);

}  // namespace strobo
