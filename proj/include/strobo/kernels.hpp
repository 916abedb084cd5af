#pragma once

#include <cstdint>
#include <vector>

#include "strobo/core_types.hpp"

// Data-parallel inner loops. Each kernel has a straightforward serial
// reference and an OpenMP version; the two must return identical results.

namespace strobo::kernels {

struct TimeSearchResult {
  std::vector<int> rows;  // ascending row indices into the candidate table
  double abs_det = 0.0;
  std::uint64_t combinations = 0;
};

/// Chooses `pick` rows of `candidates` (one row per grid time, columns
/// k = 1 .. mu-1 of |alpha_k|^2) maximizing |det| of the square submatrix.
/// Ties resolve to the lexicographically smallest row set.
TimeSearchResult best_rows_serial(const RMatrix& candidates, int pick);
TimeSearchResult best_rows_parallel(const RMatrix& candidates, int pick);

std::uint64_t binomial_coefficient(int n, int k);

/// |measure_exact - measure_factored| at each time.
std::vector<double> discrepancy_profile_serial(const HermitianOperator& h, const StateVector& psi0,
                                               const Projector& m, const std::vector<double>& times);
std::vector<double> discrepancy_profile_parallel(const HermitianOperator& h,
                                                 const StateVector& psi0, const Projector& m,
                                                 const std::vector<double>& times);

/// Shot-noise replicas of a probability; replica r uses derive_seed(seed, r).
std::vector<double> noise_replicas_serial(double p, std::int64_t shots, std::uint64_t seed,
                                          int replicas);
std::vector<double> noise_replicas_parallel(double p, std::int64_t shots, std::uint64_t seed,
                                            int replicas);

}  // namespace strobo::kernels
