#include "strobo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "strobo/error.hpp"
#include "strobo/measurement.hpp"
#include "strobo/parallel.hpp"

namespace strobo {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace strobo

namespace strobo::kernels {

namespace {

double abs_det_of_rows(const RMatrix& candidates, const std::vector<int>& rows) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  RMatrix sub(k, k);
  for (Eigen::Index r = 0; r < k; ++r) sub.row(r) = candidates.row(rows[static_cast<std::size_t>(r)]);
  return std::abs(sub.determinant());
}

void check_search_args(const RMatrix& candidates, int pick) {
  if (pick < 1 || pick != candidates.cols() || pick > candidates.rows()) {
    throw Error(ErrorKind::DomainError, "row search needs 1 <= pick = columns <= rows");
  }
}

// Lexicographic rank -> combination of `pick` values out of [0, n).
std::vector<int> unrank(std::uint64_t rank, int n, int pick) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(pick));
  int next = 0;
  for (int slot = 0; slot < pick; ++slot) {
    for (int v = next; v < n; ++v) {
      const std::uint64_t block = binomial_coefficient(n - v - 1, pick - slot - 1);
      if (rank < block) {
        out.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return out;
}

}  // namespace

std::uint64_t binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

TimeSearchResult best_rows_serial(const RMatrix& candidates, int pick) {
  check_search_args(candidates, pick);
  const int n = static_cast<int>(candidates.rows());
  TimeSearchResult best;
  best.abs_det = -1.0;
  std::vector<int> rows(static_cast<std::size_t>(pick));
  for (int j = 0; j < pick; ++j) rows[static_cast<std::size_t>(j)] = j;
  while (true) {
    ++best.combinations;
    const double det = abs_det_of_rows(candidates, rows);
    if (det > best.abs_det) {
      best.abs_det = det;
      best.rows = rows;
    }
    // Advance to the next combination in lexicographic order.
    int j = pick - 1;
    while (j >= 0 && rows[static_cast<std::size_t>(j)] == n - pick + j) --j;
    if (j < 0) break;
    ++rows[static_cast<std::size_t>(j)];
    for (int m = j + 1; m < pick; ++m) rows[static_cast<std::size_t>(m)] = rows[static_cast<std::size_t>(m - 1)] + 1;
  }
  return best;
}

TimeSearchResult best_rows_parallel(const RMatrix& candidates, int pick) {
  check_search_args(candidates, pick);
  const int n = static_cast<int>(candidates.rows());
  const std::uint64_t total = binomial_coefficient(n, pick);
  const auto total_signed = static_cast<long long>(total);

  double best_det = -1.0;
  long long best_rank = std::numeric_limits<long long>::max();
#pragma omp parallel
  {
    double local_det = -1.0;
    long long local_rank = std::numeric_limits<long long>::max();
#pragma omp for schedule(static)
    for (long long r = 0; r < total_signed; ++r) {
      const double det = abs_det_of_rows(candidates, unrank(static_cast<std::uint64_t>(r), n, pick));
      if (det > local_det) {
        local_det = det;
        local_rank = r;
      }
    }
#pragma omp critical(strobo_best_rows)
    {
      if (local_det > best_det || (local_det == best_det && local_rank < best_rank)) {
        best_det = local_det;
        best_rank = local_rank;
      }
    }
  }
  return {unrank(static_cast<std::uint64_t>(best_rank), n, pick), best_det, total};
}

std::vector<double> discrepancy_profile_serial(const HermitianOperator& h, const StateVector& psi0,
                                               const Projector& m,
                                               const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(model_discrepancy(h, psi0, m, t));
  return out;
}

std::vector<double> discrepancy_profile_parallel(const HermitianOperator& h,
                                                 const StateVector& psi0, const Projector& m,
                                                 const std::vector<double>& times) {
  if (h.dim() != psi0.dim() || h.dim() != m.direction.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "Hamiltonian, state and projector dimensions differ");
  }
  const auto n = static_cast<long long>(times.size());
  std::vector<double> out(times.size());
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < n; ++j) {
    out[static_cast<std::size_t>(j)] = model_discrepancy(h, psi0, m, times[static_cast<std::size_t>(j)]);
  }
  return out;
}

std::vector<double> noise_replicas_serial(double p, std::int64_t shots, std::uint64_t seed,
                                          int replicas) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(replicas, 0)));
  for (int r = 0; r < replicas; ++r) {
    out.push_back(add_shot_noise(p, shots, derive_seed(seed, static_cast<std::uint64_t>(r))));
  }
  return out;
}

std::vector<double> noise_replicas_parallel(double p, std::int64_t shots, std::uint64_t seed,
                                            int replicas) {
  // Validate once outside the parallel region; the loop body cannot throw after this.
  if (replicas > 0) (void)add_shot_noise(p, shots, seed);
  std::vector<double> out(static_cast<std::size_t>(std::max(replicas, 0)));
#pragma omp parallel for schedule(static)
  for (int r = 0; r < replicas; ++r) {
    out[static_cast<std::size_t>(r)] =
        add_shot_noise(p, shots, derive_seed(seed, static_cast<std::uint64_t>(r)));
  }
  return out;
}

}  // namespace strobo::kernels
