#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "strobo/core_types.hpp"
#include "strobo/frame.hpp"
#include "strobo/parallel.hpp"

namespace strobo {

// Real coordinates of a d x d Hermitian matrix in the orthonormal basis
//   E_jj                         indices 0 .. d-1
//   (E_jk + E_kj) / sqrt(2)      index d + 2p      (p enumerates j < k)
//   i (E_jk - E_kj) / sqrt(2)    index d + 2p + 1
struct HermitianBasisCoordinates {
  RVector coords;
  int dim = 0;

  static HermitianBasisCoordinates from_operator(const CMatrix& q);
  CMatrix to_matrix() const;
};

CMatrix hermitian_basis_element(int d, int index);

enum class InjectivityStatus { Injective, NonInjective, Undetermined };

std::string_view to_string(InjectivityStatus s);

struct InjectivityVerdict {
  InjectivityStatus status = InjectivityStatus::Undetermined;
  int nullspace_dimension = 0;
  std::optional<HermitianOperator> witness;
  bool advisory_4d4 = false;
  int effective_frame_size = 0;
};

struct WitnessSearchOptions {
  int attempts = 64;
  std::uint64_t seed = 0;
  int descent_iterations = 400;
  int polish_iterations = 20;
  Execution execution = Execution::Parallel;
};

/// Row n maps Q to <theta_n|Q|theta_n> in HermitianBasisCoordinates.
RMatrix constraint_matrix(const Frame& frame);

/// Orthonormal kernel basis of the constraint matrix, as Hermitian matrices.
std::vector<HermitianOperator> hermitian_nullspace(const Frame& frame);

/// Searches span(nullspace_basis) for a nonzero Hermitian matrix of rank <= 2.
/// When `frame` is given, a found witness is re-verified against its constraints.
InjectivityVerdict find_low_rank_witness(const std::vector<HermitianOperator>& nullspace_basis,
                                         const WitnessSearchOptions& options,
                                         const Frame* frame = nullptr);

InjectivityVerdict find_low_rank_witness(const std::vector<HermitianOperator>& nullspace_basis,
                                         int attempts, std::uint64_t seed);

InjectivityVerdict check_injectivity(const Frame& frame, const WitnessSearchOptions& options);
InjectivityVerdict check_injectivity(const Frame& frame, int attempts = 64,
                                     std::uint64_t seed = 0);

/// Drops vectors equal to an earlier one up to a unimodular phase.
Frame deduplicate(const Frame& frame, int* removed = nullptr);

/// Independent re-check used for every NonInjective verdict.
bool verify_witness(const HermitianOperator& witness, const Frame& frame);

/// For W = a v1 v1^* - b v2 v2^*, returns (sqrt(a) v1, sqrt(b) v2): two vectors
/// that are not equal up to phase and whose intensities agree on every frame
/// vector annihilating W. Semidefinite witnesses yield a pair of unit kernel
/// directions of the frame.
std::pair<CVector, CVector> ambiguous_pair(const HermitianOperator& witness);

}  // namespace strobo
