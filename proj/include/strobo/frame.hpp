#pragma once

#include <string>
#include <vector>

#include "strobo/core_types.hpp"
#include "strobo/spectral.hpp"

namespace strobo {

/// Krylov measurement frame {H^k |i>}; vector (i, k) sits at flat index i * mu + k.
/// Vectors are unnormalized.
class Frame {
 public:
  Frame(std::vector<CVector> vectors, std::vector<std::string> labels, int mu);

  const std::vector<CVector>& vectors() const noexcept { return vectors_; }
  const std::vector<std::string>& projector_labels() const noexcept { return labels_; }
  const CVector& at(int projector, int power) const { return vectors_.at(index(projector, power)); }
  std::size_t index(int projector, int power) const {
    return static_cast<std::size_t>(projector) * static_cast<std::size_t>(mu_) +
           static_cast<std::size_t>(power);
  }

  int size() const noexcept { return static_cast<int>(vectors_.size()); }
  int dim() const noexcept { return vectors_.empty() ? 0 : static_cast<int>(vectors_[0].size()); }
  int mu() const noexcept { return mu_; }
  int projector_count() const noexcept { return mu_ > 0 ? size() / mu_ : 0; }

  /// Frame from arbitrary vectors (one "projector" per vector, mu = 1).
  static Frame from_vectors(std::vector<CVector> vectors);

 private:
  std::vector<CVector> vectors_;
  std::vector<std::string> labels_;  // one per vector
  int mu_;
};

struct SpanningVerdict {
  bool spans = false;
  int rank = 0;
  int defect_dimension = 0;
};

std::vector<CVector> krylov_vectors(const HermitianOperator& h, const StateVector& direction,
                                    int mu);

Frame build_frame(const HermitianOperator& h, const std::vector<Projector>& projectors);

/// Numerical rank of the column-normalized frame matrix, singular values above 1e-10 * sigma_max.
SpanningVerdict check_necessary_condition(const Frame& frame, int d);

/// Column matrix [theta_1 ... theta_N].
CMatrix frame_matrix(const Frame& frame);

}  // namespace strobo
