#include "strobo/frame.hpp"

#include "strobo/error.hpp"

namespace strobo {

Frame::Frame(std::vector<CVector> vectors, std::vector<std::string> labels, int mu)
    : vectors_(std::move(vectors)), labels_(std::move(labels)), mu_(mu) {
  if (vectors_.empty()) throw Error(ErrorKind::DegenerateInput, "empty frame");
  if (mu_ < 1 || vectors_.size() % static_cast<std::size_t>(mu_) != 0) {
    throw Error(ErrorKind::DomainError, "frame size must be a multiple of mu");
  }
  if (labels_.size() != vectors_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one label per frame vector required");
  }
  const auto d = vectors_.front().size();
  for (const auto& v : vectors_) {
    if (v.size() != d) throw Error(ErrorKind::DimensionMismatch, "frame vectors differ in size");
    if (v.norm() == 0.0) throw Error(ErrorKind::DegenerateInput, "frame vector is zero");
  }
}

Frame Frame::from_vectors(std::vector<CVector> vectors) {
  std::vector<std::string> labels;
  labels.reserve(vectors.size());
  for (std::size_t n = 0; n < vectors.size(); ++n) labels.push_back("v" + std::to_string(n));
  return Frame(std::move(vectors), std::move(labels), 1);
}

std::vector<CVector> krylov_vectors(const HermitianOperator& h, const StateVector& direction,
                                    int mu) {
  if (mu < 1) throw Error(ErrorKind::DomainError, "mu must be positive");
  if (h.dim() != direction.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "projector and Hamiltonian dimensions differ");
  }
  std::vector<CVector> out;
  out.reserve(mu);
  out.push_back(direction.components());
  for (int k = 1; k < mu; ++k) out.push_back(h.entries() * out.back());
  return out;
}

Frame build_frame(const HermitianOperator& h, const std::vector<Projector>& projectors) {
  if (projectors.empty()) throw Error(ErrorKind::DegenerateInput, "no projectors");
  const auto info = minimal_polynomial(h);
  std::vector<CVector> vectors;
  std::vector<std::string> labels;
  for (const auto& p : projectors) {
    auto chain = krylov_vectors(h, p.direction, info.mu);
    for (auto& v : chain) {
      vectors.push_back(std::move(v));
      labels.push_back(p.label);
    }
  }
  return Frame(std::move(vectors), std::move(labels), info.mu);
}

CMatrix frame_matrix(const Frame& frame) {
  CMatrix m(frame.dim(), frame.size());
  for (int n = 0; n < frame.size(); ++n) m.col(n) = frame.vectors()[n];
  return m;
}

SpanningVerdict check_necessary_condition(const Frame& frame, int d) {
  if (frame.size() == 0) throw Error(ErrorKind::DegenerateInput, "empty frame");
  if (frame.dim() != d) throw Error(ErrorKind::DimensionMismatch, "frame dimension differs from d");
  CMatrix columns = frame_matrix(frame);
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    const double n = columns.col(c).norm();
    if (n > 0.0) columns.col(c) /= n;
  }
  Eigen::JacobiSVD<CMatrix> svd(columns);
  const RVector& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (s(j) > 1e-10 * s(0)) ++rank;
  }
  return {rank == d, rank, d - rank};
}

}  // namespace strobo
