#include "strobo/injectivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "strobo/error.hpp"
#include "strobo/log.hpp"

namespace strobo {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kWitnessObjectiveTol = 1e-12;
constexpr double kConstraintTol = 1e-8;

int pair_index(int d, int j, int k) {
  // Position of (j, k), j < k, in row-major enumeration of the upper triangle.
  return j * d - j * (j + 1) / 2 + (k - j - 1);
}

struct EigenByMagnitude {
  RVector values;  // sorted by |value| descending
  CMatrix vectors;
};

EigenByMagnitude eigen_by_magnitude(const CMatrix& q) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q);
  const auto n = q.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  EigenByMagnitude out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = es.eigenvalues()(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

double tail_energy(const RVector& by_magnitude) {
  double s = 0.0;
  for (Eigen::Index j = 2; j < by_magnitude.size(); ++j) s += by_magnitude(j) * by_magnitude(j);
  return s;
}

CMatrix truncate_rank2(const EigenByMagnitude& e) {
  const auto n = e.vectors.rows();
  CMatrix r = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(2, n); ++j) {
    r += e.values(j) * e.vectors.col(j) * e.vectors.col(j).adjoint();
  }
  return r;
}

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  RVector coefficients;
};

// Coefficient-space search over the unit sphere of span(basis). `basis_coords`
// has orthonormal columns in HermitianBasisCoordinates.
class WitnessSearch {
 public:
  WitnessSearch(const RMatrix& basis_coords, int d) : b_(basis_coords), d_(d) {}

  CMatrix assemble(const RVector& c) const {
    return HermitianBasisCoordinates{b_ * c, d_}.to_matrix();
  }

  double objective(const RVector& c) const {
    return tail_energy(eigen_by_magnitude(assemble(c)).values);
  }

  Candidate run(std::uint64_t seed, int descent_iterations, int polish_iterations) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    RVector c(b_.cols());
    for (Eigen::Index m = 0; m < c.size(); ++m) c(m) = normal(rng);
    c.normalize();

    double f = objective(c);
    double step = 0.5;
    for (int it = 0; it < descent_iterations && f > 1e-28; ++it) {
      const RVector g = riemannian_gradient(c);
      if (g.norm() < 1e-18) break;
      bool improved = false;
      while (step > 1e-14) {
        RVector trial = (c - step * g).normalized();
        const double ft = objective(trial);
        if (ft < f) {
          c = std::move(trial);
          f = ft;
          improved = true;
          step = std::min(step * 2.0, 4.0);
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }

    // Alternating projections: rank-2 truncation, then back onto the subspace.
    for (int it = 0; it < polish_iterations && f > 1e-30; ++it) {
      const auto e = eigen_by_magnitude(assemble(c));
      const RVector proj = b_.transpose() * HermitianBasisCoordinates::from_operator(truncate_rank2(e)).coords;
      if (proj.norm() == 0.0) break;
      RVector next = proj.normalized();
      const double fn = objective(next);
      if (!(fn <= f)) break;
      c = std::move(next);
      f = fn;
    }
    return {f, c};
  }

 private:
  RVector riemannian_gradient(const RVector& c) const {
    const auto e = eigen_by_magnitude(assemble(c));
    RVector g(c.size());
    for (Eigen::Index m = 0; m < c.size(); ++m) {
      const CMatrix bm = HermitianBasisCoordinates{b_.col(m), d_}.to_matrix();
      double s = 0.0;
      for (Eigen::Index j = 2; j < e.values.size(); ++j) {
        const CVector v = e.vectors.col(j);
        s += 2.0 * e.values(j) * std::real(v.dot(bm * v));
      }
      g(m) = s;
    }
    return g - g.dot(c) * c;
  }

  RMatrix b_;
  int d_;
};

RMatrix basis_to_coords(const std::vector<HermitianOperator>& basis) {
  const int d = basis.front().dim();
  RMatrix out(d * d, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t m = 0; m < basis.size(); ++m) {
    out.col(static_cast<Eigen::Index>(m)) = HermitianBasisCoordinates::from_operator(basis[m].entries()).coords;
  }
  return out;
}

}  // namespace

std::string_view to_string(InjectivityStatus s) {
  switch (s) {
    case InjectivityStatus::Injective: return "Injective";
    case InjectivityStatus::NonInjective: return "NonInjective";
    case InjectivityStatus::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

HermitianBasisCoordinates HermitianBasisCoordinates::from_operator(const CMatrix& q) {
  const int d = static_cast<int>(q.rows());
  RVector c(d * d);
  for (int j = 0; j < d; ++j) c(j) = q(j, j).real();
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const int p = pair_index(d, j, k);
      c(d + 2 * p) = std::numbers::sqrt2 * q(j, k).real();
      c(d + 2 * p + 1) = std::numbers::sqrt2 * q(j, k).imag();
    }
  }
  return {std::move(c), d};
}

CMatrix HermitianBasisCoordinates::to_matrix() const {
  const int d = dim;
  CMatrix q = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) q(j, j) = coords(j);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const int p = pair_index(d, j, k);
      const Complex z{coords(d + 2 * p), coords(d + 2 * p + 1)};
      q(j, k) = z / std::numbers::sqrt2;
      q(k, j) = std::conj(z) / std::numbers::sqrt2;
    }
  }
  return q;
}

CMatrix hermitian_basis_element(int d, int index) {
  RVector c = RVector::Zero(d * d);
  c(index) = 1.0;
  return HermitianBasisCoordinates{c, d}.to_matrix();
}

RMatrix constraint_matrix(const Frame& frame) {
  const int d = frame.dim();
  RMatrix a(frame.size(), d * d);
  for (int n = 0; n < frame.size(); ++n) {
    const CVector& th = frame.vectors()[static_cast<std::size_t>(n)];
    for (int j = 0; j < d; ++j) a(n, j) = std::norm(th(j));
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        const int p = pair_index(d, j, k);
        const Complex z = std::conj(th(j)) * th(k);
        a(n, d + 2 * p) = std::numbers::sqrt2 * z.real();
        a(n, d + 2 * p + 1) = -std::numbers::sqrt2 * z.imag();
      }
    }
  }
  return a;
}

std::vector<HermitianOperator> hermitian_nullspace(const Frame& frame) {
  const int d = frame.dim();
  const RMatrix a = constraint_matrix(frame);
  Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (s(j) > kRankTol * s(0)) ++rank;
  }
  std::vector<HermitianOperator> out;
  for (int col = rank; col < d * d; ++col) {
    CMatrix q = HermitianBasisCoordinates{svd.matrixV().col(col), d}.to_matrix();
    out.emplace_back(0.5 * (q + q.adjoint()));
  }
  return out;
}

bool verify_witness(const HermitianOperator& witness, const Frame& frame) {
  const CMatrix& w = witness.entries();
  const double fro = w.norm();
  if (!(fro > 0.0)) return false;
  const CMatrix wn = w / fro;
  Eigen::JacobiSVD<CMatrix> svd(wn);
  const RVector& s = svd.singularValues();
  if (s.size() > 2 && s(2) >= kRankTol * s(0)) return false;
  for (const auto& th : frame.vectors()) {
    const double val = std::abs(th.dot(wn * th)) / th.squaredNorm();
    if (val >= kConstraintTol) return false;
  }
  return true;
}

InjectivityVerdict find_low_rank_witness(const std::vector<HermitianOperator>& nullspace_basis,
                                         const WitnessSearchOptions& options,
                                         const Frame* frame) {
  if (options.attempts < 1) throw Error(ErrorKind::DomainError, "attempts must be >= 1");
  InjectivityVerdict v;
  v.nullspace_dimension = static_cast<int>(nullspace_basis.size());
  if (nullspace_basis.empty()) {
    v.status = InjectivityStatus::Injective;
    return v;
  }
  const int d = nullspace_basis.front().dim();
  if (d == 2) {
    const CMatrix& w = nullspace_basis.front().entries();
    v.status = InjectivityStatus::NonInjective;
    v.witness = HermitianOperator(w / w.norm());
    return v;
  }

  const RMatrix coords = basis_to_coords(nullspace_basis);
  const WitnessSearch search(coords, d);

  if (nullspace_basis.size() == 1) {
    // The only candidates are +-basis[0]; decide exactly.
    const RVector c = RVector::Ones(1);
    const auto e = eigen_by_magnitude(search.assemble(c));
    if (std::abs(e.values(2)) < kRankTol * std::abs(e.values(0))) {
      v.status = InjectivityStatus::NonInjective;
      v.witness = HermitianOperator(truncate_rank2(e));
    } else {
      v.status = InjectivityStatus::Injective;
    }
    return v;
  }

  const auto candidates = map_indices<Candidate>(options.attempts, options.execution, [&](int a) {
    return search.run(derive_seed(options.seed, static_cast<std::uint64_t>(a)),
                      options.descent_iterations, options.polish_iterations);
  });
  // Lowest objective wins; ties resolve to the lowest attempt index.
  std::size_t best = 0;
  for (std::size_t a = 1; a < candidates.size(); ++a) {
    if (candidates[a].objective < candidates[best].objective) best = a;
  }
  v.status = InjectivityStatus::Undetermined;
  if (candidates[best].objective < kWitnessObjectiveTol) {
    const auto e = eigen_by_magnitude(search.assemble(candidates[best].coefficients));
    CMatrix w = truncate_rank2(e);
    w /= w.norm();
    HermitianOperator witness(0.5 * (w + w.adjoint()));
    const RVector wc = HermitianBasisCoordinates::from_operator(witness.entries()).coords;
    const double off_subspace = (wc - coords * (coords.transpose() * wc)).norm();
    const bool ok = off_subspace < kConstraintTol && (frame == nullptr || verify_witness(witness, *frame));
    if (ok) {
      v.status = InjectivityStatus::NonInjective;
      v.witness = std::move(witness);
    }
  }
  return v;
}

InjectivityVerdict find_low_rank_witness(const std::vector<HermitianOperator>& nullspace_basis,
                                         int attempts, std::uint64_t seed) {
  WitnessSearchOptions o;
  o.attempts = attempts;
  o.seed = seed;
  return find_low_rank_witness(nullspace_basis, o);
}

Frame deduplicate(const Frame& frame, int* removed) {
  std::vector<CVector> kept;
  std::vector<std::string> labels;
  for (int n = 0; n < frame.size(); ++n) {
    const CVector& v = frame.vectors()[static_cast<std::size_t>(n)];
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const CVector& u) {
      const double nu = u.norm();
      const double nv = v.norm();
      const double scale = std::max(nu, nv);
      return std::abs(nu - nv) <= 1e-12 * scale &&
             std::abs(std::abs(u.dot(v)) - nu * nv) <= 1e-12 * scale * scale;
    });
    if (!dup) {
      kept.push_back(v);
      labels.push_back(frame.projector_labels()[static_cast<std::size_t>(n)]);
    }
  }
  const int dropped = frame.size() - static_cast<int>(kept.size());
  if (removed != nullptr) *removed = dropped;
  if (dropped == 0) return frame;
  log().warn("dropped {} duplicate frame vector(s) before building constraints", dropped);
  return Frame(std::move(kept), std::move(labels), 1);
}

InjectivityVerdict check_injectivity(const Frame& frame, const WitnessSearchOptions& options) {
  const Frame effective = deduplicate(frame);
  const auto basis = hermitian_nullspace(effective);
  InjectivityVerdict v = find_low_rank_witness(basis, options, &effective);
  const int d = frame.dim();
  v.effective_frame_size = effective.size();
  v.advisory_4d4 = effective.size() >= 4 * d - 4;
  return v;
}

InjectivityVerdict check_injectivity(const Frame& frame, int attempts, std::uint64_t seed) {
  WitnessSearchOptions o;
  o.attempts = attempts;
  o.seed = seed;
  return check_injectivity(frame, o);
}

std::pair<CVector, CVector> ambiguous_pair(const HermitianOperator& witness) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(witness.entries());
  const RVector& lam = es.eigenvalues();  // ascending
  const CMatrix& vec = es.eigenvectors();
  const auto n = lam.size();
  const double scale = lam.cwiseAbs().maxCoeff();
  const double lo = lam(0);
  const double hi = lam(n - 1);
  const double tol = 1e-10 * scale;
  if (hi > tol && lo < -tol) {
    return {std::sqrt(hi) * vec.col(n - 1), std::sqrt(-lo) * vec.col(0)};
  }
  // Semidefinite: the frame lies in the orthogonal complement of the range.
  const Eigen::Index top = hi > tol ? n - 1 : 0;
  const Eigen::Index next = hi > tol ? n - 2 : 1;
  const double second = std::abs(lam(next));
  if (second > tol) return {vec.col(top), vec.col(next)};
  return {CVector(vec.col(top) + vec.col(next)), CVector(vec.col(next))};
}

}  // namespace strobo
