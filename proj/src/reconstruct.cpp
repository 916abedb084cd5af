#include "strobo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "strobo/error.hpp"
#include "strobo/kernels.hpp"
#include "strobo/log.hpp"

namespace strobo {

namespace {

constexpr double kDetTol = 1e-10;
constexpr double kTimeMatchTol = 1e-12;
constexpr double kClampTol = 1e-6;
constexpr double kExactFitTol = 1e-6;
constexpr std::uint64_t kMaxExhaustiveCombinations = 20'000'000;

bool same_time(double a, double b) { return std::abs(a - b) <= kTimeMatchTol * std::max(1.0, std::abs(a)); }

// Records grouped per projector, in projector order.
std::vector<std::vector<MeasurementRecord>> group_by_projector(
    const std::vector<Projector>& projectors, const std::vector<MeasurementRecord>& data) {
  std::vector<std::vector<MeasurementRecord>> groups(projectors.size());
  for (const auto& r : data) {
    auto it = std::find_if(projectors.begin(), projectors.end(),
                           [&](const Projector& p) { return p.label == r.projector_label; });
    if (it == projectors.end()) {
      throw Error(ErrorKind::DataMismatch, "record for unknown projector '" + r.projector_label + "'");
    }
    groups[static_cast<std::size_t>(it - projectors.begin())].push_back(r);
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty()) {
      throw Error(ErrorKind::DataMismatch, "no records for projector '" + projectors[i].label + "'");
    }
  }
  return groups;
}

std::vector<double> distinct_times(const std::vector<MeasurementRecord>& records) {
  std::vector<double> ts;
  for (const auto& r : records) {
    if (std::none_of(ts.begin(), ts.end(), [&](double t) { return same_time(t, r.time); })) {
      ts.push_back(r.time);
    }
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

// Records of `group` at exactly the instants of `times`, in that order.
std::vector<MeasurementRecord> records_at(const std::vector<MeasurementRecord>& group,
                                          const std::vector<double>& times) {
  std::vector<MeasurementRecord> out;
  for (double t : times) {
    auto it = std::find_if(group.begin(), group.end(),
                           [&](const MeasurementRecord& r) { return same_time(r.time, t); });
    if (it == group.end()) {
      throw Error(ErrorKind::DataMismatch, "projector '" + group.front().projector_label +
                                               "' has no record at t = " + std::to_string(t));
    }
    out.push_back(*it);
  }
  return out;
}

double rms(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s / static_cast<double>(r.size()));
}

// Frame vectors U(t)^dagger |i> for every record; |<w|psi>|^2 is the exact prediction.
std::vector<CVector> exact_probe_vectors(const HermitianOperator& h,
                                         const std::vector<Projector>& projectors,
                                         const std::vector<MeasurementRecord>& data) {
  std::vector<CVector> out;
  out.reserve(data.size());
  for (const auto& r : data) {
    auto it = std::find_if(projectors.begin(), projectors.end(),
                           [&](const Projector& p) { return p.label == r.projector_label; });
    const auto u = propagator(h, r.time);
    out.emplace_back(u.entries().adjoint() * it->direction.components());
  }
  return out;
}

struct ExactResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<CVector>* probes = nullptr;
  const std::vector<double>* observed = nullptr;
  int d = 2;

  int inputs() const { return 2 * d - 2; }
  int values() const { return static_cast<int>(observed->size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    const CVector psi = state_from_angles(x, d);
    for (std::size_t n = 0; n < probes->size(); ++n) {
      fvec(static_cast<Eigen::Index>(n)) = std::norm((*probes)[n].dot(psi)) - (*observed)[n];
    }
    return 0;
  }
};

struct FitResult {
  double residual = std::numeric_limits<double>::infinity();
  RVector angles;
};

FitResult fit_from(const ExactResidual& functor, RVector x) {
  Eigen::NumericalDiff<ExactResidual, Eigen::Central> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ExactResidual, Eigen::Central>> lm(numdiff);
  lm.parameters.maxfev = 4000;
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.minimize(x);
  Eigen::VectorXd f(functor.values());
  functor(x, f);
  FitResult out;
  out.residual = std::sqrt(f.squaredNorm() / static_cast<double>(f.size()));
  if (!std::isfinite(out.residual)) out.residual = std::numeric_limits<double>::infinity();
  out.angles = std::move(x);
  return out;
}

double factored_prediction(const MinimalPolynomialInfo& info, const std::vector<CVector>& krylov,
                           const CVector& psi, double t) {
  const auto alpha = alpha_at(info, t);
  double s = 0.0;
  for (int k = 0; k < info.mu; ++k) {
    s += std::norm(alpha.values[static_cast<std::size_t>(k)]) *
         std::norm(krylov[static_cast<std::size_t>(k)].dot(psi));
  }
  return s;
}

struct FactoredOutcome {
  StateVector state;
  ReconstructionMethod method;
  LambdaMatrix lm;
  IntensityVector intensities;
};

FactoredOutcome run_factored(const HermitianOperator& h, const std::vector<Projector>& projectors,
                             const std::vector<std::vector<MeasurementRecord>>& groups,
                             const std::vector<double>& times, const MinimalPolynomialInfo& info,
                             const Frame& frame, const SpanningVerdict& spanning,
                             int refine_iters) {
  LambdaMatrix lm = lambda_matrix(info, times);
  if (!check_theorem1(lm, info.mu)) {
    const std::string why = static_cast<int>(times.size()) != info.mu
                                ? "p = " + std::to_string(times.size()) + " != mu = " + std::to_string(info.mu)
                                : "|det Lambda| <= 1e-10";
    throw Error(ErrorKind::SingularLambda, why);
  }
  std::vector<std::vector<MeasurementRecord>> aligned;
  aligned.reserve(groups.size());
  for (const auto& g : groups) aligned.push_back(records_at(g, times));
  IntensityVector iv = recover_intensities(lm, aligned);

  if (is_sigma_y_qubit_fixture(h, projectors)) {
    StateVector s = canonical_phase(bloch_to_state(qubit_closed_form(iv)));
    return {std::move(s), ReconstructionMethod::PaperQubitClosedForm, std::move(lm), std::move(iv)};
  }
  if (!spanning.spans) {
    throw Error(ErrorKind::FrameDeficient, "Krylov frame rank " + std::to_string(spanning.rank) +
                                               " < d = " + std::to_string(h.dim()));
  }
  StateVector s = general_phase_retrieval(frame, iv, refine_iters);
  return {std::move(s), ReconstructionMethod::Lifting, std::move(lm), std::move(iv)};
}

// Best mu-subset of the available instants for a factored warm start.
std::vector<double> best_time_subset(const MinimalPolynomialInfo& info,
                                     const std::vector<double>& available) {
  const int mu = info.mu;
  if (static_cast<int>(available.size()) < mu) return {};
  RMatrix table(static_cast<Eigen::Index>(available.size()), mu);
  for (std::size_t j = 0; j < available.size(); ++j) {
    const auto a = alpha_at(info, available[j]);
    for (int k = 0; k < mu; ++k) table(static_cast<Eigen::Index>(j), k) = std::norm(a.values[static_cast<std::size_t>(k)]);
  }
  if (kernels::binomial_coefficient(table.rows(), mu) > kMaxExhaustiveCombinations) return {};
  const auto best = kernels::best_rows_serial(table, mu);
  if (best.abs_det <= kDetTol) return {};
  std::vector<double> out;
  for (int r : best.rows) out.push_back(available[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

std::vector<double> IntensityVector::flat() const {
  std::vector<double> out;
  for (const auto& v : values) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::string_view to_string(ReconstructionMode m) {
  return m == ReconstructionMode::Factored ? "factored" : "exact-fit";
}

std::string_view to_string(ReconstructionMethod m) {
  switch (m) {
    case ReconstructionMethod::PaperQubitClosedForm: return "paper-qubit-closed-form";
    case ReconstructionMethod::Lifting: return "lifting";
    case ReconstructionMethod::ExactFit: return "exact-fit";
  }
  return "lifting";
}

ReconstructionMode parse_mode(std::string_view s) {
  if (s == "factored") return ReconstructionMode::Factored;
  if (s == "exact-fit") return ReconstructionMode::ExactFit;
  throw Error(ErrorKind::ConfigError, "mode must be 'factored' or 'exact-fit', got '" + std::string(s) + "'");
}

LambdaMatrix lambda_matrix(const MinimalPolynomialInfo& info, const std::vector<double>& times) {
  if (times.empty()) throw Error(ErrorKind::DomainError, "no time instants");
  LambdaMatrix lm{RMatrix(static_cast<Eigen::Index>(times.size()), info.mu), times};
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto a = alpha_at(info, times[j]);
    for (int k = 0; k < info.mu; ++k) {
      lm.entries(static_cast<Eigen::Index>(j), k) = std::norm(a.values[static_cast<std::size_t>(k)]);
    }
  }
  return lm;
}

bool check_theorem1(const LambdaMatrix& lm, int mu) {
  if (lm.entries.rows() != mu || lm.entries.cols() != mu) return false;
  return std::abs(lm.entries.determinant()) > kDetTol;
}

std::vector<double> select_times(const MinimalPolynomialInfo& info, double horizon, int grid,
                                 Execution exec) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::DomainError, "horizon must be positive and finite");
  }
  if (grid < info.mu) throw Error(ErrorKind::DomainError, "grid must have at least mu points");
  const int mu = info.mu;
  if (mu == 1) return {0.0};

  const int pick = mu - 1;
  RMatrix table(grid, pick);
  std::vector<double> grid_times(static_cast<std::size_t>(grid));
  for (int g = 0; g < grid; ++g) {
    const double t = horizon * static_cast<double>(g + 1) / static_cast<double>(grid);
    grid_times[static_cast<std::size_t>(g)] = t;
    const auto a = alpha_at(info, t);
    for (int k = 1; k < mu; ++k) table(g, k - 1) = std::norm(a.values[static_cast<std::size_t>(k)]);
  }

  // With t_1 = 0 the first Lambda row is (1, 0, ..., 0), so |det Lambda| is
  // the determinant of the chosen rows restricted to columns 1 .. mu-1.
  kernels::TimeSearchResult best;
  if (kernels::binomial_coefficient(grid, pick) <= kMaxExhaustiveCombinations) {
    best = exec == Execution::Parallel ? kernels::best_rows_parallel(table, pick)
                                       : kernels::best_rows_serial(table, pick);
  } else {
    // Coordinate ascent from evenly spread rows when enumeration is too large.
    log().warn("time grid too large for exhaustive search; using coordinate ascent");
    std::vector<int> rows(static_cast<std::size_t>(pick));
    for (int j = 0; j < pick; ++j) rows[static_cast<std::size_t>(j)] = (j + 1) * grid / (pick + 1);
    auto det_of = [&](const std::vector<int>& rs) {
      RMatrix sub(pick, pick);
      for (int r = 0; r < pick; ++r) sub.row(r) = table.row(rs[static_cast<std::size_t>(r)]);
      return std::abs(sub.determinant());
    };
    double cur = det_of(rows);
    for (bool moved = true; moved;) {
      moved = false;
      for (int slot = 0; slot < pick; ++slot) {
        for (int g = 0; g < grid; ++g) {
          if (std::find(rows.begin(), rows.end(), g) != rows.end()) continue;
          auto trial = rows;
          trial[static_cast<std::size_t>(slot)] = g;
          const double det = det_of(trial);
          if (det > cur) {
            cur = det;
            rows = std::move(trial);
            moved = true;
          }
        }
      }
    }
    std::sort(rows.begin(), rows.end());
    best.rows = rows;
    best.abs_det = cur;
  }
  if (!(best.abs_det > kDetTol)) {
    throw Error(ErrorKind::NoInvertibleTimes, "every grid choice gives |det Lambda| <= 1e-10");
  }
  std::vector<double> times{0.0};
  for (int r : best.rows) times.push_back(grid_times[static_cast<std::size_t>(r)]);
  return times;
}

std::vector<double> select_times(const MinimalPolynomialInfo& info, double horizon, int grid,
                                 int requested_count, Execution exec) {
  if (requested_count != info.mu) {
    throw Error(ErrorKind::DomainError, "p must equal mu: requested " + std::to_string(requested_count) +
                                            " instants for mu = " + std::to_string(info.mu));
  }
  return select_times(info, horizon, grid, exec);
}

IntensityVector recover_intensities(
    const LambdaMatrix& lm, const std::vector<std::vector<MeasurementRecord>>& per_projector) {
  const int mu = static_cast<int>(lm.entries.cols());
  if (!check_theorem1(lm, mu)) {
    throw Error(ErrorKind::SingularLambda, "Lambda must be square with |det| > 1e-10");
  }
  Eigen::JacobiSVD<RMatrix> svd(lm.entries);
  const RVector& s = svd.singularValues();
  const double cond = s(0) / s(s.size() - 1);
  if (cond > 1e6) log().warn("Lambda condition number {:.3e}", cond);

  const Eigen::PartialPivLU<RMatrix> lu(lm.entries);
  IntensityVector iv;
  for (const auto& records : per_projector) {
    if (records.size() != lm.times.size()) {
      throw Error(ErrorKind::DataMismatch, "record count differs from the number of instants");
    }
    RVector m(mu);
    for (int j = 0; j < mu; ++j) {
      const auto& r = records[static_cast<std::size_t>(j)];
      if (!same_time(r.time, lm.times[static_cast<std::size_t>(j)])) {
        throw Error(ErrorKind::DataMismatch, "record time " + std::to_string(r.time) +
                                                 " does not match instant " +
                                                 std::to_string(lm.times[static_cast<std::size_t>(j)]));
      }
      if (r.projector_label != records.front().projector_label) {
        throw Error(ErrorKind::DataMismatch, "mixed projector labels in one group");
      }
      m(j) = r.value;
    }
    const RVector x = lu.solve(m);
    std::vector<double> vals(static_cast<std::size_t>(mu));
    for (int k = 0; k < mu; ++k) {
      double v = x(k);
      if (v < 0.0) {
        if (v < -1e-10) log().warn("negative intensity {} clamped to 0", v);
        v = 0.0;
      }
      vals[static_cast<std::size_t>(k)] = v;
    }
    iv.labels.push_back(records.empty() ? std::string{} : records.front().projector_label);
    iv.values.push_back(std::move(vals));
  }
  return iv;
}

bool is_sigma_y_qubit_fixture(const HermitianOperator& h, const std::vector<Projector>& projectors) {
  if (h.dim() != 2 || projectors.size() != 2) return false;
  CMatrix sy(2, 2);
  sy << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  if ((h.entries() - sy).cwiseAbs().maxCoeff() > 1e-12) return false;
  const double r5 = std::sqrt(5.0);
  CVector v1(2), v2(2);
  v1 << -1.0 / r5, 2.0 / r5;
  v2 << 2.0 / r5, Complex(0.0, 1.0 / r5);
  auto parallel = [](const CVector& a, const CVector& b) {
    return std::abs(std::abs(a.dot(b)) - 1.0) < 1e-10;
  };
  return parallel(projectors[0].direction.components(), v1) &&
         parallel(projectors[1].direction.components(), v2);
}

BlochParameters qubit_closed_form(const IntensityVector& iv) {
  if (iv.values.size() != 2 || iv.values[0].size() != 2 || iv.values[1].size() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "closed form needs 2 projectors x 2 intensities");
  }
  const double i1_1 = iv.values[0][1];
  const double i2_0 = iv.values[1][0];
  const double i2_1 = iv.values[1][1];

  const double cos_theta = (10.0 / 6.0) * (i2_0 - i2_1);
  if (std::abs(cos_theta) > 1.0 + kClampTol) {
    throw Error(ErrorKind::InconsistentData, "cos(theta) = " + std::to_string(cos_theta));
  }
  // sin(theta) cos(phi) and sin(theta) sin(phi).
  const double sc = 1.25 * (2.0 * i1_1 - 1.0 - (i2_0 - i2_1));
  const double ss = 1.25 * (i2_0 + i2_1 - 1.0);

  BlochParameters p;
  p.theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
  p.phi = std::sin(p.theta) < 1e-12 ? 0.0 : wrap_angle(std::atan2(ss, sc));
  return p;
}

double intensity_residual(const Frame& frame, const CVector& x, const std::vector<double>& y) {
  double s = 0.0;
  for (int n = 0; n < frame.size(); ++n) {
    const double r = std::norm(frame.vectors()[static_cast<std::size_t>(n)].dot(x)) - y[static_cast<std::size_t>(n)];
    s += r * r;
  }
  return std::sqrt(s);
}

StateVector general_phase_retrieval(const Frame& frame, const std::vector<double>& intensities,
                                    int refine_iters) {
  const int d = frame.dim();
  if (static_cast<int>(intensities.size()) != frame.size()) {
    throw Error(ErrorKind::DataMismatch, "one intensity per frame vector required");
  }
  const auto span = check_necessary_condition(frame, d);
  if (!span.spans) {
    throw Error(ErrorKind::FrameDeficient, "frame rank " + std::to_string(span.rank) + " < d");
  }

  const RMatrix a = constraint_matrix(frame);
  RVector y(frame.size());
  for (int n = 0; n < frame.size(); ++n) y(n) = intensities[static_cast<std::size_t>(n)];
  Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(a);
  cod.setThreshold(1e-10);
  const RVector coords = cod.solve(y);
  const CMatrix lifted = HermitianBasisCoordinates{coords, d}.to_matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(lifted);

  auto objective = [&](const CVector& v) {
    const double r = intensity_residual(frame, v, intensities);
    return r * r;
  };
  auto descend = [&](CVector x) {
    double f = objective(x);
    double step = 0.1;
    for (int it = 0; it < refine_iters && f > 1e-30; ++it) {
      CVector g = CVector::Zero(d);
      for (int n = 0; n < frame.size(); ++n) {
        const CVector& th = frame.vectors()[static_cast<std::size_t>(n)];
        const Complex ip = th.dot(x);
        g += 2.0 * (std::norm(ip) - intensities[static_cast<std::size_t>(n)]) * ip * th;
      }
      bool improved = false;
      while (step > 1e-16) {
        CVector trial = x - step * g;
        const double ft = objective(trial);
        if (ft < f) {
          x = std::move(trial);
          f = ft;
          improved = true;
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    return std::pair{x, f};
  };

  auto [x, f] = descend(es.eigenvectors().col(d - 1));
  if (f > 1e-20) {
    CVector mixed = CVector::Zero(d);
    for (int j = 0; j < d; ++j) mixed += std::sqrt(std::max(es.eigenvalues()(j), 0.0)) * es.eigenvectors().col(j);
    if (mixed.norm() > 0) {
      auto [x2, f2] = descend(mixed);
      if (f2 < f) x = x2;
    }
  }
  return canonical_phase(make_state(x));
}

StateVector general_phase_retrieval(const Frame& frame, const IntensityVector& iv,
                                    int refine_iters) {
  return general_phase_retrieval(frame, iv.flat(), refine_iters);
}

CVector state_from_angles(const RVector& angles, int d) {
  CVector v(d);
  double tail = 1.0;
  for (int j = 0; j < d - 1; ++j) {
    const double amp = tail * std::cos(angles(j));
    tail *= std::sin(angles(j));
    v(j) = j == 0 ? Complex(amp, 0.0) : amp * std::polar(1.0, angles(d - 1 + j - 1));
  }
  v(d - 1) = tail * std::polar(1.0, angles(2 * d - 3));
  return v;
}

RVector angles_from_state(const CVector& state) {
  const CVector v = canonical_phase(CVector(state / state.norm()));
  const int d = static_cast<int>(v.size());
  RVector angles(2 * d - 2);
  for (int j = 0; j < d - 1; ++j) {
    const double tail = v.tail(d - j - 1).norm();
    angles(j) = std::atan2(tail, std::abs(v(j)));
  }
  for (int j = 1; j < d; ++j) angles(d - 1 + j - 1) = std::arg(v(j));
  return angles;
}

ReconstructionReport reconstruct_dynamic(const HermitianOperator& h,
                                         const std::vector<Projector>& projectors,
                                         const std::vector<MeasurementRecord>& data,
                                         ReconstructionMode mode,
                                         const ReconstructOptions& options) {
  if (projectors.empty()) throw Error(ErrorKind::DegenerateInput, "no projectors");
  for (const auto& p : projectors) {
    if (p.direction.dim() != h.dim()) throw Error(ErrorKind::DimensionMismatch, "projector dimension");
  }
  const int d = h.dim();
  const auto info = minimal_polynomial(h);
  const auto groups = group_by_projector(projectors, data);
  const Frame frame = build_frame(h, projectors);
  const SpanningVerdict spanning = check_necessary_condition(frame, d);

  ReconstructionDiagnostics diag;
  diag.mu = info.mu;
  diag.spanning = spanning;
  WitnessSearchOptions wopt;
  wopt.attempts = options.injectivity_attempts;
  wopt.seed = options.seed;
  wopt.execution = options.execution;
  diag.injectivity = check_injectivity(frame, wopt);

  std::optional<StateVector> recovered;
  ReconstructionMethod method = ReconstructionMethod::Lifting;

  if (mode == ReconstructionMode::Factored) {
    const std::vector<double> times = distinct_times(groups.front());
    for (const auto& g : groups) {
      const auto ts = distinct_times(g);
      if (ts.size() != times.size() || g.size() != times.size() ||
          !std::equal(ts.begin(), ts.end(), times.begin(), same_time)) {
        throw Error(ErrorKind::DataMismatch, "every projector must be measured at the same instants");
      }
    }
    diag.times = times;
    auto outcome = run_factored(h, projectors, groups, times, info, frame, spanning, options.refine_iters);
    diag.det_lambda = std::abs(outcome.lm.entries.determinant());
    Eigen::JacobiSVD<RMatrix> svd(outcome.lm.entries);
    const double cond = svd.singularValues()(0) / svd.singularValues()(info.mu - 1);
    if (cond > 1e6) diag.lambda_condition = cond;
    recovered = std::move(outcome.state);
    method = outcome.method;
    diag.starts = 1;

    const auto krylov_all = [&] {
      std::vector<std::vector<CVector>> out;
      for (const auto& p : projectors) out.push_back(krylov_vectors(h, p.direction, info.mu));
      return out;
    }();
    std::vector<double> misfit;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (const auto& r : groups[i]) {
        misfit.push_back(factored_prediction(info, krylov_all[i], recovered->components(), r.time) - r.value);
      }
    }
    diag.residual = rms(misfit);
  } else {
    const int params = 2 * d - 2;
    if (static_cast<int>(data.size()) < params) {
      throw Error(ErrorKind::DataMismatch, "exact fit needs at least 2d - 2 records");
    }
    diag.times = distinct_times(data);
    const auto probes = exact_probe_vectors(h, projectors, data);
    std::vector<double> values;
    values.reserve(data.size());
    std::int64_t min_shots = 0;
    for (const auto& r : data) {
      values.push_back(r.value);
      if (r.shots) min_shots = min_shots == 0 ? *r.shots : std::min(min_shots, *r.shots);
    }

    std::vector<RVector> starts;
    // Warm start from the factored pipeline on the best-conditioned instants.
    std::vector<double> common = distinct_times(groups.front());
    for (const auto& g : groups) {
      const auto ts = distinct_times(g);
      std::vector<double> keep;
      for (double t : common) {
        if (std::any_of(ts.begin(), ts.end(), [&](double u) { return same_time(t, u); })) keep.push_back(t);
      }
      common = std::move(keep);
    }
    const auto subset = best_time_subset(info, common);
    if (!subset.empty()) {
      try {
        auto outcome = run_factored(h, projectors, groups, subset, info, frame, spanning, options.refine_iters);
        starts.push_back(angles_from_state(outcome.state.components()));
        diag.det_lambda = std::abs(outcome.lm.entries.determinant());
      } catch (const Error& e) {
        log().info("factored warm start unavailable: {}", e.what());
      }
    }
    for (int s = 0; s < options.random_starts; ++s) {
      std::mt19937_64 rng(derive_seed(options.seed, 1000 + static_cast<std::uint64_t>(s)));
      std::normal_distribution<double> normal;
      CVector v(d);
      for (int j = 0; j < d; ++j) v(j) = Complex(normal(rng), normal(rng));
      starts.push_back(angles_from_state(v));
    }

    ExactResidual functor;
    functor.probes = &probes;
    functor.observed = &values;
    functor.d = d;
    const auto fits = map_indices<FitResult>(static_cast<int>(starts.size()), options.execution,
                                             [&](int s) {
                                               try {
                                                 return fit_from(functor, starts[static_cast<std::size_t>(s)]);
                                               } catch (...) {
                                                 return FitResult{};
                                               }
                                             });
    std::size_t best = 0;
    for (std::size_t s = 1; s < fits.size(); ++s) {
      if (fits[s].residual < fits[best].residual) best = s;
    }
    const double threshold = kExactFitTol + (min_shots > 0 ? 5.0 * 0.5 / std::sqrt(static_cast<double>(min_shots)) : 0.0);
    if (!(fits[best].residual <= threshold)) {
      throw Error(ErrorKind::NonConvergence, "exact-fit RMS residual " + std::to_string(fits[best].residual) +
                                                 " exceeds " + std::to_string(threshold));
    }
    recovered = canonical_phase(make_state(state_from_angles(fits[best].angles, d)));
    method = ReconstructionMethod::ExactFit;
    diag.residual = fits[best].residual;
    diag.starts = static_cast<int>(starts.size());
  }

  double disc = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (const auto& r : groups[i]) {
      disc = std::max(disc, model_discrepancy(h, *recovered, projectors[i], r.time));
    }
  }
  diag.model_discrepancy_max = disc;

  ReconstructionReport report{*recovered, std::nullopt, method, std::move(diag)};
  if (options.truth) report.fidelity_to_truth = fidelity(*options.truth, report.recovered_state);
  return report;
}

}  // namespace strobo
