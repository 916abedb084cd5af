#include <gtest/gtest.h>

#include "strobo/error.hpp"
#include "strobo/reconstruct.hpp"
#include "test_support.hpp"

using namespace strobo;
using namespace strobo::testing;

namespace {

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no strobo::Error thrown";
  return ErrorKind::DomainError;
}

MeasurementRecord rec(std::string label, double t, double v) { return {std::move(label), t, v, std::nullopt}; }

const MinimalPolynomialInfo& sy_info() {
  static const auto info = minimal_polynomial(sigma_y());
  return info;
}

// Direct projections of the four qubit frame intensities for a Bloch state.
std::array<double, 4> direct_intensities(const StateVector& psi) {
  const auto f = build_frame(sigma_y(), qubit_projectors());
  std::array<double, 4> out{};
  for (int n = 0; n < 4; ++n) out[static_cast<std::size_t>(n)] = std::norm(f.vectors()[static_cast<std::size_t>(n)].dot(psi.components()));
  return out;
}

IntensityVector qubit_iv(std::array<double, 4> v) {
  return IntensityVector{{"M1", "M2"}, {{v[0], v[1]}, {v[2], v[3]}}};
}

}  // namespace

TEST(LambdaMatrix, QubitRows) {
  for (double t2 : {0.3, kPi / 4, 2.0}) {
    const auto lm = lambda_matrix(sy_info(), {0.0, t2});
    EXPECT_NEAR(lm.entries(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(lm.entries(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(lm.entries(1, 0), std::pow(std::cos(t2), 2), 1e-12);
    EXPECT_NEAR(lm.entries(1, 1), std::pow(std::sin(t2), 2), 1e-12);
    EXPECT_NEAR(lm.entries.determinant(), std::pow(std::sin(t2), 2), 1e-12);
  }
}

TEST(LambdaMatrix, SingleTerm) {
  const auto info = minimal_polynomial(HermitianOperator(CMatrix::Identity(2, 2)));
  const auto lm = lambda_matrix(info, {1.3});
  ASSERT_EQ(lm.entries.rows(), 1);
  EXPECT_NEAR(lm.entries(0, 0), 1.0, 1e-15);
}

TEST(LambdaMatrix, RowsRegenerateFromAlpha) {
  std::mt19937_64 rng(6);
  const auto info = minimal_polynomial(random_hermitian(rng, 4));
  const std::vector<double> ts = {0.0, 0.4, 1.1, 2.9};
  const auto lm = lambda_matrix(info, ts);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const auto a = alpha_at(info, ts[j]);
    for (int k = 0; k < info.mu; ++k) {
      EXPECT_GE(lm.entries(static_cast<Eigen::Index>(j), k), 0.0);
      EXPECT_NEAR(lm.entries(static_cast<Eigen::Index>(j), k), std::norm(a.values[static_cast<std::size_t>(k)]), 1e-12);
    }
  }
}

TEST(LambdaMatrix, EmptyTimes) { EXPECT_THROW(lambda_matrix(sy_info(), {}), Error); }

TEST(InvertibilityGate, SquareAndNonsingular) {
  EXPECT_TRUE(check_theorem1(lambda_matrix(sy_info(), {0.0, kPi / 4}), 2));
  EXPECT_FALSE(check_theorem1(lambda_matrix(sy_info(), {0.0, kPi}), 2));
  EXPECT_FALSE(check_theorem1(lambda_matrix(sy_info(), {0.0, 0.5, 1.0}), 2));
}

TEST(SelectTimes, QubitGrid) {
  const auto ts = select_times(sy_info(), kPi, 64);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0], 0.0);
  EXPECT_NEAR(ts[1], kPi / 2, kPi / 64);
  EXPECT_NEAR(std::abs(lambda_matrix(sy_info(), ts).entries.determinant()), 1.0, 1e-3);
}

TEST(SelectTimes, SingleTerm) {
  const auto info = minimal_polynomial(HermitianOperator(CMatrix::Identity(3, 3)));
  const auto ts = select_times(info, 1.0, 4);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0], 0.0);
  EXPECT_EQ(kind_of([&] { select_times(info, 1.0, 4, 2); }), ErrorKind::DomainError);
}

TEST(SelectTimes, Failures) {
  EXPECT_EQ(kind_of([] { select_times(sy_info(), 2 * kPi, 2); }), ErrorKind::NoInvertibleTimes);
  EXPECT_EQ(kind_of([] { select_times(sy_info(), kPi, 1); }), ErrorKind::DomainError);
  EXPECT_EQ(kind_of([] { select_times(sy_info(), -1.0, 8); }), ErrorKind::DomainError);
  EXPECT_EQ(kind_of([] { select_times(sy_info(), 1.0, 1, 2); }), ErrorKind::DomainError);
}

TEST(SelectTimes, SerialMatchesParallel) {
  std::mt19937_64 rng(12);
  const auto info = minimal_polynomial(random_hermitian(rng, 4));
  EXPECT_EQ(select_times(info, 5.0, 24, Execution::Serial), select_times(info, 5.0, 24, Execution::Parallel));
}

TEST(RecoverIntensities, PrintedFormulas) {
  const double t2 = 0.9, m0 = 0.31, m1 = 0.47;
  const auto lm = lambda_matrix(sy_info(), {0.0, t2});
  const auto iv = recover_intensities(lm, {{rec("M1", 0.0, m0), rec("M1", t2, m1)}});
  EXPECT_NEAR(iv.values[0][0], m0, 1e-15);
  const double c2 = std::pow(std::cos(t2), 2), s2 = std::pow(std::sin(t2), 2);
  EXPECT_NEAR(iv.values[0][1], (-c2 * m0 + m1) / s2, 1e-12);
  EXPECT_EQ(iv.labels[0], "M1");
}

TEST(RecoverIntensities, SingleTerm) {
  const auto info = minimal_polynomial(HermitianOperator(CMatrix::Identity(2, 2)));
  const auto iv = recover_intensities(lambda_matrix(info, {2.0}), {{rec("p", 2.0, 0.37)}});
  EXPECT_NEAR(iv.values[0][0], 0.37, 1e-15);
}

TEST(RecoverIntensities, Errors) {
  const auto singular = lambda_matrix(sy_info(), {0.0, kPi});
  EXPECT_EQ(kind_of([&] { recover_intensities(singular, {{rec("M1", 0.0, 0.2), rec("M1", kPi, 0.2)}}); }),
            ErrorKind::SingularLambda);
  const auto lm = lambda_matrix(sy_info(), {0.0, 1.0});
  EXPECT_EQ(kind_of([&] { recover_intensities(lm, {{rec("M1", 0.0, 0.2), rec("M1", 1.5, 0.2)}}); }),
            ErrorKind::DataMismatch);
  EXPECT_EQ(kind_of([&] { recover_intensities(lm, {{rec("M1", 0.0, 0.2)}}); }), ErrorKind::DataMismatch);
}

TEST(RecoverIntensities, ClampsSmallNegatives) {
  const double t2 = 1.0;
  const auto lm = lambda_matrix(sy_info(), {0.0, t2});
  const double c2 = std::pow(std::cos(t2), 2);
  const auto iv = recover_intensities(lm, {{rec("M1", 0.0, 0.5), rec("M1", t2, c2 * 0.5 - 1e-13)}});
  EXPECT_EQ(iv.values[0][1], 0.0);
}

TEST(ClosedForm, PrintedIntensityFormulas) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = random_bloch(rng);
    const double ct = std::cos(b.theta), st = std::sin(b.theta);
    const auto d = direct_intensities(bloch_to_state(b));
    EXPECT_NEAR(d[0], (5 - 3 * ct - 4 * std::cos(b.phi) * st) / 10, 1e-12);
    EXPECT_NEAR(d[1], (5 + 3 * ct + 4 * std::cos(b.phi) * st) / 10, 1e-12);
    EXPECT_NEAR(d[2], (5 + 3 * ct + 4 * std::sin(b.phi) * st) / 10, 1e-12);
    EXPECT_NEAR(d[3], (5 - 3 * ct + 4 * std::sin(b.phi) * st) / 10, 1e-12);
  }
}

TEST(ClosedForm, GroundState) {
  const auto p = qubit_closed_form(qubit_iv({0.2, 0.8, 0.8, 0.2}));
  EXPECT_EQ(p.theta, 0.0);
  EXPECT_EQ(p.phi, 0.0);
}

TEST(ClosedForm, EquatorStates) {
  auto p = qubit_closed_form(qubit_iv(direct_intensities(make_state({1.0, 1.0}))));
  EXPECT_NEAR(p.theta, kPi / 2, 1e-9);
  EXPECT_NEAR(std::min(p.phi, 2 * kPi - p.phi), 0.0, 1e-9);
  const auto d = direct_intensities(make_state({1.0, Complex(0.0, 1.0)}));
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_NEAR(d[1], 0.5, 1e-15);
  EXPECT_NEAR(d[2], 0.9, 1e-15);
  EXPECT_NEAR(d[3], 0.9, 1e-15);
  p = qubit_closed_form(qubit_iv(d));
  EXPECT_NEAR(p.theta, kPi / 2, 1e-9);
  EXPECT_NEAR(p.phi, kPi / 2, 1e-9);
}

TEST(ClosedForm, InconsistentData) {
  EXPECT_EQ(kind_of([] { qubit_closed_form(qubit_iv({0.2, 0.8, 1.0, 0.0})); }), ErrorKind::InconsistentData);
}

TEST(ClosedForm, FixtureDetection) {
  EXPECT_TRUE(is_sigma_y_qubit_fixture(sigma_y(), qubit_projectors()));
  auto swapped = qubit_projectors();
  std::swap(swapped[0], swapped[1]);
  EXPECT_FALSE(is_sigma_y_qubit_fixture(sigma_y(), swapped));
  auto phased = qubit_projectors();
  phased[0] = projector({Complex(0.0, -1.0), Complex(0.0, 2.0)}, "M1");
  EXPECT_TRUE(is_sigma_y_qubit_fixture(sigma_y(), phased));
  EXPECT_FALSE(is_sigma_y_qubit_fixture(diag({1.0, -1.0}), qubit_projectors()));
}

TEST(GeneralPhaseRetrieval, StandardBasis) {
  CVector e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  const auto s = general_phase_retrieval(Frame::from_vectors({e1, e2}), std::vector<double>{1.0, 0.0});
  EXPECT_NEAR(fidelity(s, make_state({1.0, 0.0})), 1.0, 1e-12);
}

TEST(GeneralPhaseRetrieval, QubitFrame) {
  const auto f = build_frame(sigma_y(), qubit_projectors());
  auto s = general_phase_retrieval(f, std::vector<double>{0.2, 0.8, 0.8, 0.2});
  EXPECT_NEAR(fidelity(s, make_state({1.0, 0.0})), 1.0, 1e-12);
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto truth = random_state(rng, 2);
    const auto d = direct_intensities(truth);
    const std::vector<double> y(d.begin(), d.end());
    s = general_phase_retrieval(f, y);
    EXPECT_GT(fidelity(s, truth), 1 - 1e-8);
    EXPECT_LT(intensity_residual(f, s.components(), y), 1e-10);
  }
}

TEST(GeneralPhaseRetrieval, RandomInjectiveFramesInC3) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CVector> vs;
    for (int n = 0; n < 12; ++n) vs.push_back(random_vector(rng, 3));
    const auto f = Frame::from_vectors(vs);
    const auto truth = random_state(rng, 3);
    std::vector<double> y;
    for (const auto& v : vs) y.push_back(std::norm(v.dot(truth.components())));
    const auto s = general_phase_retrieval(f, y);
    EXPECT_GT(fidelity(s, truth), 1 - 1e-8);
  }
}

TEST(GeneralPhaseRetrieval, Errors) {
  CVector e1(2);
  e1 << 1.0, 0.0;
  EXPECT_EQ(kind_of([&] { general_phase_retrieval(Frame::from_vectors({e1}), std::vector<double>{1.0}); }),
            ErrorKind::FrameDeficient);
  EXPECT_EQ(kind_of([&] { general_phase_retrieval(build_frame(sigma_y(), qubit_projectors()), std::vector<double>{1.0}); }),
            ErrorKind::DataMismatch);
}

TEST(Angles, RoundTrip) {
  std::mt19937_64 rng(16);
  for (int d = 2; d <= 5; ++d) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = random_state(rng, d);
      const RVector a = angles_from_state(s.components());
      EXPECT_EQ(a.size(), 2 * d - 2);
      const CVector back = state_from_angles(a, d);
      EXPECT_NEAR(back.norm(), 1.0, 1e-12);
      EXPECT_NEAR(fidelity(make_state(back), s), 1.0, 1e-12);
    }
  }
}

TEST(Modes, Strings) {
  EXPECT_EQ(to_string(ReconstructionMethod::PaperQubitClosedForm), "paper-qubit-closed-form");
  EXPECT_EQ(to_string(ReconstructionMethod::Lifting), "lifting");
  EXPECT_EQ(to_string(ReconstructionMethod::ExactFit), "exact-fit");
  EXPECT_EQ(parse_mode("exact-fit"), ReconstructionMode::ExactFit);
  EXPECT_EQ(parse_mode("factored"), ReconstructionMode::Factored);
  EXPECT_EQ(kind_of([] { parse_mode("fast"); }), ErrorKind::ConfigError);
}

TEST(ReconstructDynamic, FactoredFixture) {
  const auto truth = bloch_to_state({1.0, 2.0});
  const auto data = simulate_records(sigma_y(), truth, qubit_projectors(), {0.0, kPi / 4}, DataModel::Factored);
  ReconstructOptions opt;
  opt.truth = truth;
  const auto r = reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::Factored, opt);
  EXPECT_EQ(r.method, ReconstructionMethod::PaperQubitClosedForm);
  ASSERT_TRUE(r.fidelity_to_truth.has_value());
  EXPECT_GT(*r.fidelity_to_truth, 1 - 1e-9);
  EXPECT_EQ(r.diagnostics.mu, 2);
  EXPECT_NEAR(r.diagnostics.det_lambda, 0.5, 1e-12);
  EXPECT_TRUE(r.diagnostics.spanning.spans);
  EXPECT_EQ(r.diagnostics.injectivity.status, InjectivityStatus::Injective);
  EXPECT_GE(r.diagnostics.residual, 0.0);
  EXPECT_LT(r.diagnostics.residual, 1e-12);
}

TEST(ReconstructDynamic, NoTruthNoFidelity) {
  const auto data = simulate_records(sigma_y(), make_state({1.0, 0.0}), qubit_projectors(), {0.0, 1.0}, DataModel::Factored);
  const auto r = reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::Factored);
  EXPECT_FALSE(r.fidelity_to_truth.has_value());
  EXPECT_NEAR(fidelity(r.recovered_state, make_state({1.0, 0.0})), 1.0, 1e-12);
}

TEST(ReconstructDynamic, ExactDataThroughFactoredPath) {
  const auto ground = make_state({1.0, 0.0});
  const auto data = simulate_records(sigma_y(), ground, qubit_projectors(), {0.0, kPi / 4}, DataModel::Exact);
  const auto r = reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::Factored);
  EXPECT_GT(r.diagnostics.model_discrepancy_max, 0.1);
  EXPECT_GT(r.diagnostics.residual, 0.0);
}

TEST(ReconstructDynamic, ExactFitFourInstants) {
  std::mt19937_64 rng(19);
  const std::vector<double> times = {0.0, kPi / 8, kPi / 4, 3 * kPi / 8};
  for (int trial = 0; trial < 10; ++trial) {
    const auto truth = random_state(rng, 2);
    const auto data = simulate_records(sigma_y(), truth, qubit_projectors(), times, DataModel::Exact);
    ReconstructOptions opt;
    opt.truth = truth;
    const auto r = reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::ExactFit, opt);
    EXPECT_EQ(r.method, ReconstructionMethod::ExactFit);
    EXPECT_GT(*r.fidelity_to_truth, 1 - 1e-8);
    EXPECT_GE(r.diagnostics.starts, 8);
    EXPECT_LE(r.diagnostics.starts, 9);
  }
}

TEST(ReconstructDynamic, ExactFitQutrit) {
  std::mt19937_64 rng(21);
  const auto h = random_hermitian(rng, 3);
  const std::vector<Projector> ps = {Projector{random_state(rng, 3), "a"}, Projector{random_state(rng, 3), "b"}};
  const auto truth = random_state(rng, 3);
  const std::vector<double> times = {0.0, 0.4, 0.9, 1.5, 2.2};
  const auto data = simulate_records(h, truth, ps, times, DataModel::Exact);
  ReconstructOptions opt;
  opt.truth = truth;
  const auto r = reconstruct_dynamic(h, ps, data, ReconstructionMode::ExactFit, opt);
  EXPECT_GT(*r.fidelity_to_truth, 1 - 1e-8);
}

TEST(ReconstructDynamic, LiftingForGeneralSystems) {
  std::mt19937_64 rng(22);
  const auto h = random_hermitian(rng, 3);
  std::vector<Projector> ps;
  for (int i = 0; i < 4; ++i) ps.push_back(Projector{random_state(rng, 3), "p" + std::to_string(i)});
  const auto truth = random_state(rng, 3);
  const auto info = minimal_polynomial(h);
  const auto times = select_times(info, 3.0, 30);
  const auto lm = lambda_matrix(info, times);
  std::vector<MeasurementRecord> data;
  for (const auto& p : ps) {
    const auto kv = krylov_vectors(h, p.direction, info.mu);
    RVector intensities(info.mu);
    for (int k = 0; k < info.mu; ++k) intensities(k) = std::norm(kv[static_cast<std::size_t>(k)].dot(truth.components()));
    const RVector m = lm.entries * intensities;
    for (std::size_t j = 0; j < times.size(); ++j) {
      data.push_back({p.label, times[j], m(static_cast<Eigen::Index>(j)), std::nullopt});
    }
  }
  ReconstructOptions opt;
  opt.truth = truth;
  const auto r = reconstruct_dynamic(h, ps, data, ReconstructionMode::Factored, opt);
  EXPECT_EQ(r.method, ReconstructionMethod::Lifting);
  EXPECT_GT(*r.fidelity_to_truth, 1 - 1e-8);
}

TEST(ReconstructDynamic, Errors) {
  const auto ground = make_state({1.0, 0.0});
  auto data = simulate_records(sigma_y(), ground, qubit_projectors(), {0.0, kPi}, DataModel::Factored);
  EXPECT_EQ(kind_of([&] { reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::Factored); }),
            ErrorKind::SingularLambda);
  data = simulate_records(sigma_y(), ground, qubit_projectors(), {0.0, 1.0}, DataModel::Factored);
  data[0].projector_label = "M9";
  EXPECT_EQ(kind_of([&] { reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::Factored); }),
            ErrorKind::DataMismatch);
  data = simulate_records(sigma_y(), ground, qubit_projectors(), {0.0, 1.0}, DataModel::Factored);
  data[3].time = 1.2;
  EXPECT_EQ(kind_of([&] { reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::Factored); }),
            ErrorKind::DataMismatch);
  const HermitianOperator id(CMatrix::Identity(2, 2));
  data = simulate_records(id, ground, {projector({1.0, 0.0}, "p")}, {0.5}, DataModel::Factored);
  EXPECT_EQ(kind_of([&] { reconstruct_dynamic(id, {projector({1.0, 0.0}, "p")}, data, ReconstructionMode::Factored); }),
            ErrorKind::FrameDeficient);
}

TEST(ReconstructDynamic, ExactFitNonConvergenceOnContradictoryData) {
  std::vector<MeasurementRecord> data;
  for (const char* l : {"M1", "M2"})
    for (double t : {0.0, 0.4, 0.8, 1.2}) data.push_back(rec(l, t, t == 0.0 ? 1.0 : 0.0));
  EXPECT_EQ(kind_of([&] { reconstruct_dynamic(sigma_y(), qubit_projectors(), data, ReconstructionMode::ExactFit); }),
            ErrorKind::NonConvergence);
}
