#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strobo/core_types.hpp"
#include "strobo/frame.hpp"
#include "strobo/injectivity.hpp"
#include "strobo/measurement.hpp"
#include "strobo/parallel.hpp"
#include "strobo/spectral.hpp"

namespace strobo {

/// p x mu matrix of |alpha_k(t_j)|^2 linking probabilities to intensities.
struct LambdaMatrix {
  RMatrix entries;
  std::vector<double> times;
};

/// Per projector i, the mu intensities |<H^k i|psi0>|^2.
struct IntensityVector {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;

  /// Flattened in frame order (i * mu + k).
  std::vector<double> flat() const;
};

enum class ReconstructionMode { Factored, ExactFit };
enum class ReconstructionMethod { PaperQubitClosedForm, Lifting, ExactFit };

std::string_view to_string(ReconstructionMode m);
std::string_view to_string(ReconstructionMethod m);
ReconstructionMode parse_mode(std::string_view s);

struct ReconstructionDiagnostics {
  int mu = 0;
  std::vector<double> times;
  double det_lambda = 0.0;
  std::optional<double> lambda_condition;  // set when above 1e6
  SpanningVerdict spanning;
  InjectivityVerdict injectivity;
  double residual = 0.0;  // RMS data misfit under the mode's forward model
  double model_discrepancy_max = 0.0;
  int starts = 0;
};

struct ReconstructionReport {
  StateVector recovered_state;
  std::optional<double> fidelity_to_truth;
  ReconstructionMethod method = ReconstructionMethod::Lifting;
  ReconstructionDiagnostics diagnostics;
};

LambdaMatrix lambda_matrix(const MinimalPolynomialInfo& info, const std::vector<double>& times);

/// p == mu and |det Lambda| > 1e-10.
bool check_theorem1(const LambdaMatrix& lm, int mu);

/// t_1 = 0 plus mu - 1 instants from the grid {g * horizon / grid : g = 1..grid}
/// maximizing |det Lambda|.
std::vector<double> select_times(const MinimalPolynomialInfo& info, double horizon, int grid,
                                 Execution exec = Execution::Parallel);

/// As above, but rejects a requested instant count different from mu.
std::vector<double> select_times(const MinimalPolynomialInfo& info, double horizon, int grid,
                                 int requested_count, Execution exec = Execution::Parallel);

/// Solves Lambda x = m for each projector. `per_projector[i]` holds that
/// projector's records at exactly the instants of `lm.times`.
IntensityVector recover_intensities(const LambdaMatrix& lm,
                                    const std::vector<std::vector<MeasurementRecord>>& per_projector);

/// True when H is sigma_y and the projectors are (-1, 2)/sqrt5 and (2, i)/sqrt5
/// (up to phase, in that order).
bool is_sigma_y_qubit_fixture(const HermitianOperator& h, const std::vector<Projector>& projectors);

/// Closed-form theta and phi for the sigma_y fixture frame.
BlochParameters qubit_closed_form(const IntensityVector& iv);

/// Lifting least squares followed by residual descent.
StateVector general_phase_retrieval(const Frame& frame, const std::vector<double>& intensities,
                                    int refine_iters = 200);
StateVector general_phase_retrieval(const Frame& frame, const IntensityVector& iv,
                                    int refine_iters = 200);

/// sqrt(sum_n (|<theta_n|x>|^2 - y_n)^2).
double intensity_residual(const Frame& frame, const CVector& x, const std::vector<double>& y);

struct ReconstructOptions {
  std::optional<StateVector> truth;
  std::uint64_t seed = 0;
  int random_starts = 8;
  int injectivity_attempts = 64;
  int refine_iters = 200;
  Execution execution = Execution::Parallel;
};

/// Full pipeline: data -> intensities -> state (factored) or direct fit of
/// exact-evolution predictions (exact-fit).
ReconstructionReport reconstruct_dynamic(const HermitianOperator& h,
                                         const std::vector<Projector>& projectors,
                                         const std::vector<MeasurementRecord>& data,
                                         ReconstructionMode mode,
                                         const ReconstructOptions& options = {});

/// Generalized spherical coordinates with canonical phase: 2d - 2 angles.
CVector state_from_angles(const RVector& angles, int d);
RVector angles_from_state(const CVector& state);

}  // namespace strobo
