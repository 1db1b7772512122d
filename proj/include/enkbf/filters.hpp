#pragma once

#include <optional>
#include <string>

#include "enkbf/pseudo_time.hpp"

namespace enkbf {

enum class FilterKind { LETKF, ETKBF, DETKBF, BGR09State, BR10State,
                        KFReference };

enum class StepScheme { EulerForward, DSI };

struct IntegrationScheme {
  StepScheme scheme = StepScheme::DSI;
  StepSchedule schedule;
};

// How the ensemble mean is updated in the perturbation-flow filters:
// PerStep advances mean weights along the pseudo-time flow; FinalGain
// applies the Kalman gain built from the final analysis covariance.
enum class MeanUpdateMode { PerStep, FinalGain };

struct AnalysisResult {
  Ensemble analysis;  // full role
  std::optional<WeightMatrix> weights;
  std::optional<Vector> mean_weights;
  StiffnessReport stiffness;
  int steps_used = 0;
  bool failed = false;
  int failed_at_step = -1;
  std::string failure_reason;
};

// ---------------------------------------------------------------------------
// Direct Kalman filter reference (oracle-grade, dense)

struct KFAnalysis {
  Vector mean;
  Matrix covariance;
};

KFAnalysis kf_reference_analysis(const Vector& x_b, const Matrix& p_b,
                                 const ObservationBatch& obs);

// Information-form covariance (P_b^-1 + H^T R^-1 H)^-1; the independent
// algebraic route to the same analysis covariance.
Matrix kf_covariance_information_form(const Matrix& p_b, const ObsOperator& h,
                                      const ObsErrorModel& r);

// ---------------------------------------------------------------------------
// Ensemble-space weight solutions (shared by global and local analyses)

struct WeightSolution {
  Matrix w;                       // M x M transform
  std::optional<Vector> w_mean;   // mean weights (absent for DETKBF)
  StiffnessReport stiffness;
  int steps_used = 0;
  bool failed = false;
  int failed_at_step = -1;
  std::string failure_reason;
};

// LETKF: Ptilde^a = (Y^T R^-1 Y + (M-1) I)^-1, symmetric-root transform
// W = [(M-1) Ptilde^a]^(1/2), mean weights from the innovation y - H xbar.
WeightSolution solve_letkf_weights(const Matrix& y_pert,
                                   const Vector& innovation,
                                   const ObsErrorModel& r);

// ETKBF: integrate dW/ds = -(1/2) Ptilde Y^T K^-1 Y W from W(0) = I over
// the schedule; mean weights either advanced per step or assembled from
// the final gain. innovation_base = H xbar^b - y.
WeightSolution solve_etkbf_weights(const Matrix& y_pert,
                                   const Vector& innovation_base,
                                   const ObsErrorModel& r,
                                   const IntegrationScheme& scheme,
                                   MeanUpdateMode mode);

// DETKBF: integrate the full-ensemble weight flow from Wbar(0) = I;
// y_full is the full (uncentered) obs-space ensemble.
WeightSolution solve_detkbf_weights(const Matrix& y_full, const Vector& y_obs,
                                    const ObsErrorModel& r,
                                    const IntegrationScheme& scheme);

// ---------------------------------------------------------------------------
// Single pseudo-time steps (building blocks; also the equivalence oracles)

// One step of the ETKBF weight flow. Returns false and leaves the state
// untouched beyond the attempted update when non-finite entries appear.
struct EtkbfState {
  Matrix w;
  Vector w_mean;
};

bool etkbf_step(EtkbfState& state, const Matrix& y_pert,
                const Vector& innovation_base, const ObsErrorModel& r,
                double ds, StepScheme scheme, MeanUpdateMode mode);

bool detkbf_step(Matrix& w_full, const Matrix& y_full, const Vector& y_obs,
                 const ObsErrorModel& r, double ds, StepScheme scheme);

// One step of the state-space parents. BGR09 advances a perturbation
// ensemble plus the mean; BR10 advances the full ensemble (mean unused).
struct StateFlow {
  Ensemble ens;
  Vector mean;
};

bool state_space_step(StateFlow& state, const ObservationBatch& obs,
                      double ds, StepScheme scheme, FilterKind kind);

// ---------------------------------------------------------------------------
// Full global analyses

AnalysisResult letkf_analysis(const Ensemble& ens_b,
                              const ObservationBatch& obs, double inflation);

// kind in {ETKBF, DETKBF, BGR09State, BR10State}. Applies inflation,
// initializes weights or states, iterates the schedule and assembles the
// analysis ensemble. Failures are flagged with the pseudo-step index.
AnalysisResult run_kbf_analysis(FilterKind kind, const Ensemble& ens_b,
                                const ObservationBatch& obs,
                                const IntegrationScheme& scheme,
                                MeanUpdateMode mode, double inflation);

const char* filter_kind_name(FilterKind kind);

}  // namespace enkbf
