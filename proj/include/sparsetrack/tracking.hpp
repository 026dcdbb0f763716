#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>
#include <vector>

#include "sparsetrack/common.hpp"
#include "sparsetrack/model.hpp"
#include "sparsetrack/pursuit.hpp"

namespace sparsetrack::tracking {

// One-step predictor F with f_ij = lambda_ji * alpha: the superposition of
// all possible coordinate transitions under a uniform AR coefficient.
class PredictorMatrix {
 public:
  PredictorMatrix(const model::TransitionMatrix& lambda, double alpha)
      : f_(alpha * lambda.probabilities().transpose()) {
    if (!(std::abs(alpha) < 1.0)) throw InvalidParameter("PredictorMatrix: |alpha| must be < 1");
    const double radius = f_.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius < 1.0)) throw NumericError("PredictorMatrix: spectral radius must be < 1");
  }

  const Matrix& matrix() const { return f_; }

 private:
  Matrix f_;
};

inline PredictorMatrix build_predictor(const model::TransitionMatrix& lambda, double alpha) {
  return PredictorMatrix(lambda, alpha);
}

struct PredictionState {
  Vector x_pred;  // predicted state
  Matrix p_pred;  // prediction-error covariance
};

struct FilterState {
  Vector x_hat;      // filtered estimate, zero off support
  Matrix p;          // error covariance, block-diagonal over {I, I^c}
  IndexSet support;  // support detected by the last measurement update
};

enum class PursuitVariant { plain, robust };

namespace detail {

// Covariance after a support-restricted measurement update: the posterior
// block on the support, the prediction block on its complement and exactly
// zero cross blocks.
inline Matrix blockwise_covariance(const Matrix& p_pred, const IndexSet& support,
                                   const Matrix& posterior) {
  Matrix p = p_pred;
  for (int i : support) {
    p.row(i).setZero();
    p.col(i).setZero();
  }
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = 0; b < support.size(); ++b)
      p(support[a], support[b]) = posterior(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return p;
}

}  // namespace detail

// Measurement update of the dynamic pursuit recursion: run the predictive
// pursuit with the prediction as prior, then assemble the block-wise error
// covariance. An empty detected support passes the prediction through.
inline FilterState measurement_update(const Vector& y, const Matrix& h, const Matrix& r_inv,
                                      const PredictionState& pred, int k_max,
                                      PursuitVariant variant) {
  const pursuit::Prior prior{pred.x_pred, pred.p_pred};
  const pursuit::RecoveryResult rec = variant == PursuitVariant::plain
                                          ? pursuit::promp(y, h, r_inv, prior, k_max)
                                          : pursuit::rpromp(y, h, r_inv, prior, k_max);

  FilterState state;
  state.support = rec.support;
  if (rec.support.empty()) {
    state.x_hat = Vector::Zero(h.cols());
    state.p = pred.p_pred;
    return state;
  }
  state.x_hat = rec.x_hat;
  const auto sol = pursuit::detail::mmse_rec_full(y, h, r_inv, prior, rec.support);
  state.p = detail::blockwise_covariance(pred.p_pred, rec.support, sol.posterior_cov);
  return state;
}

// Time update: x_pred = F x_hat, P_pred = F P F' + Q with diagonal Q.
// The covariance is symmetrized to keep round-off from accumulating.
inline PredictionState predict(const FilterState& state, const PredictorMatrix& predictor,
                               const Vector& q_diag) {
  if (q_diag.size() != state.p.rows()) throw InvalidDimension("predict: Q size must match state");
  if (!(q_diag.minCoeff() > 0.0)) throw InvalidParameter("predict: Q diagonal must be positive");
  const Matrix& f = predictor.matrix();
  PredictionState pred;
  pred.x_pred = f * state.x_hat;
  Matrix p = f * state.p * f.transpose();
  p.diagonal() += q_diag;
  pred.p_pred = 0.5 * (p + p.transpose());
  return pred;
}

// Full DIP (plain) / rDIP (robust) recursion over a sequence of snapshots.
inline std::vector<FilterState> dip_run(const std::vector<Vector>& measurements, const Matrix& h,
                                        const Matrix& r_inv, const PredictorMatrix& predictor,
                                        const Vector& q_diag, const PredictionState& init,
                                        int k_max, PursuitVariant variant) {
  std::vector<FilterState> states;
  states.reserve(measurements.size());
  PredictionState pred = init;
  for (std::size_t t = 0; t < measurements.size(); ++t) {
    states.push_back(measurement_update(measurements[t], h, r_inv, pred, k_max, variant));
    if (t + 1 < measurements.size()) pred = predict(states.back(), predictor, q_diag);
  }
  return states;
}

// Kalman filter that is told the realized sparsity pattern: prediction uses
// the realized transitions (alpha on each (source, destination) pair, process
// noise injected on destinations only) and the measurement update is
// restricted to the true support. Serves as a reconstruction bound. Starts
// from the stationary AR prior, x_pred = 0 and P_pred = diag(Q) / (1 - alpha^2).
inline std::vector<FilterState> genie_kf_run(const model::ProcessRealization& realization,
                                             const Matrix& r_inv, const Vector& q_diag,
                                             double alpha) {
  const auto n = realization.h.cols();
  std::vector<FilterState> states;
  states.reserve(realization.measurements.size());

  PredictionState pred{Vector::Zero(n),
                       Matrix((q_diag / (1.0 - alpha * alpha)).asDiagonal())};
  for (std::size_t t = 0; t < realization.measurements.size(); ++t) {
    const IndexSet& support = realization.supports[t];
    const pursuit::Prior prior{pred.x_pred, pred.p_pred};
    const auto sol = pursuit::detail::mmse_rec_full(realization.measurements[t], realization.h,
                                                    r_inv, prior, support);
    FilterState state;
    state.support = support;
    state.x_hat = pursuit::detail::scatter(sol.x, support, n);
    state.p = detail::blockwise_covariance(pred.p_pred, support, sol.posterior_cov);
    states.push_back(std::move(state));

    if (t + 1 < realization.measurements.size()) {
      // x' = A x, P' = A P A' + B Q B' with A = alpha on realized pairs and
      // B the identity on destinations; everything off those rows is zero.
      const auto& pairs = realization.maps[t].pairs;
      const FilterState& cur = states.back();
      pred.x_pred = Vector::Zero(n);
      pred.p_pred = Matrix::Zero(n, n);
      for (const auto& [from, to] : pairs) pred.x_pred[to] = alpha * cur.x_hat[from];
      for (const auto& [from_a, to_a] : pairs)
        for (const auto& [from_b, to_b] : pairs)
          pred.p_pred(to_a, to_b) = alpha * alpha * cur.p(from_a, from_b);
      for (const auto& [from, to] : pairs) pred.p_pred(to, to) += q_diag[to];
    }
  }
  return states;
}

}  // namespace sparsetrack::tracking
