#pragma once

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sparsetrack/common.hpp"

namespace sparsetrack::pursuit {

// Prediction handed to the predictive pursuits: mean x_pred and error
// covariance P_pred. The diagonal of P_pred must be strictly positive.
struct Prior {
  Vector x_pred;
  Matrix P_pred;
};

struct InvalidPrior : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Working state of one recovery: residual r, detected support (in detection
// order), the inverse residual covariance D^-1 and the posterior variances
// sigma_j^2 recorded when each support element was added.
struct PursuitState {
  Vector residual;
  IndexSet support;
  Matrix d_inv;
  std::vector<double> sigma2;
};

struct RecoveryResult {
  Vector x_hat;          // full-length estimate, zero off support
  IndexSet support;      // detection order
  double residual_norm = 0.0;
  std::vector<double> residual_history;  // accepted iterates, starting at ||y||
};

namespace detail {

inline Matrix columns(const Matrix& h, const IndexSet& idx) {
  Matrix sub(h.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = h.col(idx[c]);
  return sub;
}

inline Vector gather(const Vector& x, const IndexSet& idx) {
  Vector sub(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) sub[static_cast<Eigen::Index>(c)] = x[idx[c]];
  return sub;
}

inline Vector scatter(const Vector& values, const IndexSet& idx, Eigen::Index n) {
  Vector full = Vector::Zero(n);
  for (std::size_t c = 0; c < idx.size(); ++c) full[idx[c]] = values[static_cast<Eigen::Index>(c)];
  return full;
}

inline Matrix submatrix(const Matrix& p, const IndexSet& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix sub(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = p(idx[r], idx[c]);
  return sub;
}

// SPD solve via Cholesky; failure surfaces as NumericError, never as a
// regularized solve.
inline Eigen::LLT<Matrix> factor_spd(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + ": matrix not positive definite");
  return llt;
}

inline void check_prior(const Prior& prior, Eigen::Index n) {
  if (prior.x_pred.size() != n || prior.P_pred.rows() != n || prior.P_pred.cols() != n)
    throw InvalidDimension("prior dimensions must match the signal dimension");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(prior.P_pred(i, i) > 0.0)) throw InvalidPrior("prior variance must be strictly positive");
}

}  // namespace detail

// Classic orthogonal matching pursuit: matched-filter detection and
// least-squares re-estimation. Stops when the residual norm fails to strictly
// decrease (returning the previous iterate) or when the support reaches k_max.
inline RecoveryResult omp(const Vector& y, const Matrix& h, int k_max) {
  if (k_max >= h.rows()) throw InvalidParameter("omp: K_max must be < M");
  if (y.size() != h.rows()) throw InvalidDimension("omp: y length must match H rows");

  RecoveryResult best;
  best.x_hat = Vector::Zero(h.cols());
  best.residual_norm = y.norm();
  best.residual_history.push_back(best.residual_norm);

  Vector r = y;
  IndexSet support;
  std::vector<char> in_support(h.cols(), 0);
  while (static_cast<int>(support.size()) < k_max) {
    int pick = -1;
    double pick_score = -1.0;
    for (int i = 0; i < h.cols(); ++i) {
      if (in_support[i]) continue;
      const double score = std::abs(h.col(i).dot(r));
      if (score > pick_score) {
        pick_score = score;
        pick = i;
      }
    }
    support.push_back(pick);

    const Matrix h_sub = detail::columns(h, support);
    const Matrix gram = h_sub.transpose() * h_sub;
    const auto llt = detail::factor_spd(gram, "omp least squares");
    const Vector coef = llt.solve(h_sub.transpose() * y);
    r = y - h_sub * coef;

    const double r_norm = r.norm();
    if (r_norm >= best.residual_norm) {
      support.pop_back();
      return best;
    }
    in_support[pick] = 1;
    best.support = support;
    best.x_hat = detail::scatter(coef, support, h.cols());
    best.residual_norm = r_norm;
    best.residual_history.push_back(r_norm);
  }
  return best;
}

// Signal-to-prediction-error ratios rho_i for every coordinate outside the
// current support. For i in the support the entry is -infinity so a naive
// argmax never re-selects it.
//
// With w_i = D^-1 h_i and c_i = h_i' w_i the per-coordinate MMSE update is
//   mu    = x_pred_i + (w_i' r - c_i x_pred_i) / (1/p_i + c_i)
//   sigma2 = 1 / (1/p_i + c_i)
//   rho_i  = (mu^2 + sigma2) / p_i.
inline Vector sper_scores(const PursuitState& state, const Prior& prior, const Matrix& h) {
  const Eigen::Index n = h.cols();
  detail::check_prior(prior, n);
  std::vector<char> in_support(n, 0);
  for (int i : state.support) in_support[i] = 1;

  const Matrix w = state.d_inv * h;  // column i is D^-1 h_i
  Vector rho = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (in_support[i]) continue;
    const double p_i = prior.P_pred(i, i);
    if (!(p_i > 0.0)) throw InvalidPrior("sper_scores: prior variance must be strictly positive");
    const double c_i = h.col(i).dot(w.col(i));
    const double denom = 1.0 / p_i + c_i;
    const double mu = prior.x_pred[i] + (w.col(i).dot(state.residual) - c_i * prior.x_pred[i]) / denom;
    const double sigma2 = 1.0 / denom;
    rho[i] = (mu * mu + sigma2) / p_i;
  }
  return rho;
}

namespace detail {

struct MmseSolution {
  Vector x;              // coefficients on the index set, in set order
  Matrix posterior_cov;  // (S^-1 + H_I' R^-1 H_I)^-1
};

inline MmseSolution mmse_rec_full(const Vector& y, const Matrix& h, const Matrix& r_inv,
                                  const Prior& prior, const IndexSet& index_set) {
  if (index_set.empty()) throw InvalidParameter("mmse_rec: index set must be nonempty");
  const Matrix h_sub = columns(h, index_set);
  const Matrix s = submatrix(prior.P_pred, index_set);
  const auto k = static_cast<Eigen::Index>(index_set.size());

  const Matrix s_inv = factor_spd(s, "mmse_rec prior block").solve(Matrix::Identity(k, k));
  const Matrix info = s_inv + h_sub.transpose() * r_inv * h_sub;
  const auto llt = factor_spd(info, "mmse_rec posterior");

  const Vector x_prior = gather(prior.x_pred, index_set);
  MmseSolution sol;
  sol.x = x_prior + llt.solve(h_sub.transpose() * (r_inv * (y - h_sub * x_prior)));
  sol.posterior_cov = llt.solve(Matrix::Identity(k, k));
  return sol;
}

}  // namespace detail

// Weighted least-squares fusion of the measurement and the prediction over a
// fixed index set, in Kalman measurement-update form:
//   x_I = x_pred_I + K (y - H_I x_pred_I),
//   K = (S^-1 + H_I' R^-1 H_I)^-1 H_I' R^-1,  S = P_pred[I, I].
inline Vector mmse_rec(const Vector& y, const Matrix& h, const Matrix& r_inv, const Prior& prior,
                       const IndexSet& index_set) {
  return detail::mmse_rec_full(y, h, r_inv, prior, index_set).x;
}

// Sherman-Morrison update of D^-1 for D' = D + sigma_i2 h_i h_i'. sigma_i2 = 0
// or h_i = 0 leave the inverse unchanged.
inline Matrix update_cov_inv(const Matrix& d_inv, const Vector& h_i, double sigma_i2) {
  if (sigma_i2 < 0.0) throw InvalidParameter("update_cov_inv: variance must be >= 0");
  if (sigma_i2 == 0.0 || h_i.isZero(0.0)) return d_inv;
  const Vector u = d_inv * h_i;
  const double denom = 1.0 / sigma_i2 + h_i.dot(u);
  return d_inv - (u * u.transpose()) / denom;
}

namespace detail {

// Shared loop of PrOMP and rPrOMP. The robust variant hypothesizes the
// k_max - |I| most likely remaining coordinates and commits the one with the
// largest reconstructed magnitude; the plain variant commits the SPER argmax
// directly. Stopping rule and rollback are identical to omp.
inline RecoveryResult predictive_pursuit(const Vector& y, const Matrix& h, const Matrix& r_inv,
                                         const Prior& prior, int k_max, bool robust) {
  if (k_max >= h.rows()) throw InvalidParameter("predictive pursuit: K_max must be < M");
  if (y.size() != h.rows()) throw InvalidDimension("predictive pursuit: y length must match H rows");
  if (r_inv.rows() != h.rows() || r_inv.cols() != h.rows())
    throw InvalidDimension("predictive pursuit: R^-1 must be M x M");
  check_prior(prior, h.cols());

  RecoveryResult best;
  best.x_hat = Vector::Zero(h.cols());
  best.residual_norm = y.norm();
  best.residual_history.push_back(best.residual_norm);

  PursuitState state;
  state.residual = y;
  state.d_inv = r_inv;

  while (static_cast<int>(state.support.size()) < k_max) {
    const Vector rho = sper_scores(state, prior, h);

    int pick = -1;
    if (robust) {
      const int ell = k_max - static_cast<int>(state.support.size());
      std::vector<int> order(h.cols());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&rho](int a, int b) {
        return rho[a] != rho[b] ? rho[a] > rho[b] : a < b;
      });
      IndexSet likely(order.begin(), order.begin() + ell);  // -inf entries exclude the support
      std::sort(likely.begin(), likely.end());

      IndexSet hypothesized = state.support;
      hypothesized.insert(hypothesized.end(), likely.begin(), likely.end());
      const Vector x_check = mmse_rec(y, h, r_inv, prior, hypothesized);

      double pick_mag = -1.0;
      for (std::size_t c = 0; c < likely.size(); ++c) {
        const double mag = std::abs(x_check[static_cast<Eigen::Index>(state.support.size() + c)]);
        if (mag > pick_mag) {
          pick_mag = mag;
          pick = likely[c];
        }
      }
    } else {
      double pick_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rho.size(); ++i) {
        if (rho[i] > pick_score) {
          pick_score = rho[i];
          pick = static_cast<int>(i);
        }
      }
    }

    IndexSet grown = state.support;
    grown.push_back(pick);
    const auto sol = mmse_rec_full(y, h, r_inv, prior, grown);
    const Matrix h_sub = columns(h, grown);
    const Vector r = y - h_sub * sol.x;

    const double r_norm = r.norm();
    if (r_norm >= best.residual_norm) return best;

    const double sigma2 = sol.posterior_cov(sol.posterior_cov.rows() - 1, sol.posterior_cov.cols() - 1);
    state.d_inv = update_cov_inv(state.d_inv, h.col(pick), sigma2);
    state.sigma2.push_back(sigma2);
    state.support = std::move(grown);
    state.residual = r;

    best.support = state.support;
    best.x_hat = scatter(sol.x, state.support, h.cols());
    best.residual_norm = r_norm;
    best.residual_history.push_back(r_norm);
  }
  return best;
}

}  // namespace detail

// Predictive OMP: SPER-based detection with MMSE re-estimation.
inline RecoveryResult promp(const Vector& y, const Matrix& h, const Matrix& r_inv,
                            const Prior& prior, int k_max) {
  return detail::predictive_pursuit(y, h, r_inv, prior, k_max, false);
}

// Robust predictive OMP: scores a hypothesized full-size support before
// committing each index. Degrades more gracefully than promp when the
// sparsity pattern evolves erratically.
inline RecoveryResult rpromp(const Vector& y, const Matrix& h, const Matrix& r_inv,
                             const Prior& prior, int k_max) {
  return detail::predictive_pursuit(y, h, r_inv, prior, k_max, true);
}

}  // namespace sparsetrack::pursuit
