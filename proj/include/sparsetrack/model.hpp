#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sparsetrack/common.hpp"
#include "sparsetrack/rng.hpp"

namespace sparsetrack::model {

// Parameters of the dynamic sparse process y_t = H x_t + n_t where the
// support of x_t evolves by a Markov chain and active coefficients follow a
// first-order AR recursion with uniform coefficient `alpha`.
struct ModelParams {
  int n = 0;             // state dimension
  int m = 0;             // measurement dimension
  int k = 0;             // active-coefficient count
  int k_max = 0;         // support-cardinality bound
  int t = 0;             // snapshot count
  double alpha = 0.0;    // AR coefficient, |alpha| < 1
  double sigma_w2 = 0.0; // innovation variance
  double sigma_n2 = 0.0; // measurement-noise variance

  // Stationary per-coefficient variance of the AR recursion.
  double stationary_variance() const { return sigma_w2 / (1.0 - alpha * alpha); }

  void validate() const {
    if (!(0 < k && k <= k_max && k_max < m && m < n))
      throw InvalidDimension("ModelParams: need 0 < K <= K_max < M < N, got K=" + std::to_string(k) +
                             " K_max=" + std::to_string(k_max) + " M=" + std::to_string(m) +
                             " N=" + std::to_string(n));
    if (t < 1) throw InvalidParameter("ModelParams: T must be >= 1");
    if (!(std::abs(alpha) < 1.0)) throw InvalidParameter("ModelParams: |alpha| must be < 1");
    if (!(sigma_w2 > 0.0)) throw InvalidParameter("ModelParams: sigma_w2 must be > 0");
    if (sigma_n2 < 0.0) throw InvalidParameter("ModelParams: sigma_n2 must be >= 0");
  }
};

// Row-stochastic matrix of support-transition probabilities. Entry (j, i) is
// the probability that active coordinate j moves to coordinate i.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Matrix lambda) : lambda_(std::move(lambda)) {
    if (lambda_.rows() != lambda_.cols() || lambda_.rows() < 1)
      throw InvalidDimension("TransitionMatrix: matrix must be square and non-empty");
    for (Eigen::Index j = 0; j < lambda_.rows(); ++j) {
      double row_sum = 0.0;
      for (Eigen::Index i = 0; i < lambda_.cols(); ++i) {
        const double p = lambda_(j, i);
        if (p < 0.0 || p > 1.0)
          throw InvalidParameter("TransitionMatrix: entries must lie in [0, 1]");
        row_sum += p;
      }
      if (std::abs(row_sum - 1.0) > 1e-12)
        throw InvalidParameter("TransitionMatrix: row " + std::to_string(j) +
                               " sums to " + std::to_string(row_sum));
    }
  }

  int size() const { return static_cast<int>(lambda_.rows()); }
  const Matrix& probabilities() const { return lambda_; }
  double operator()(int from, int to) const { return lambda_(from, to); }

 private:
  Matrix lambda_;
};

// Banded transitions: 0.90 self, 0.05 to each neighbor (0.10 to the single
// neighbor at the edges). Models slowly drifting sparsity patterns.
inline TransitionMatrix neighbor_transitions(int n) {
  if (n < 2) throw InvalidDimension("neighbor_transitions: N must be >= 2");
  Matrix lambda = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    lambda(j, j) = 0.90;
    if (j == 0) {
      lambda(j, j + 1) = 0.10;
    } else if (j == n - 1) {
      lambda(j, j - 1) = 0.10;
    } else {
      lambda(j, j - 1) = 0.05;
      lambda(j, j + 1) = 0.05;
    }
  }
  return TransitionMatrix(std::move(lambda));
}

// Mixture transitions: stay put with probability 1 - nu (N-1)/N, otherwise
// hop uniformly. nu = 0 freezes the pattern, nu = 1 makes all destinations
// equiprobable.
inline TransitionMatrix mixture_transitions(int n, double nu) {
  if (n < 2) throw InvalidDimension("mixture_transitions: N must be >= 2");
  if (nu < 0.0 || nu > 1.0) throw InvalidParameter("mixture_transitions: nu must lie in [0, 1]");
  const double off = nu / n;
  const double diag = 1.0 - off * (n - 1);
  Matrix lambda = Matrix::Constant(n, n, off);
  lambda.diagonal().setConstant(diag);
  return TransitionMatrix(std::move(lambda));
}

// Degenerate transitions: the identity, i.e. a static sparsity pattern.
inline TransitionMatrix static_transitions(int n) {
  if (n < 1) throw InvalidDimension("static_transitions: N must be >= 1");
  return TransitionMatrix(Matrix::Identity(n, n));
}

// Realized coordinate transitions for one time step, in ascending source
// order. Destinations are pairwise distinct after collision resolution.
struct TransitionMap {
  std::vector<std::pair<int, int>> pairs;  // (source, destination)
};

namespace detail {

// One categorical draw from row `from` of lambda. Walks the cumulative sum;
// falls back to the last positive-probability index if rounding leaves the
// cumulative total short of the drawn uniform.
inline int draw_destination(const TransitionMatrix& lambda, int from, rng::Stream& stream) {
  const double u = stream.uniform();
  double cum = 0.0;
  int last_positive = -1;
  for (int i = 0; i < lambda.size(); ++i) {
    const double p = lambda(from, i);
    if (p <= 0.0) continue;
    last_positive = i;
    cum += p;
    if (u < cum) return i;
  }
  return last_positive;
}

}  // namespace detail

// Advance a support set one step through the Markov chain. Every source draws
// a destination independently; when several sources draw the same coordinate
// the lowest-index source keeps it and the others are reassigned, in
// ascending source order, uniformly over the coordinates left untouched by
// all draws. Cardinality is conserved.
inline std::pair<IndexSet, TransitionMap> step_support(const IndexSet& support,
                                                       const TransitionMatrix& lambda,
                                                       rng::Stream& stream) {
  if (support.empty()) throw InvalidParameter("step_support: support must be nonempty");
  const int n = lambda.size();
  IndexSet sources = support;
  std::sort(sources.begin(), sources.end());
  if (sources.front() < 0 || sources.back() >= n)
    throw InvalidDimension("step_support: support index out of range");

  std::vector<int> destination(sources.size());
  std::vector<char> occupied(n, 0);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    destination[s] = detail::draw_destination(lambda, sources[s], stream);
    occupied[destination[s]] = 1;
  }

  // Coordinates no draw landed on, ascending; the reassignment pool.
  std::vector<int> pool;
  pool.reserve(n);
  for (int i = 0; i < n; ++i)
    if (!occupied[i]) pool.push_back(i);

  std::vector<char> taken(n, 0);
  TransitionMap map;
  map.pairs.reserve(sources.size());
  IndexSet next;
  next.reserve(sources.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    int dest = destination[s];
    if (taken[dest]) {
      const int slot = stream.uniform_int(static_cast<int>(pool.size()));
      dest = pool[slot];
      pool.erase(pool.begin() + slot);
    }
    taken[dest] = 1;
    map.pairs.emplace_back(sources[s], dest);
    next.push_back(dest);
  }
  std::sort(next.begin(), next.end());
  return {std::move(next), std::move(map)};
}

// AR step along realized transitions: x'_i = alpha x_j + w_i for each
// (j, i) pair, w_i ~ N(0, sigma_w2); coordinates that are not destinations
// are exactly zero. One gaussian is consumed per pair regardless of sigma_w2.
inline Vector step_state(const Vector& x, const TransitionMap& map, double alpha,
                         double sigma_w2, rng::Stream& stream) {
  Vector next = Vector::Zero(x.size());
  const double w_std = std::sqrt(sigma_w2);
  for (const auto& [from, to] : map.pairs)
    next[to] = alpha * x[from] + w_std * stream.gaussian();
  return next;
}

// M x N sensing matrix: i.i.d. standard gaussian entries (drawn column-major)
// followed by unit-norm column scaling.
inline Matrix sensing_matrix(int m, int n, rng::Stream& stream) {
  if (!(0 < m && m < n)) throw InvalidDimension("sensing_matrix: need 0 < M < N");
  Matrix h(m, n);
  for (int col = 0; col < n; ++col)
    for (int row = 0; row < m; ++row) h(row, col) = stream.gaussian();
  for (int col = 0; col < n; ++col) h.col(col) /= h.col(col).norm();
  return h;
}

// Noisy linear measurement y = H x + n with n ~ N(0, sigma_n2 I).
inline Vector measure(const Matrix& h, const Vector& x, double sigma_n2, rng::Stream& stream) {
  if (h.cols() != x.size()) throw InvalidDimension("measure: H columns must match x dimension");
  if (sigma_n2 < 0.0) throw InvalidParameter("measure: sigma_n2 must be >= 0");
  Vector y = h * x;
  const double n_std = std::sqrt(sigma_n2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += n_std * stream.gaussian();
  return y;
}

// Ground-truth trajectory of one run: states, supports, realized transitions,
// measurements and the sensing matrix that produced them.
struct ProcessRealization {
  std::vector<Vector> states;        // T sparse state vectors
  std::vector<IndexSet> supports;    // T sorted support sets
  std::vector<TransitionMap> maps;   // T-1 realized transitions
  std::vector<Vector> measurements;  // T measurement vectors
  Matrix h;                          // M x N sensing matrix
};

// Generate a full realization. Draw order (fixed for reproducibility):
// sensing matrix, initial support (partial Fisher-Yates), initial amplitudes
// from the stationary AR distribution N(0, sigma_w2 / (1 - alpha^2)), then per
// snapshot the support step, the state step and the measurement noise.
inline ProcessRealization simulate(const ModelParams& params, const TransitionMatrix& lambda,
                                   rng::Stream& stream) {
  params.validate();
  if (lambda.size() != params.n)
    throw InvalidDimension("simulate: transition matrix size must equal N");

  ProcessRealization real;
  real.h = sensing_matrix(params.m, params.n, stream);

  std::vector<int> perm(params.n);
  for (int i = 0; i < params.n; ++i) perm[i] = i;
  for (int i = 0; i < params.k; ++i) {
    const int j = i + stream.uniform_int(params.n - i);
    std::swap(perm[i], perm[j]);
  }
  IndexSet support(perm.begin(), perm.begin() + params.k);
  std::sort(support.begin(), support.end());

  const double x_std = std::sqrt(params.stationary_variance());
  Vector x = Vector::Zero(params.n);
  for (int i : support) x[i] = x_std * stream.gaussian();

  real.states.push_back(x);
  real.supports.push_back(support);
  real.measurements.push_back(measure(real.h, x, params.sigma_n2, stream));

  for (int t = 1; t < params.t; ++t) {
    auto [next_support, map] = step_support(support, lambda, stream);
    x = step_state(x, map, params.alpha, params.sigma_w2, stream);
    support = std::move(next_support);
    real.states.push_back(x);
    real.supports.push_back(support);
    real.maps.push_back(std::move(map));
    real.measurements.push_back(measure(real.h, x, params.sigma_n2, stream));
  }
  return real;
}

}  // namespace sparsetrack::model
