#include "sparsetrack/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace sparsetrack;
using model::TransitionMatrix;
using rng::Stream;

TEST(NeighborTransitions, InteriorAndEdgeRows) {
  const auto lambda = model::neighbor_transitions(3);
  // interior row
  EXPECT_DOUBLE_EQ(lambda(1, 0), 0.05);
  EXPECT_DOUBLE_EQ(lambda(1, 1), 0.90);
  EXPECT_DOUBLE_EQ(lambda(1, 2), 0.05);
  // first row has a single neighbor
  EXPECT_DOUBLE_EQ(lambda(0, 0), 0.90);
  EXPECT_DOUBLE_EQ(lambda(0, 1), 0.10);
  EXPECT_DOUBLE_EQ(lambda(0, 2), 0.0);
}

TEST(NeighborTransitions, RowsSumToOne) {
  for (int n : {2, 3, 17, 200}) {
    const auto lambda = model::neighbor_transitions(n);
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += lambda(j, i);
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(NeighborTransitions, RejectsTinyDimension) {
  EXPECT_THROW(model::neighbor_transitions(1), InvalidDimension);
}

TEST(MixtureTransitions, ZeroMixtureIsIdentity) {
  const auto lambda = model::mixture_transitions(5, 0.0);
  EXPECT_TRUE(lambda.probabilities().isApprox(Matrix::Identity(5, 5)));
}

TEST(MixtureTransitions, KnownEntries) {
  const auto small = model::mixture_transitions(4, 0.4);
  EXPECT_NEAR(small(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(small(2, 3), 0.1, 1e-15);
  const auto big = model::mixture_transitions(200, 0.5);
  EXPECT_NEAR(big(7, 7), 0.5025, 1e-12);
  EXPECT_NEAR(big(7, 8), 0.0025, 1e-12);
}

TEST(MixtureTransitions, RejectsBadMixtureFactor) {
  EXPECT_THROW(model::mixture_transitions(4, -0.1), InvalidParameter);
  EXPECT_THROW(model::mixture_transitions(4, 1.1), InvalidParameter);
}

TEST(StaticTransitions, Identity) {
  EXPECT_TRUE(model::static_transitions(1).probabilities().isApprox(Matrix::Identity(1, 1)));
  EXPECT_TRUE(model::static_transitions(5).probabilities().isApprox(Matrix::Identity(5, 5)));
}

TEST(StaticTransitions, SupportNeverMoves) {
  const auto lambda = model::static_transitions(9);
  Stream stream(11);
  IndexSet support{1, 4, 6};
  for (int step = 0; step < 50; ++step) {
    auto [next, map] = model::step_support(support, lambda, stream);
    EXPECT_EQ(next, support);
    support = next;
  }
}

TEST(StepSupport, IdentityMapsEachCoordinateToItself) {
  const auto lambda = model::static_transitions(8);
  Stream stream(3);
  const auto [next, map] = model::step_support({2, 7}, lambda, stream);
  EXPECT_EQ(next, (IndexSet{2, 7}));
  ASSERT_EQ(map.pairs.size(), 2u);
  EXPECT_EQ(map.pairs[0], (std::pair<int, int>(2, 2)));
  EXPECT_EQ(map.pairs[1], (std::pair<int, int>(7, 7)));
}

TEST(StepSupport, DeterministicShift) {
  const int n = 6;
  Matrix shift = Matrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) shift(j, j + 1) = 1.0;
  shift(n - 1, n - 1) = 1.0;
  const TransitionMatrix lambda{shift};
  Stream stream(5);
  const auto [next, map] = model::step_support({0, 2}, lambda, stream);
  EXPECT_EQ(next, (IndexSet{1, 3}));
}

TEST(StepSupport, CollisionKeepsCardinalityAndReassignsUniformly) {
  // Both sources are forced onto coordinate 1; the lower one keeps it and the
  // other lands uniformly on the coordinates nobody drew, here {0, 2}.
  Matrix forced = Matrix::Zero(3, 3);
  forced(0, 1) = 1.0;
  forced(1, 1) = 1.0;
  forced(2, 1) = 1.0;
  const TransitionMatrix lambda{forced};
  Stream stream(17);
  int to_zero = 0, to_two = 0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    const auto [next, map] = model::step_support({0, 2}, lambda, stream);
    ASSERT_EQ(next.size(), 2u);
    ASSERT_EQ(map.pairs[0], (std::pair<int, int>(0, 1)));
    const int reassigned = map.pairs[1].second;
    ASSERT_TRUE(reassigned == 0 || reassigned == 2);
    (reassigned == 0 ? to_zero : to_two)++;
  }
  const double sigma = std::sqrt(trials * 0.25);
  EXPECT_NEAR(to_zero, trials / 2.0, 3.0 * sigma);
  EXPECT_NEAR(to_two, trials / 2.0, 3.0 * sigma);
}

TEST(StepSupport, EmptySupportRejected) {
  const auto lambda = model::static_transitions(4);
  Stream stream(1);
  EXPECT_THROW(model::step_support({}, lambda, stream), InvalidParameter);
}

TEST(StepSupport, CardinalityConservedUnderErraticTransitions) {
  const auto lambda = model::mixture_transitions(20, 1.0);
  Stream stream(23);
  IndexSet support{0, 3, 5, 11, 19};
  for (int step = 0; step < 500; ++step) {
    auto [next, map] = model::step_support(support, lambda, stream);
    ASSERT_EQ(next.size(), support.size());
    const std::set<int> distinct(next.begin(), next.end());
    ASSERT_EQ(distinct.size(), next.size());
    support = next;
  }
}

TEST(StepState, IdentityMapNoNoise) {
  Vector x = Vector::Zero(4);
  x[1] = 2.5;
  x[3] = -1.0;
  model::TransitionMap map{{{1, 1}, {3, 3}}};
  Stream stream(2);
  const Vector next = model::step_state(x, map, 1.0, 0.0, stream);
  EXPECT_TRUE(next.isApprox(x));
}

TEST(StepState, SingleTransitionScalesByAlpha) {
  Vector x = Vector::Zero(8);
  x[3] = 2.0;
  model::TransitionMap map{{{3, 5}}};
  Stream stream(2);
  const Vector next = model::step_state(x, map, -0.8, 0.0, stream);
  EXPECT_DOUBLE_EQ(next[5], -1.6);
  EXPECT_DOUBLE_EQ(next.cwiseAbs().sum(), 1.6);
}

TEST(StepState, InnovationVarianceMatches) {
  const double sigma_w2 = 0.37;
  Vector x = Vector::Zero(2);
  model::TransitionMap map{{{0, 0}}};
  Stream stream(31);
  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Vector next = model::step_state(x, map, -0.8, sigma_w2, stream);
    sum += next[0];
    sum2 += next[0] * next[0];
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var, sigma_w2, 0.05 * sigma_w2);
}

TEST(SensingMatrix, UnitColumnsAndShape) {
  Stream stream(4);
  const Matrix h = model::sensing_matrix(50, 200, stream);
  EXPECT_EQ(h.rows(), 50);
  EXPECT_EQ(h.cols(), 200);
  for (int c = 0; c < 200; ++c) EXPECT_NEAR(h.col(c).norm(), 1.0, 1e-12);
}

TEST(SensingMatrix, MatchesColumnMajorGaussianDrawsNormalized) {
  Stream stream(77);
  Stream clone(77);
  const Matrix h = model::sensing_matrix(5, 8, clone);
  Matrix raw(5, 8);
  for (int c = 0; c < 8; ++c)
    for (int r = 0; r < 5; ++r) raw(r, c) = stream.gaussian();
  double mean = raw.mean();
  EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(40.0));  // sanity on the raw draws
  for (int c = 0; c < 8; ++c) raw.col(c) /= raw.col(c).norm();
  EXPECT_TRUE(h.isApprox(raw, 0.0));
}

TEST(SensingMatrix, RawEntryMeanNearZero) {
  Stream stream(123);
  const int entries = 100000;
  double sum = 0.0;
  for (int i = 0; i < entries; ++i) sum += stream.gaussian();
  EXPECT_NEAR(sum / entries, 0.0, 3.0 / std::sqrt(double(entries)));
}

TEST(SensingMatrix, RejectsWideMeasurements) {
  Stream stream(1);
  EXPECT_THROW(model::sensing_matrix(8, 8, stream), InvalidDimension);
  EXPECT_THROW(model::sensing_matrix(9, 8, stream), InvalidDimension);
}

TEST(Measure, NoiselessIsExact) {
  Stream stream(9);
  const Matrix h = model::sensing_matrix(4, 10, stream);
  Vector x = Vector::Zero(10);
  x[2] = 1.5;
  x[7] = -0.5;
  const Vector y = model::measure(h, x, 0.0, stream);
  EXPECT_TRUE(y.isApprox(h * x, 0.0));
}

TEST(Measure, IdentityPassesUnitVector) {
  Stream stream(9);
  const Matrix h = Matrix::Identity(3, 3);
  Vector x = Vector::Zero(3);
  x[0] = 1.0;
  const Vector y = model::measure(h, x, 0.0, stream);
  EXPECT_TRUE(y.isApprox(x, 0.0));
}

TEST(Measure, NoisePowerMatches) {
  Stream stream(41);
  const int m = 6;
  const double sigma_n2 = 0.2;
  const Matrix h = model::sensing_matrix(m, 12, stream);
  const Vector x = Vector::Zero(12);
  double energy = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) energy += model::measure(h, x, sigma_n2, stream).squaredNorm();
  EXPECT_NEAR(energy / draws, m * sigma_n2, 0.05 * m * sigma_n2);
}

TEST(Measure, DimensionMismatchRejected) {
  Stream stream(1);
  const Matrix h = Matrix::Identity(3, 3);
  EXPECT_THROW(model::measure(h, Vector::Zero(4), 0.0, stream), InvalidDimension);
}

namespace {

model::ModelParams desk_params() {
  model::ModelParams params;
  params.n = 50;
  params.m = 20;
  params.k = 5;
  params.k_max = 5;
  params.t = 30;
  params.alpha = -0.8;
  params.sigma_w2 = (1.0 - 0.64) / 5.0;
  params.sigma_n2 = 0.01;
  return params;
}

}  // namespace

TEST(Simulate, SingleSnapshot) {
  auto params = desk_params();
  params.t = 1;
  Stream stream(8);
  const auto real = model::simulate(params, model::neighbor_transitions(params.n), stream);
  EXPECT_EQ(real.states.size(), 1u);
  EXPECT_EQ(real.measurements.size(), 1u);
  EXPECT_TRUE(real.maps.empty());
}

TEST(Simulate, ConstantSparsityAndSupportConsistency) {
  const auto params = desk_params();
  Stream stream(15);
  const auto real = model::simulate(params, model::neighbor_transitions(params.n), stream);
  for (int t = 0; t < params.t; ++t) {
    EXPECT_EQ(static_cast<int>(real.supports[t].size()), params.k);
    int nonzeros = 0;
    for (int i = 0; i < params.n; ++i) {
      const bool active =
          std::find(real.supports[t].begin(), real.supports[t].end(), i) != real.supports[t].end();
      if (real.states[t][i] != 0.0) ++nonzeros;
      if (!active) {
        EXPECT_EQ(real.states[t][i], 0.0);
      }
    }
    EXPECT_LE(nonzeros, params.k);
  }
}

TEST(Simulate, StationaryUnitPower) {
  const auto params = desk_params();
  const auto lambda = model::neighbor_transitions(params.n);
  double energy = 0.0;
  int count = 0;
  for (int run = 0; run < 100; ++run) {
    Stream stream = Stream::for_run(2718, run);
    const auto real = model::simulate(params, lambda, stream);
    for (const auto& x : real.states) {
      energy += x.squaredNorm();
      ++count;
    }
  }
  EXPECT_NEAR(energy / count, 1.0, 0.10);
}

TEST(Simulate, RejectsInvalidParams) {
  auto params = desk_params();
  params.k_max = params.m;  // violates K_max < M
  Stream stream(1);
  EXPECT_THROW(model::simulate(params, model::neighbor_transitions(params.n), stream),
               InvalidDimension);
  auto bad_alpha = desk_params();
  bad_alpha.alpha = 1.0;
  EXPECT_THROW(model::simulate(bad_alpha, model::neighbor_transitions(bad_alpha.n), stream),
               InvalidParameter);
}

TEST(TransitionMatrixType, RejectsNonStochasticRows) {
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 0) = 0.9;
  EXPECT_THROW(TransitionMatrix{bad}, InvalidParameter);
  Matrix negative = Matrix::Identity(3, 3);
  negative(1, 0) = -0.1;
  negative(1, 1) = 1.1;
  EXPECT_THROW(TransitionMatrix{negative}, InvalidParameter);
}
