#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "malcast/lstm/adam.hpp"
#include "malcast/lstm/gradcheck.hpp"
#include "malcast/lstm/model_io.hpp"
#include "malcast/lstm/network.hpp"
#include "malcast/lstm/trainer.hpp"
#include "malcast/window/windowing.hpp"

using namespace malcast;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix random_window(std::size_t steps, std::size_t features, Rng& rng) {
  Matrix m(steps, features);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

WindowedDataset sinusoid_windows(std::size_t n, double offset, double amplitude) {
  Matrix m(n, 1);
  std::vector<MonthKey> months;
  for (std::size_t t = 0; t < n; ++t) {
    m(t, 0) = offset + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 12.0);
    months.push_back(MonthKey{2000, 1}.plus(static_cast<long>(t)));
  }
  return make_windows(m, months, {12, Variant::Univariate});
}

// One training run shared by the sinusoid tests.
struct SinusoidRun {
  WindowedDataset train_part, test_part;
  TrainedModel model;
  SinusoidRun() {
    auto [tr, te] = split_train_test(sinusoid_windows(200, 2000.0, 1000.0), 0.8);
    train_part = std::move(tr);
    test_part = std::move(te);
    TrainConfig cfg;
    cfg.hidden = 16;
    cfg.epochs = 500;
    model = train(train_part, cfg);
  }
  static const SinusoidRun& get() {
    static const SinusoidRun run;
    return run;
  }
};

}  // namespace

TEST(CellStep, ZeroParamsGiveZeroState) {
  const auto p = LstmParams::zeros(3, 4);
  const auto s = cell_step(p, Vector{1.0, -2.0, 0.5}, LstmState::zeros(4));
  EXPECT_EQ(s, LstmState::zeros(4));
}

TEST(CellStep, ForcedGatesCarryCellState) {
  auto p = LstmParams::zeros(1, 1);
  p.gate_bias(Gate::Forget)[0] = 20.0;
  p.gate_bias(Gate::Input)[0] = -20.0;
  p.gate_bias(Gate::Output)[0] = 20.0;
  const LstmState s{{0.0}, {0.5}};
  const auto next = cell_step(p, Vector{3.0}, s);
  const double c = logistic(20.0) * 0.5 + logistic(-20.0) * std::tanh(0.0);
  EXPECT_NEAR(next.c[0], c, 1e-15);
  EXPECT_NEAR(next.c[0], 0.5, 1e-8);
  EXPECT_NEAR(next.h[0], std::tanh(c) * logistic(20.0), 1e-15);
  EXPECT_NEAR(next.h[0], 0.4621, 5e-5);
}

TEST(CellStep, PureAndShapeChecked) {
  Rng rng(1);
  const auto p = LstmParams::random(2, 3, rng);
  const LstmState s{{0.1, -0.2, 0.3}, {1.0, 2.0, -3.0}};
  const Vector x{0.4, -0.9};
  const auto a = cell_step(p, x, s), b = cell_step(p, x, s);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.h.size(), 3u);
  for (double h : a.h) {
    EXPECT_GT(h, -1.0);
    EXPECT_LT(h, 1.0);
  }
  EXPECT_THROW(cell_step(p, Vector{1.0}, s), ShapeError);
  EXPECT_THROW(cell_step(p, x, LstmState::zeros(2)), ShapeError);
}

TEST(Forward, ZeroParamsPredictBias) {
  auto p = LstmParams::zeros(2, 3);
  p.head_b = 0.75;
  Rng rng(2);
  EXPECT_EQ(forward(p, random_window(6, 2, rng)), 0.75);
}

TEST(Forward, SingleStepIsCellStepPlusHead) {
  Rng rng(3);
  const auto p = LstmParams::random(3, 5, rng);
  const Matrix w = random_window(1, 3, rng);
  const auto s = cell_step(p, w.row(0), LstmState::zeros(5));
  EXPECT_DOUBLE_EQ(forward(p, w), dot(p.head_w, s.h) + p.head_b);
  EXPECT_THROW(forward(p, Matrix(0, 3)), ShapeError);
  EXPECT_THROW(forward(p, Matrix(2, 4)), ShapeError);
}

TEST(Forward, ClosedLeadingStepDoesNotChangePrediction) {
  // Feature 0 is a flag that slams the input and output gates shut; a
  // leading flagged step then leaves the zero initial state (almost) as is.
  Rng rng(4);
  auto p = LstmParams::random(3, 4, rng);
  for (std::size_t j = 0; j < 4; ++j) {
    p.gate_w_row(Gate::Input, j)[0] = -60.0;
    p.gate_w_row(Gate::Output, j)[0] = -60.0;
  }
  Matrix body = random_window(5, 3, rng);
  for (std::size_t t = 0; t < 5; ++t) body(t, 0) = 0.0;
  Matrix longer(6, 3);
  longer(0, 0) = 1.0;
  longer(0, 1) = 0.3;
  longer(0, 2) = -0.7;
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t f = 0; f < 3; ++f) longer(t + 1, f) = body(t, f);
  EXPECT_NEAR(forward(p, longer), forward(p, body), 1e-12);

  // The bias-only variant: W = U = 0, forget open, everything else shut.
  auto q = LstmParams::zeros(2, 3);
  for (double& v : q.gate_bias(Gate::Forget)) v = 20.0;
  for (auto g : {Gate::Input, Gate::Cell, Gate::Output})
    for (double& v : q.gate_bias(g)) v = -20.0;
  q.head_w = {0.5, -1.0, 2.0};
  q.head_b = 0.1;
  EXPECT_NEAR(forward(q, random_window(7, 2, rng)), forward(q, random_window(3, 2, rng)), 1e-12);
}

TEST(Loss, ClosedForms) {
  EXPECT_EQ(loss_mse(Vector{1, 2, 3}, Vector{1, 2, 3}), 0.0);
  EXPECT_EQ(loss_mse(Vector{0, 0}, Vector{1, 1}), 1.0);
  EXPECT_EQ(loss_mse(Vector{2}, Vector{5}), 9.0);
  EXPECT_THROW(loss_mse(Vector{}, Vector{}), ArgumentError);
  EXPECT_THROW(loss_mse(Vector{1}, Vector{1, 2}), ArgumentError);
}

TEST(Backward, HeadBiasGradientClosedForm) {
  Rng rng(5);
  const auto p = LstmParams::random(2, 3, rng);
  const std::vector<Matrix> in{random_window(4, 2, rng)};
  const Vector target{0.3};
  ForwardCache cache;
  auto g = LstmParams::zeros(2, 3);
  const std::size_t idx[] = {0};
  batch_loss_and_gradient(p, in, target, idx, g, cache);
  EXPECT_DOUBLE_EQ(g.head_b, 2.0 * (forward(p, in[0]) - 0.3));
}

TEST(Backward, ZeroErrorGivesZeroGradient) {
  Rng rng(6);
  const auto p = LstmParams::random(2, 3, rng);
  const std::vector<Matrix> in{random_window(4, 2, rng)};
  const Vector target{forward(p, in[0])};
  ForwardCache cache;
  auto g = LstmParams::zeros(2, 3);
  const std::size_t idx[] = {0};
  batch_loss_and_gradient(p, in, target, idx, g, cache);
  EXPECT_EQ(g, LstmParams::zeros(2, 3));
}

TEST(Backward, StaleCacheIsRejected) {
  Rng rng(7);
  auto p = LstmParams::random(2, 3, rng);
  ForwardCache cache;
  forward(p, random_window(3, 2, rng), cache);
  p.head_b += 1.0;
  EXPECT_THROW(backward(p, cache, 1.0), ContractError);
  EXPECT_THROW(backward(LstmParams::zeros(3, 3), cache, 1.0), ContractError);
}

TEST(GradientCheck, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto p = LstmParams::random(3, 4, rng);
    std::vector<Matrix> in;
    Vector targets;
    for (int i = 0; i < 3; ++i) {
      in.push_back(random_window(5, 3, rng));
      targets.push_back(rng.uniform(-1.0, 1.0));
    }
    const auto r = gradient_check(p, in, targets, 1e-5);
    EXPECT_EQ(r.parameters_checked, p.parameter_count());
    for (std::size_t k = 0; k < 5; ++k)
      EXPECT_LT(r.max_relative_error[k], 1e-4) << LstmParams::kTensorNames[k] << " seed " << seed;
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Rng rng(8);
  auto p = LstmParams::random(2, 3, rng);
  const auto before = p;
  auto g = LstmParams::zeros(2, 3);
  for (auto t : g.tensors())
    for (double& v : t) v = 0.01;
  auto m = AdamMoments::zeros_like(p);
  AdamConfig cfg;
  adam_step(p, g, m, 1, cfg);
  const auto a = p.tensors();
  const auto b = before.tensors();
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) EXPECT_NEAR(b[k][i] - a[k][i], cfg.learning_rate, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  Rng rng(9);
  auto p = LstmParams::random(2, 2, rng);
  const auto before = p;
  auto m = AdamMoments::zeros_like(p);
  adam_step(p, LstmParams::zeros(2, 2), m, 1, {});
  EXPECT_EQ(p, before);

  // Non-zero history: a zero gradient shrinks both moments geometrically.
  auto moments = AdamMoments::zeros_like(p);
  moments.m.head_b = 0.2;
  moments.v.head_b = 0.04;
  AdamConfig cfg;
  auto q = p;
  adam_step(q, LstmParams::zeros(2, 2), moments, 2, cfg);
  EXPECT_DOUBLE_EQ(moments.m.head_b, 0.2 * cfg.beta1);
  EXPECT_DOUBLE_EQ(moments.v.head_b, 0.04 * cfg.beta2);
}

TEST(Adam, ClippingAndErrors) {
  auto p = LstmParams::zeros(1, 1);
  auto g = LstmParams::zeros(1, 1);
  g.head_b = 100.0;
  auto m = AdamMoments::zeros_like(p);
  AdamConfig cfg;
  cfg.clip_norm = 1.0;
  adam_step(p, g, m, 1, cfg);
  EXPECT_NEAR(m.m.head_b, (1.0 - cfg.beta1) * 1.0, 1e-15);  // clipped to norm 1 first
  EXPECT_THROW(adam_step(p, g, m, 0, cfg), ArgumentError);
  auto other = LstmParams::zeros(2, 1);
  EXPECT_THROW(adam_step(p, other, m, 1, cfg), ShapeError);
  EXPECT_EQ(gradient_norm(g), 100.0);
}

TEST(Adam, DeterministicRuns) {
  auto run = [] {
    Rng rng(10);
    auto p = LstmParams::random(2, 3, rng);
    auto m = AdamMoments::zeros_like(p);
    for (std::size_t t = 1; t <= 5; ++t) {
      auto g = LstmParams::zeros(2, 3);
      for (auto ts : g.tensors())
        for (double& v : ts) v = rng.normal();
      adam_step(p, g, m, t, {});
    }
    return p;
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, InitializationRule) {
  TrainConfig cfg;
  cfg.hidden = 9;
  cfg.seed = 3;
  const auto p = initial_params(2, cfg);
  for (double v : p.gate_bias(Gate::Forget)) EXPECT_EQ(v, 1.0);
  const double k = 1.0 / 3.0;
  for (double v : p.w.data()) EXPECT_LE(std::abs(v), k);
  for (double v : p.u.data()) EXPECT_LE(std::abs(v), k);
  for (double v : p.head_w) EXPECT_LE(std::abs(v), k);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  const auto [tr, te] = split_train_test(sinusoid_windows(40, 10.0, 5.0), 0.8);
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 0;
  const auto m = train(tr, cfg);
  EXPECT_TRUE(m.loss_history.empty());
  EXPECT_EQ(m.params, initial_params(1, cfg));
}

TEST(Train, BitIdenticalAcrossRuns) {
  const auto [tr, te] = split_train_test(sinusoid_windows(60, 10.0, 5.0), 0.8);
  TrainConfig cfg;
  cfg.hidden = 5;
  cfg.epochs = 20;
  cfg.batch_size = 7;
  cfg.seed = 99;
  const auto a = train(tr, cfg), b = train(tr, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.loss_history.size(), 20u);
  cfg.seed = 100;
  EXPECT_NE(train(tr, cfg).params, a.params);
}

TEST(Train, DivergenceReportsEpoch) {
  WindowedDataset w;
  w.spec = {2, Variant::Univariate};
  w.inputs = {Matrix{{0.0}, {1.0}}};
  w.targets = {1.0};
  w.target_months = {{2010, 3}};
  w.input_scaler = MinMaxScaler::fit(Vector{0.0, 1.0});
  w.target_scaler.min = {0.0};
  w.target_scaler.max = {1e-310};  // scaled target overflows to infinity
  w.split = 1;
  TrainConfig cfg;
  cfg.hidden = 2;
  cfg.epochs = 3;
  try {
    train(w, cfg);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.hidden = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(TrainSinusoid, ConvergesInScaledUnits) {
  const auto& run = SinusoidRun::get();
  const auto& h = run.model.loss_history;
  ASSERT_EQ(h.size(), 500u);
  for (double v : h) EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(h.back(), h.front());
  EXPECT_LT(std::sqrt(h.back()), 0.05);
}

TEST(TrainSinusoid, TrainingForecastsWithinFivePercentOfAmplitude) {
  const auto& run = SinusoidRun::get();
  const auto pred = predict(run.model, run.train_part);
  for (std::size_t i = 0; i < pred.size(); ++i) EXPECT_LT(std::abs(pred[i] - run.train_part.targets[i]), 50.0) << i;
  EXPECT_EQ(predict(run.model, run.train_part), pred);
}

TEST(Predict, ClampsNegativeCounts) {
  TrainedModel m;
  m.target_scaler = MinMaxScaler::fit(Vector{0.0, 100.0});
  EXPECT_EQ(m.to_case_count(-0.5), 0.0);
  EXPECT_EQ(m.to_case_count(0.25), 25.0);
}

TEST(Predict, RecursiveUsesItsOwnForecasts) {
  const auto& run = SinusoidRun::get();
  Matrix series(run.train_part.size() + 12 + 3, 1);
  std::size_t row = 0;
  for (std::size_t t = 0; t < 12; ++t) series(row++, 0) = run.train_part.inputs[0](t, 0);
  for (double v : run.train_part.targets) series(row++, 0) = v;
  const std::size_t first = row;
  const auto rec = predict_recursive(run.model, series, first, 3);
  ASSERT_EQ(rec.size(), 3u);
  // The first recursive step only sees observed data.
  Matrix window(12, 1);
  for (std::size_t t = 0; t < 12; ++t) window(t, 0) = series(first - 12 + t, 0);
  EXPECT_EQ(rec[0], predict_window(run.model, window));
  EXPECT_THROW(predict_recursive(run.model, series, 5, 1), ArgumentError);
}

TEST(Variants, DifferOnlyInFeatureWidth) {
  for (std::size_t h : {1u, 4u, 32u}) {
    const auto u = LstmParams::zeros(feature_width(Variant::Univariate), h);
    const auto m = LstmParams::zeros(feature_width(Variant::Multivariate), h);
    EXPECT_EQ(u.u.rows(), m.u.rows());
    EXPECT_EQ(u.w.rows(), m.w.rows());
    EXPECT_EQ(u.w.cols(), 1u);
    EXPECT_EQ(m.w.cols(), 5u);
    EXPECT_EQ(m.parameter_count() - u.parameter_count(), 4 * h * 4);
  }
}

TEST(ModelIo, RoundTripIsBitExact) {
  const auto [tr, te] = split_train_test(sinusoid_windows(50, 10.0, 5.0), 0.8);
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.epochs = 4;
  cfg.seed = 12345678901234567890ULL;
  auto m = train(tr, cfg);
  m.region = "Country level test";
  const auto text = model_to_string(m);
  std::istringstream in(text);
  const auto back = read_model(in);
  EXPECT_EQ(back, m);
  EXPECT_EQ(model_to_string(back), text);
}

TEST(ModelIo, RejectsCorruptFiles) {
  std::istringstream bad1("not-a-model 1\n");
  EXPECT_THROW(read_model(bad1), Error);
  const auto [tr, te] = split_train_test(sinusoid_windows(50, 10.0, 5.0), 0.8);
  TrainConfig cfg;
  cfg.hidden = 2;
  cfg.epochs = 1;
  auto text = model_to_string(train(tr, cfg));
  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(read_model(truncated), Error);
}
