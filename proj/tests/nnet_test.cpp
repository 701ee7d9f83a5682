#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "imb/adam.hpp"
#include "imb/checkpoint.hpp"
#include "imb/error.hpp"
#include "imb/loss.hpp"
#include "imb/model.hpp"
#include "imb/train.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace imb;

namespace {

LayerSpec conv(std::size_t n) { return {LayerKind::conv2d, n, Activation::relu}; }
LayerSpec pool() { return {LayerKind::maxpool, 0, Activation::none}; }
LayerSpec flat() { return {LayerKind::flatten, 0, Activation::none}; }
LayerSpec dense(std::size_t n, Activation a) { return {LayerKind::dense, n, a}; }

Tensor random_tensor(Shape shape, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Gives every bias a random value so ReLU masks are not degenerate.
void randomize_biases(Model& m, RngStream& rng) {
  auto params = m.params();
  for (std::size_t i = 1; i < params.size(); i += 2)
    for (auto& v : params[i].values()) v = rng.uniform(-0.1, 0.1);
  m.set_params(std::move(params));
}

Dataset separable_blobs(std::uint64_t seed) {
  BlobSpec spec;
  spec.class_counts = {500, 500};
  spec.dimension = 2;
  spec.separation = 8.0;
  spec.sigma = 1.0;
  auto rng = make_rng(seed);
  return synth_blobs(spec, rng);
}

}  // namespace

TEST(CnnHead, ParameterCountAndShapeTrace) {
  const auto m = build_cnn_head(128, 1, 4, make_rng(0));
  const auto shapes = m.layer_output_shapes();
  ASSERT_EQ(shapes.size(), 8u);
  EXPECT_EQ(shapes[0], (Shape{126, 126, 32}));
  EXPECT_EQ(shapes[1], (Shape{63, 63, 32}));
  EXPECT_EQ(shapes[2], (Shape{61, 61, 64}));
  EXPECT_EQ(shapes[3], (Shape{30, 30, 64}));
  EXPECT_EQ(shapes[4], (Shape{28, 28, 32}));
  EXPECT_EQ(shapes[5], (Shape{25088}));
  EXPECT_EQ(shapes[6], (Shape{16}));
  EXPECT_EQ(shapes[7], (Shape{4}));
  // Layer formulas: 9*1*32+32, 9*32*64+64, 9*64*32+32, 25088*16+16, 16*4+4.
  EXPECT_EQ(m.parameter_count(), 320u + 18496u + 18464u + 401424u + 68u);
  EXPECT_EQ(m.parameter_count(), 438772u);
}

TEST(CnnHead, LayerSequence) {
  const auto m = build_cnn_head(32, 3, 5, make_rng(0));
  const std::vector<LayerSpec> expect{conv(32), pool(), conv(64), pool(), conv(32), flat(),
                                      dense(16, Activation::relu), dense(5, Activation::softmax)};
  EXPECT_EQ(m.layers(), expect);
  EXPECT_EQ(m.input_shape(), (Shape{32, 32, 3}));
}

TEST(CnnHead, MinimumSide) {
  const auto m = build_cnn_head(kMinCnnSide, 1, 4, make_rng(0));
  EXPECT_GT(m.layer_output_shapes()[5][0], 0u);
  EXPECT_THROW(build_cnn_head(kMinCnnSide - 1, 1, 4, make_rng(0)), ValidationError);
  EXPECT_THROW(build_cnn_head(64, 1, 1, make_rng(0)), ValidationError);
}

TEST(CnnHead, SeedDeterminesWeights) {
  const auto a = build_cnn_head(20, 1, 3, make_rng(7));
  const auto b = build_cnn_head(20, 1, 3, make_rng(7));
  const auto c = build_cnn_head(20, 1, 3, make_rng(8));
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_TRUE(bit_identical(a.params()[i], b.params()[i]));
  EXPECT_FALSE(bit_identical(a.params()[0], c.params()[0]));
  for (std::size_t i = 1; i < a.params().size(); i += 2)
    for (double v : a.params()[i].values()) EXPECT_EQ(v, 0.0);
}

TEST(ShapeAlgebra, RandomizedSides) {
  auto rng = make_rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t side = 18 + rng.uniform_index(120);
    const auto m = build_cnn_head(side, 1, 2, make_rng(0));
    const auto s = m.layer_output_shapes();
    std::size_t x = side - 2;
    ASSERT_EQ(s[0][0], x);
    x /= 2;
    ASSERT_EQ(s[1][0], x);
    x -= 2;
    ASSERT_EQ(s[2][0], x);
    x /= 2;
    ASSERT_EQ(s[3][0], x);
    x -= 2;
    ASSERT_EQ(s[4][0], x);
    ASSERT_EQ(s[5][0], x * x * 32);
  }
}

TEST(MlpHead, ParameterCounts) {
  EXPECT_EQ(build_mlp_head(512, 4, make_rng(0)).parameter_count(), 8276u);
  EXPECT_EQ(build_mlp_head(1, 2, make_rng(0)).parameter_count(), 66u);
  for (std::size_t d : {3u, 17u, 100u})
    for (std::size_t k : {2u, 4u, 9u})
      EXPECT_EQ(build_mlp_head(d, k, make_rng(0)).parameter_count(), 16 * d + 16 + 16 * k + k);
}

TEST(MlpHead, ZeroInputGivesUniformPrediction) {
  const auto m = build_mlp_head(6, 4, make_rng(1));
  const auto p = softmax_rows(m.forward(Tensor({2, 6}, 0.0)));
  for (double v : p.values()) EXPECT_EQ(v, 0.25);
}

TEST(Forward, LogitShape) {
  const auto m = build_cnn_head(24, 1, 4, make_rng(0));
  auto rng = make_rng(1);
  EXPECT_EQ(m.forward(random_tensor({20, 24, 24, 1}, rng, 0, 1)).shape(), (Shape{20, 4}));
  EXPECT_THROW(m.forward(Tensor({2, 23, 24, 1}, 0.0)), ValidationError);
}

TEST(Forward, ZeroWeightsGiveZeroLogits) {
  auto m = build_cnn_head(20, 1, 3, make_rng(0));
  auto params = m.params();
  for (auto& p : params) p = Tensor::zeros_like(p);
  m.set_params(std::move(params));
  auto rng = make_rng(2);
  const auto z = m.forward(random_tensor({3, 20, 20, 1}, rng));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, PoolOfConstantMapIsConstant) {
  // Pool-only front end followed by a dense layer with unit weights on one
  // input: the logits reveal pooled values directly.
  Model m({6, 7, 2}, {pool(), flat(), dense(2, Activation::softmax)}, make_rng(0));
  auto params = m.params();
  params[0] = Tensor::zeros_like(params[0]);
  params[0][0] = 1.0;                     // logit 0 reads pooled (0, 0, ch0)
  params[0][2 * (3 * 3 * 2 - 1) + 1] = 1.0;  // logit 1 reads pooled (2, 2, ch1)
  m.set_params(params);
  EXPECT_EQ(m.layer_output_shapes()[0], (Shape{3, 3, 2}));
  const auto z = m.forward(Tensor({1, 6, 7, 2}, 0.625));
  EXPECT_EQ(z[0], 0.625);
  EXPECT_EQ(z[1], 0.625);
}

TEST(Backward, ConvStackMatchesFiniteDifferences) {
  auto rng = make_rng(11);
  Model m({12, 12, 1}, {conv(4), pool(), conv(6), pool(), flat(), dense(5, Activation::relu),
                        dense(3, Activation::softmax)},
          make_rng(1));
  randomize_biases(m, rng);
  const auto batch = random_tensor({4, 12, 12, 1}, rng, 0, 1);
  const auto w = random_tensor({4, 3}, rng);
  const auto r = oracle::gradient_check(m, batch, w, 1e-4, 1e-6, 100000, rng);
  EXPECT_LT(r.worst, 1e-3);
  EXPECT_LT(r.kinks * 50, r.checked);
}

TEST(Backward, FullCnnHeadMatchesFiniteDifferences) {
  auto rng = make_rng(12);
  auto m = build_cnn_head(kMinCnnSide, 1, 4, make_rng(2));
  randomize_biases(m, rng);
  const auto batch = random_tensor({4, kMinCnnSide, kMinCnnSide, 1}, rng, 0, 1);
  const auto w = random_tensor({4, 4}, rng);
  const auto r = oracle::gradient_check(m, batch, w, 1e-4, 1e-6, 300, rng);
  EXPECT_LT(r.worst, 1e-3);
  EXPECT_LT(r.kinks * 50, r.checked);
}

TEST(Backward, DenseOnlyMatchesFiniteDifferences) {
  auto rng = make_rng(13);
  auto m = build_mlp_head(7, 3, make_rng(3));
  randomize_biases(m, rng);
  const auto batch = random_tensor({5, 7}, rng);
  const auto w = random_tensor({5, 3}, rng);
  const auto r = oracle::gradient_check(m, batch, w, 1e-4, 1e-6, 100000, rng);
  EXPECT_LT(r.worst, 1e-6);
  EXPECT_LT(r.kinks * 50, r.checked);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  auto m = build_cnn_head(18, 1, 3, make_rng(0));
  auto rng = make_rng(1);
  m.forward_train(random_tensor({2, 18, 18, 1}, rng, 0, 1));
  for (const auto& g : m.backward(Tensor({2, 3}, 0.0)))
    for (double v : g.values()) ASSERT_EQ(v, 0.0);
}

TEST(Backward, DuplicatedSampleDoublesContribution) {
  auto m = build_mlp_head(5, 3, make_rng(4));
  auto rng = make_rng(2);
  const auto x = random_tensor({1, 5}, rng);
  const auto w = random_tensor({1, 3}, rng);
  Tensor xx({2, 5}), ww({2, 3});
  for (std::size_t j = 0; j < 5; ++j) xx[j] = xx[5 + j] = x[j];
  for (std::size_t j = 0; j < 3; ++j) ww[j] = ww[3 + j] = w[j];
  m.forward_train(x);
  const auto single = m.backward(w);
  m.forward_train(xx);
  const auto twice = m.backward(ww);
  for (std::size_t p = 0; p < single.size(); ++p)
    for (std::size_t i = 0; i < single[p].size(); ++i) EXPECT_EQ(twice[p][i], 2.0 * single[p][i]);
}

TEST(Backward, RequiresCachedForward) {
  auto m = build_mlp_head(3, 2, make_rng(0));
  EXPECT_THROW(m.backward(Tensor({1, 2}, 1.0)), std::logic_error);
  m.forward_train(Tensor({1, 3}, 1.0));
  m.clear_cache();
  EXPECT_THROW(m.backward(Tensor({1, 2}, 1.0)), std::logic_error);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> params{Tensor({4}, 0.0)};
  std::vector<Tensor> grads{Tensor({4})};
  grads[0][0] = 3.0;
  grads[0][1] = -0.02;
  grads[0][2] = 1e3;
  grads[0][3] = -7.0;
  AdamState st;
  adam_step(params, grads, st, 0.01);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(params[0][i]), 0.01, 1e-8);
  EXPECT_LT(params[0][0], 0.0);
  EXPECT_GT(params[0][1], 0.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<Tensor> params{Tensor({3}, 1.5)};
  const std::vector<Tensor> grads{Tensor({3}, 0.0)};
  AdamState st;
  for (int i = 0; i < 50; ++i) adam_step(params, grads, st, 0.1);
  for (double v : params[0].values()) EXPECT_EQ(v, 1.5);
}

TEST(Adam, TwoStepScalarTrace) {
  // Hand arithmetic, g = 1 twice, lr = 0.1:
  //   m1 = 0.1, v1 = 0.001, m_hat = v_hat = 1        -> p1 = -0.1 / (1 + 1e-8)
  //   m2 = 0.19, v2 = 0.001999, m_hat = 0.19/0.19 = 1, v_hat = 1
  //                                                 -> p2 = p1 - 0.1 / (1 + 1e-8)
  std::vector<Tensor> params{Tensor({1}, 0.0)};
  const std::vector<Tensor> grads{Tensor({1}, 1.0)};
  AdamState st;
  adam_step(params, grads, st, 0.1);
  EXPECT_NEAR(st.m[0][0], 0.1, 1e-16);
  EXPECT_NEAR(st.v[0][0], 0.001, 1e-18);
  EXPECT_NEAR(params[0][0], -0.1 / (1 + 1e-8), 1e-15);
  adam_step(params, grads, st, 0.1);
  EXPECT_EQ(st.step, 2u);
  EXPECT_NEAR(st.m[0][0], 0.19, 1e-16);
  EXPECT_NEAR(st.v[0][0], 0.001999, 1e-17);
  EXPECT_NEAR(params[0][0], -0.2 / (1 + 1e-8), 1e-15);
}

TEST(Train, StepsPerEpoch) {
  EXPECT_EQ(steps_per_epoch(3801, 20), 191u);
  EXPECT_EQ(steps_per_epoch(1600, 20), 80u);
  EXPECT_EQ(steps_per_epoch(1, 20), 1u);
  EXPECT_THROW(steps_per_epoch(10, 0), ValidationError);
}

TEST(Train, SeparableBlobsAreLearned) {
  const auto ds = separable_blobs(1);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    x.emplace_back(ds.samples[i].values().begin(), ds.samples[i].values().end());
    y.push_back(ds.labels[i] == 0 ? 1 : -1);
  }
  ASSERT_TRUE(oracle::perceptron_separates(x, y));

  auto m = build_mlp_head(2, 2, make_rng(1));
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.learning_rate = 1e-3;
  const auto h = train(m, ds, cfg);
  ASSERT_EQ(h.epoch_loss.size(), 10u);
  const auto pred = predict(m, ds);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) correct += pred[i] == ds.labels[i];
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(ds.size()), 0.99);
}

TEST(Train, ZeroLearningRateKeepsWeights) {
  const auto ds = separable_blobs(2);
  auto m = build_mlp_head(2, 2, make_rng(1));
  const auto before = m.params();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  train(m, ds, cfg);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_TRUE(bit_identical(before[i], m.params()[i]));
}

TEST(Train, DeterministicHistory) {
  const auto ds = separable_blobs(3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  cfg.loss = LossKind::focal;
  auto a = build_mlp_head(2, 2, make_rng(5)), b = build_mlp_head(2, 2, make_rng(5));
  EXPECT_EQ(train(a, ds, cfg), train(b, ds, cfg));
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_TRUE(bit_identical(a.params()[i], b.params()[i]));
}

TEST(Train, LossMostlyNonIncreasing) {
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = separable_blobs(100 + seed);
    auto m = build_mlp_head(2, 2, make_rng(seed));
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = seed;
    const auto h = train(m, ds, cfg);
    bool ok = true;
    for (std::size_t e = 1; e < h.epoch_loss.size(); ++e) ok = ok && h.epoch_loss[e] <= h.epoch_loss[e - 1];
    monotone += ok;
  }
  EXPECT_GE(monotone, 9);
}

TEST(Train, RejectsMismatchedData) {
  const auto ds = separable_blobs(4);
  auto m = build_mlp_head(3, 2, make_rng(0));
  EXPECT_THROW(train(m, ds, {}), ValidationError);
  Dataset empty;
  empty.class_names = {"a", "b"};
  auto m2 = build_mlp_head(2, 2, make_rng(0));
  EXPECT_THROW(train(m2, empty, {}), ValidationError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto m = build_cnn_head(20, 2, 3, make_rng(6));
  const auto path = std::filesystem::temp_directory_path() / "imb_nnet_roundtrip.nnet";
  save_checkpoint(path, m);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.layers(), m.layers());
  EXPECT_EQ(back.input_shape(), m.input_shape());
  for (std::size_t i = 0; i < m.params().size(); ++i) EXPECT_TRUE(bit_identical(back.params()[i], m.params()[i]));
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(m));
}

TEST(Checkpoint, CorruptionDetected) {
  const auto bytes = encode_checkpoint(build_mlp_head(4, 2, make_rng(0)));
  auto bad = bytes;
  bad[bad.size() - 20] ^= 0x10;
  try {
    decode_checkpoint(bad);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.kind(), IoError::Kind::checksum_mismatch);
  }
  auto magic = bytes;
  magic[1] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), IoError);
  auto cut = bytes;
  cut.resize(10);
  EXPECT_THROW(decode_checkpoint(cut), IoError);
}
