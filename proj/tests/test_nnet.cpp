#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dbn/error.hpp"
#include "dbn/nnet/checkpoint.hpp"
#include "dbn/nnet/train.hpp"
#include "support/oracles.hpp"

using namespace dbn;
using namespace dbn::nnet;

namespace {

NetConfig small_net(std::uint64_t seed = 1) {
  NetConfig c;
  c.input_size = 16;
  c.width = 4;
  c.seed = seed;
  return c;
}

LabeledImages random_set(Rng& rng, std::size_t n, std::size_t size, std::size_t classes) {
  LabeledImages s;
  for (std::size_t i = 0; i < n; ++i) {
    s.images.push_back(oracle::random_image(rng, size, size));
    s.labels.push_back(i % classes);
  }
  return s;
}

}  // namespace

TEST_CASE("conv output size and parameter formulas") {
  CHECK(conv_out_size(32, 3, 2, 1) == 16);
  CHECK(conv_out_size(31, 3, 2, 1) == 16);
  CHECK(conv_out_size(5, 3, 1, 0) == 3);
  CHECK(param_count({LayerKind::conv2d, 32, 64, 3, 1, 1, false}) == 18432);
  CHECK(param_count({LayerKind::ds_block, 32, 64, 3, 1, 1, false}) == 2336);
  CHECK(param_count({LayerKind::residual_block, 8, 8, 3, 1, 1, true}) == 2 * (9 * 64 + 8));
  CHECK(param_count({LayerKind::dense, 10, 4, 1, 1, 0, true}) == 44);
  CHECK(param_count({LayerKind::relu, 4, 4}) == 0);
}

TEST_CASE("with bias, the separable ratio approaches 1/Cout + 1/K^2 as Cin grows") {
  double prev = 1.0;
  for (std::size_t cin : {8, 32, 128, 512}) {
    const double ds = double(param_count({LayerKind::ds_block, cin, 64, 3, 1, 1, true}));
    const double full = double(param_count({LayerKind::conv2d, cin, 64, 3, 1, 1, true}));
    const double dev = std::abs(ds / full - (1.0 / 64 + 1.0 / 9));
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 0.003);
}

TEST_CASE("1x1 identity conv and all-ones 3x3 kernel") {
  Rng rng(1);
  Conv2d id(2, 2, 1, 1, 0, rng);
  id.weight().value = {1, 0, 0, 1};
  id.bias().value = {0, 0};
  const auto x = oracle::random_tensor(rng, {2, 2, 4, 5});
  CHECK(id.forward(x, Mode::eval).values() == x.values());

  Conv2d ones(1, 1, 3, 1, 1, rng);
  std::fill(ones.weight().value.begin(), ones.weight().value.end(), 1.0);
  ones.bias().value = {0.0};
  const auto y = ones.forward(Tensor4({1, 1, 3, 3}, 1.0), Mode::eval);
  CHECK(y.at(0, 0, 1, 1) == 9.0);
  CHECK(y.at(0, 0, 0, 0) == 4.0);
  CHECK(y.at(0, 0, 0, 1) == 6.0);
}

TEST_CASE("depthwise then pointwise equals the composed dense kernel") {
  Rng rng(2);
  const std::size_t C = 3, O = 5, K = 3;
  DepthwiseConv2d dw(C, K, 2, 1, rng);
  auto pw = make_pointwise(C, O, rng);
  for (auto& b : dw.bias().value) b = rng.uniform(-1, 1);
  for (auto& b : pw->bias().value) b = rng.uniform(-1, 1);
  Conv2d full(C, O, K, 2, 1, rng);
  for (std::size_t o = 0; o < O; ++o) {
    double bias = pw->bias().value[o];
    for (std::size_t c = 0; c < C; ++c) {
      const double p = pw->weight().value[o * C + c];
      bias += p * dw.bias().value[c];
      for (std::size_t k = 0; k < K * K; ++k)
        full.weight().value[(o * C + c) * K * K + k] = p * dw.weight().value[c * K * K + k];
    }
    full.bias().value[o] = bias;
  }
  const auto x = oracle::random_tensor(rng, {2, C, 7, 6});
  const auto a = pw->forward(dw.forward(x, Mode::eval), Mode::eval);
  const auto b = full.forward(x, Mode::eval);
  REQUIRE(a.shape() == b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("residual block with zero weights is relu of its input") {
  Rng rng(3);
  ResidualBlock block(3, 3, rng);
  std::vector<Param*> ps;
  block.collect_params(ps);
  for (auto* p : ps) std::fill(p->value.begin(), p->value.end(), 0.0);
  const auto x = oracle::random_tensor(rng, {2, 3, 5, 5});
  const auto y = block.forward(x, Mode::eval);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == std::max(0.0, x[i]));
  CHECK_THROWS_AS(block.forward(oracle::random_tensor(rng, {1, 2, 5, 5}), Mode::eval), ConfigError);
}

TEST_CASE("softmax rows sum to one and survive large logits") {
  Softmax sm(4);
  const Tensor4 z({2, 4, 1, 1}, std::vector<double>{1000, 1001, 999, 1000, -3, 0, 2, 1});
  const auto p = sm.forward(z, Mode::eval);
  for (std::size_t n = 0; n < 2; ++n) {
    double s = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::isfinite(p.at(n, k, 0, 0)));
      s += p.at(n, k, 0, 0);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(p.at(0, 1, 0, 0) > p.at(0, 0, 0, 0));
}

TEST_CASE("dropout: identity in eval, inverted scaling in train") {
  Dropout d(1000, 0.3, 5);
  const Tensor4 x({1, 1000, 1, 1}, 1.0);
  CHECK(d.forward(x, Mode::eval).values() == x.values());
  const auto y = d.forward(x, Mode::train);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) ++zeros;
    else CHECK(y[i] == doctest::Approx(1.0 / 0.7));
  }
  CHECK(zeros > 240);
  CHECK(zeros < 360);
  CHECK_THROWS_AS(Dropout(4, 1.0, 0), ConfigError);
}

TEST_CASE("layer gradients match finite differences") {
  Rng rng(9);
  Dense dense(6, 3, rng);
  CHECK(oracle::check_layer(dense, oracle::random_tensor(rng, {2, 6, 1, 1}), rng).max_rel < 1e-6);
  DepthwiseConv2d dw(2, 3, 2, 1, rng);
  CHECK(oracle::check_layer(dw, oracle::random_tensor(rng, {2, 2, 5, 6}), rng).max_rel < 1e-6);
  Conv2d conv(2, 3, 3, 2, 1, rng);
  CHECK(oracle::check_layer(conv, oracle::random_tensor(rng, {1, 2, 6, 5}), rng).max_rel < 1e-6);
  Softmax sm(4);
  CHECK(oracle::check_layer(sm, oracle::random_tensor(rng, {3, 4, 1, 1}), rng).max_rel < 1e-6);
  GlobalAvgPool gap(3);
  CHECK(oracle::check_layer(gap, oracle::random_tensor(rng, {2, 3, 4, 4}), rng).max_rel < 1e-6);
  Dropout drop(5, 0.4, 1);
  const auto rep = oracle::check_layer(drop, oracle::random_tensor(rng, {2, 5, 1, 1}), rng, Mode::train,
                                       [&] { drop.reseed(77); });
  CHECK(rep.max_rel < 1e-6);
  CHECK(rep.checked == 10);
}

TEST_CASE("network structure and untrained loss") {
  Network net(small_net());
  std::size_t sum = 0;
  for (const auto& e : net.layer_table()) sum += param_count(e.spec);
  CHECK(net.parameter_count() == sum);
  CHECK(net.layer_table().size() == 5 + 3 + 3);

  Rng rng(4);
  const auto set = random_set(rng, 32, 16, 4);
  CHECK(evaluate(net, set).loss == doctest::Approx(std::log(4.0)).epsilon(0.2 / std::log(4.0)));

  const auto p = predict(net, set.images, 7);
  for (std::size_t i = 0; i < p.rows(); ++i) CHECK(std::accumulate(p.row(i), p.row(i) + 4, 0.0) ==
                                                   doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<GrayImage> twice{set.images[3], set.images[3]};
  const auto q = predict(net, twice);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(q(0, k) == q(1, k));
    CHECK(q(0, k) == p(3, k));
  }
  CHECK_THROWS_AS(predict(net, {GrayImage(17, 16)}), ConfigError);

  NetConfig bad = small_net();
  bad.input_size = 8;
  CHECK_THROWS_AS(Network{bad}, ConfigError);
  bad = small_net();
  bad.kernel = 4;
  CHECK_THROWS_AS(Network{bad}, ConfigError);
}

TEST_CASE("full network gradient check") {
  Network net(small_net(3));
  Rng rng(12);
  const auto x = oracle::random_tensor(rng, net.input_shape(2), 0.0, 1.0);
  const auto rep = gradient_check(net, x, {1, 3});
  CHECK(rep.checked > rep.skipped_at_kinks);
  CHECK(rep.max_relative_error < 1e-4);
}

TEST_CASE("checkpoint round-trip and corruption") {
  Network net(small_net(7));
  Rng rng(1);
  const auto set = random_set(rng, 5, 16, 4);
  const auto bytes = encode_checkpoint(net);
  Network back = decode_checkpoint(bytes);
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.config().dropout_rate == net.config().dropout_rate);
  const auto a = predict(net, set.images), b = predict(back, set.images);
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-5));
  CHECK(layer_table_csv(net).rfind("index,section,kind,in_channels,out_channels,kernel,stride,params\n", 0) == 0);

  auto corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(corrupt), DataError);
  corrupt = bytes;
  corrupt[8] = 9;
  CHECK_THROWS_AS(decode_checkpoint(corrupt), DataError);
  CHECK_THROWS_AS(decode_checkpoint(std::span(bytes).first(bytes.size() - 1)), DataError);
  corrupt = bytes;
  corrupt.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(corrupt), DataError);
  CHECK_THROWS_AS(decode_checkpoint(std::span(bytes).first(20)), DataError);
}

TEST_CASE("training is deterministic and the lr never increases") {
  Rng rng(5);
  const auto tr = random_set(rng, 12, 16, 4), va = random_set(rng, 4, 16, 4);
  TrainConfig tc;
  tc.epochs = 12;
  tc.batch_size = 4;
  tc.lr_reduce_patience = 1;
  tc.early_stop_patience = 4;
  tc.seed = 2;
  Network n1(small_net()), n2(small_net());
  const auto h1 = train(n1, tr, va, tc), h2 = train(n2, tr, va, tc);
  CHECK(history_csv(h1) == history_csv(h2));
  CHECK(history_csv(h1).rfind("epoch,train_loss,train_acc,val_loss,val_acc,lr\n", 0) == 0);
  for (std::size_t i = 1; i < h1.epochs.size(); ++i) CHECK(h1.epochs[i].lr <= h1.epochs[i - 1].lr);
  CHECK(h1.best_epoch >= 1);
  CHECK(h1.best_epoch <= h1.stopped_epoch);
  // The restored weights reproduce the best epoch's val loss.
  CHECK(evaluate(n1, va, tc.batch_size).loss == doctest::Approx(h1.epochs[h1.best_epoch - 1].val_loss));

  CHECK_THROWS_AS(train(n1, LabeledImages{}, va, tc), ConfigError);
  TrainConfig bad = tc;
  bad.lr_reduce_factor = 1.0;
  CHECK_THROWS_AS(train(n1, tr, va, bad), ConfigError);
}

TEST_CASE("frozen epochs update only the head") {
  Rng rng(6);
  const auto tr = random_set(rng, 8, 16, 4), va = random_set(rng, 4, 16, 4);
  Network net(small_net());
  std::vector<std::vector<double>> before;
  for (auto* p : net.parameters()) before.push_back(p->value);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 4;
  tc.freeze_branches_epochs = 1;
  train(net, tr, va, tc);
  const auto params = net.parameters();
  const auto head = net.head_parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool is_head = std::find(head.begin(), head.end(), params[i]) != head.end();
    CHECK((params[i]->value != before[i]) == is_head);
  }
}
