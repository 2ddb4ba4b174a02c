#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "klper/numcore/adam.hpp"
#include "klper/numcore/matrix.hpp"
#include "klper/numcore/mlp.hpp"
#include "klper/numcore/snapshot.hpp"
#include "oracles.hpp"

using namespace klper;

namespace {

Rng test_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace

TEST(MlpForward, ZeroActorOutputsZero) {
  Mlp actor({3, 8, 2}, Activation::relu, Activation::tanh);
  Rng rng = test_rng(1);
  const Matrix x = oracle::random_matrix(rng, 5, 3, 4.0);
  const Matrix y = actor.forward(x);
  ASSERT_EQ(y.rows(), 5);
  ASSERT_EQ(y.cols(), 2);
  EXPECT_TRUE((y.array() == 0.0).all());
}

TEST(MlpForward, IdentityLayerPassesInputThrough) {
  Mlp net({3, 3}, Activation::relu, Activation::identity);
  net.layers()[0].weight = Matrix::Identity(3, 3);
  Matrix x(2, 3);
  x << 1.5, -2.0, 0.25, 7.0, 0.0, -1e-3;
  EXPECT_EQ(net.forward(x), x);
}

TEST(MlpForward, MatchesScalarOracle) {
  Rng rng = test_rng(7);
  for (Activation hidden : {Activation::relu, Activation::tanh}) {
    for (Activation out : {Activation::identity, Activation::tanh}) {
      Mlp net = Mlp::fan_in_init({4, 6, 3}, hidden, out, rng);
      const Matrix x = oracle::random_matrix(rng, 7, 4);
      const Matrix y = net.forward(x);
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const std::vector<double> xr{x(r, 0), x(r, 1), x(r, 2), x(r, 3)};
        const auto ref = oracle::scalar_forward(net, xr);
        for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(y(r, c), ref[static_cast<std::size_t>(c)], 1e-13);
      }
    }
  }
}

TEST(MlpForward, PureAndBounded) {
  Rng rng = test_rng(3);
  Mlp actor = oracle::random_net(rng, {2, 16, 16, 2}, Activation::relu, Activation::tanh, 3.0);
  const Matrix x = oracle::random_matrix(rng, 64, 2, 50.0);
  const Matrix a = actor.forward(x);
  const Matrix b = actor.forward(x);
  EXPECT_EQ(a, b);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
}

TEST(MlpForward, ShapeMismatchThrows) {
  Mlp net({3, 4, 1}, Activation::relu, Activation::identity);
  EXPECT_THROW(net.forward(Matrix::Zero(2, 4)), ShapeError);
  EXPECT_THROW(Mlp({3}, Activation::relu, Activation::identity), ShapeError);
  EXPECT_THROW(Mlp({3, 0, 1}, Activation::relu, Activation::identity), ShapeError);
}

TEST(MlpInit, FanInBounds) {
  Rng rng = test_rng(11);
  Mlp net = Mlp::fan_in_init({5, 40, 30, 2}, Activation::relu, Activation::tanh, rng);
  const auto& L = net.layers();
  EXPECT_LE(L[0].weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(5.0));
  EXPECT_LE(L[1].weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(40.0));
  EXPECT_LE(L[2].weight.cwiseAbs().maxCoeff(), 3e-3);
  EXPECT_LE(L[2].bias.cwiseAbs().maxCoeff(), 3e-3);
  EXPECT_GT(L[0].weight.cwiseAbs().maxCoeff(), 0.5 / std::sqrt(5.0));
}

TEST(MlpBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng = test_rng(5);
  Mlp net = oracle::random_net(rng, {3, 5, 2}, Activation::relu, Activation::tanh);
  Tape tape;
  const Matrix x = oracle::random_matrix(rng, 4, 3);
  net.forward(x, tape);
  const MlpGrad g = net.backward(tape, Matrix::Zero(4, 2));
  for (const auto& l : g.layers) {
    EXPECT_TRUE((l.weight.array() == 0.0).all());
    EXPECT_TRUE((l.bias.array() == 0.0).all());
  }
  EXPECT_TRUE((g.input.array() == 0.0).all());
}

TEST(MlpBackward, ZeroNetLastLayerIsUpstreamTimesInput) {
  // All-zero weights: the last layer's input is relu(0) = 0 for hidden nets, so
  // use a single linear layer where the weight gradient is x^T g exactly.
  Mlp net({3, 2}, Activation::relu, Activation::identity);
  Rng rng = test_rng(8);
  const Matrix x = oracle::random_matrix(rng, 6, 3);
  const Matrix up = oracle::random_matrix(rng, 6, 2);
  Tape tape;
  net.forward(x, tape);
  const MlpGrad g = net.backward(tape, up);
  const klper::Vector fd = oracle::fd_parameter_gradient(net, x, up);
  const klper::Vector an = oracle::flatten(g);
  for (Eigen::Index i = 0; i < fd.size(); ++i) EXPECT_NEAR(an[i], fd[i], 1e-8);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      double s = 0.0;
      for (Eigen::Index r = 0; r < 6; ++r) s += x(r, i) * up(r, j);
      EXPECT_NEAR(g.layers[0].weight(i, j), s, 1e-12);
    }
  }
}

TEST(MlpBackward, MatchesFiniteDifferences) {
  Rng rng = test_rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const Activation hidden = trial % 2 ? Activation::tanh : Activation::relu;
    const Activation out = trial % 3 == 0 ? Activation::identity : Activation::tanh;
    Mlp net = oracle::random_net(rng, {4, 9, 7, 2}, hidden, out);
    const Matrix x = oracle::random_matrix(rng, 5, 4);
    const Matrix up = oracle::random_matrix(rng, 5, 2);
    Tape tape;
    net.forward(x, tape);
    const MlpGrad g = net.backward(tape, up);
    const klper::Vector an = oracle::flatten(g);
    const klper::Vector fd = oracle::fd_parameter_gradient(net, x, up);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < fd.size(); ++i) worst = std::max(worst, oracle::relative_error(an[i], fd[i]));
    EXPECT_LE(worst, 1e-4) << "trial " << trial;

    const Matrix fdx = oracle::fd_input_gradient(net, x, up);
    for (Eigen::Index i = 0; i < fdx.size(); ++i) {
      EXPECT_LE(oracle::relative_error(g.input.data()[i], fdx.data()[i]), 1e-4);
    }
  }
}

TEST(MlpBackward, InputOnlyModeSkipsParameterGradients) {
  Rng rng = test_rng(2);
  Mlp net = oracle::random_net(rng, {3, 4, 1}, Activation::relu, Activation::identity);
  Tape tape;
  const Matrix x = oracle::random_matrix(rng, 2, 3);
  net.forward(x, tape);
  const MlpGrad full = net.backward(tape, Matrix::Ones(2, 1));
  const MlpGrad input_only = net.backward(tape, Matrix::Ones(2, 1), false);
  EXPECT_TRUE(input_only.layers.empty());
  EXPECT_EQ(input_only.input, full.input);
}

TEST(MlpBackward, MissingTapeIsStateError) {
  Mlp net({2, 3, 1}, Activation::relu, Activation::identity);
  Tape tape;
  EXPECT_THROW(net.backward(tape, Matrix::Zero(1, 1)), StateError);
  Mlp other({2, 5, 1}, Activation::relu, Activation::identity);
  other.forward(Matrix::Zero(1, 2), tape);
  EXPECT_THROW(net.backward(tape, Matrix::Zero(1, 1)), StateError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Mlp net({2, 3, 1}, Activation::relu, Activation::identity);
  const double lr = 0.01;
  Adam opt(net, {.lr = lr});
  MlpGrad g;
  for (const auto& l : net.layers()) {
    g.layers.push_back({Matrix::Ones(l.weight.rows(), l.weight.cols()), RowVector::Ones(l.bias.size())});
  }
  opt.step(net, g);
  // m_hat = 1, v_hat = 1 -> step = lr / (1 + eps).
  const double expected = -lr / (1.0 + 1e-8);
  for (double p : net.flat_parameters()) EXPECT_NEAR(p, expected, 1e-18);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Rng rng = test_rng(4);
  Mlp net = oracle::random_net(rng, {2, 3, 1}, Activation::relu, Activation::identity);
  const auto before = net.flat_parameters();
  Adam opt(net, {});
  MlpGrad g;
  for (const auto& l : net.layers()) {
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), RowVector::Zero(l.bias.size())});
  }
  opt.step(net, g);
  EXPECT_EQ(net.flat_parameters(), before);
}

TEST(Adam, TwoStepsMatchHandRecurrences) {
  Mlp net({1, 1}, Activation::relu, Activation::identity);
  const AdamConfig cfg{.lr = 0.1, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8};
  Adam opt(net, cfg);
  MlpGrad g;
  g.layers.push_back({Matrix::Constant(1, 1, 0.5), RowVector::Constant(1, -2.0)});

  double w = 0.0, m = 0.0, v = 0.0;
  std::vector<double> steps;
  for (int t = 1; t <= 2; ++t) {
    opt.step(net, g);
    m = 0.9 * m + 0.1 * 0.5;
    v = 0.999 * v + 0.001 * 0.25;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    const double before = w;
    w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    steps.push_back(std::abs(w - before));
    EXPECT_NEAR(net.layers()[0].weight(0, 0), w, 1e-15);
  }
  EXPECT_LE(steps[1], steps[0] + 1e-12);
  EXPECT_NEAR(opt.first_moment()[0].weight(0, 0), m, 1e-15);
  EXPECT_NEAR(opt.second_moment()[0].weight(0, 0), v, 1e-15);
}

TEST(Adam, Errors) {
  Mlp net({2, 1}, Activation::relu, Activation::identity);
  EXPECT_THROW(Adam(net, {.lr = 0.0}), ConfigError);
  EXPECT_THROW(Adam(net, {.beta1 = 1.0}), ConfigError);
  Adam opt(net, {});
  MlpGrad g;
  g.layers.push_back({Matrix::Zero(3, 1), RowVector::Zero(1)});
  EXPECT_THROW(opt.step(net, g), ShapeError);
}

TEST(SoftUpdate, EndpointsAndMidpoint) {
  Rng rng = test_rng(9);
  Mlp online = oracle::random_net(rng, {2, 4, 1}, Activation::relu, Activation::identity);
  Mlp target = oracle::random_net(rng, {2, 4, 1}, Activation::relu, Activation::identity);
  const Mlp original = target;

  soft_update(target, online, 0.0);
  EXPECT_EQ(target, original);
  soft_update(target, online, 1.0);
  EXPECT_EQ(target, online);

  Mlp zero({2, 4, 1}, Activation::relu, Activation::identity);
  Mlp ones = zero;
  ones.set_flat_parameters(klper::Vector::Ones(static_cast<Eigen::Index>(ones.parameter_count())));
  soft_update(zero, ones, 0.5);
  for (double p : zero.flat_parameters()) EXPECT_EQ(p, 0.5);
}

TEST(SoftUpdate, ContractsDistanceByOneMinusTau) {
  Rng rng = test_rng(10);
  const Mlp online = oracle::random_net(rng, {3, 5, 2}, Activation::relu, Activation::tanh);
  Mlp target = oracle::random_net(rng, {3, 5, 2}, Activation::relu, Activation::tanh);
  const double tau = 0.005;
  double d = (target.flat_parameters() - online.flat_parameters()).norm();
  for (int i = 0; i < 50; ++i) {
    soft_update(target, online, tau);
    const double d2 = (target.flat_parameters() - online.flat_parameters()).norm();
    EXPECT_NEAR(d2 / d, 1.0 - tau, 1e-9);
    d = d2;
  }
}

TEST(SoftUpdate, Errors) {
  Mlp a({2, 1}, Activation::relu, Activation::identity);
  Mlp b({3, 1}, Activation::relu, Activation::identity);
  EXPECT_THROW(soft_update(a, a, -0.1), ConfigError);
  EXPECT_THROW(soft_update(a, a, 1.5), ConfigError);
  EXPECT_THROW(soft_update(a, b, 0.5), ShapeError);
}

TEST(Matrix, HcatJoinsColumns) {
  Matrix l(2, 1), r(2, 2);
  l << 1, 2;
  r << 3, 4, 5, 6;
  Matrix expected(2, 3);
  expected << 1, 3, 4, 2, 5, 6;
  EXPECT_EQ(hcat(l, r), expected);
  EXPECT_THROW(hcat(l, Matrix::Zero(3, 1)), ShapeError);
}

TEST(Snapshot, BitExactRoundTrip) {
  Rng rng = test_rng(12);
  const Mlp net = oracle::random_net(rng, {3, 7, 5, 2}, Activation::relu, Activation::tanh);
  const auto path = std::filesystem::temp_directory_path() / "klper_test_snapshot.bin";
  save_mlp(path.string(), net);
  const Mlp back = load_mlp(path.string());
  EXPECT_EQ(back, net);
  EXPECT_EQ(back.hidden_activation(), Activation::relu);
  EXPECT_EQ(back.output_activation(), Activation::tanh);
  std::filesystem::remove(path);
}

TEST(Snapshot, BadFilesRaiseFileError) {
  EXPECT_THROW(load_mlp("/nonexistent/dir/net.bin"), FileError);
  const auto path = std::filesystem::temp_directory_path() / "klper_test_bad_snapshot.bin";
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTMAGIC1234";
  }
  EXPECT_THROW(load_mlp(path.string()), FileError);
  std::filesystem::remove(path);
}
