// Copyright 2026 The pcgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "support.hpp"

#include "pcgan/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace nx = pcgan::numerics;
using nx::Tape;
using nx::Tensor;
using nx::Var;
using pcgan::test::max_gradient_error;
using pcgan::test::probe;
using pcgan::test::random_tensor;

namespace
{

constexpr double kTol = 1e-6;

std::mt19937_64 & rng()
{
  static std::mt19937_64 r(2026);
  return r;
}

Tensor rnd(nx::Shape s, double lo = -1.0, double hi = 1.0) { return random_tensor(std::move(s), rng(), lo, hi); }

}  // namespace

// ---------------------------------------------------------------------------
// Tensor basics

TEST(Tensor, ShapeMismatchThrows)
{
  EXPECT_THROW(Tensor({2, 3}, {1.0, 2.0}), pcgan::DimensionError);
}

TEST(Tensor, RowsAndColsViewLastAxis)
{
  const auto t = Tensor::zeros({2, 3, 4});
  EXPECT_EQ(t.cols(), 4u);
  EXPECT_EQ(t.rows(), 6u);
  EXPECT_EQ(Tensor::scalar(3.0).rows(), 1u);
  EXPECT_DOUBLE_EQ(Tensor::scalar(3.0).item(), 3.0);
}

TEST(Tensor, IdentityIsDiagonal)
{
  const auto i = Tensor::identity(3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(i(r, c), r == c ? 1.0 : 0.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Forward values against direct loops

TEST(Ops, MatmulMatchesTripleLoop)
{
  Tape tape;
  const auto a = rnd({3, 4}), b = rnd({4, 5});
  const auto c = nx::matmul(tape.constant(a), tape.constant(b)).value();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        s += a(i, k) * b(k, j);
      }
      EXPECT_NEAR(c(i, j), s, 1e-14);
    }
  }
}

TEST(Ops, MatmulRejectsInnerMismatch)
{
  Tape tape;
  EXPECT_THROW(nx::matmul(tape.constant(rnd({2, 3})), tape.constant(rnd({2, 3}))), pcgan::DimensionError);
}

TEST(Ops, SoftmaxRowsSumToOne)
{
  Tape tape;
  const auto s = nx::softmax(tape.constant(rnd({5, 7}, -30.0, 30.0))).value();
  for (std::size_t r = 0; r < 5; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
      EXPECT_GE(s(r, c), 0.0);
      total += s(r, c);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ops, SoftmaxStableForLargeLogits)
{
  Tape tape;
  const auto s = nx::softmax(tape.constant(Tensor::matrix(1, 3, {1000.0, 1000.0, -1000.0}))).value();
  EXPECT_NEAR(s[0], 0.5, 1e-15);
  EXPECT_NEAR(s[1], 0.5, 1e-15);
  EXPECT_EQ(s[2], 0.0);
  const auto l = nx::logsumexp(tape.constant(Tensor::matrix(1, 2, {1000.0, 1000.0}))).value();
  EXPECT_NEAR(l[0], 1000.0 + std::log(2.0), 1e-12);
}

TEST(Ops, SegmentSoftmaxSumsToOnePerSegment)
{
  Tape tape;
  const std::vector<std::size_t> offsets{0, 3, 4, 8};
  const auto s = nx::segment_softmax(tape.constant(rnd({8, 1}, -5.0, 5.0)), offsets).value();
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    double total = 0.0;
    for (auto i = offsets[g]; i < offsets[g + 1]; ++i) {
      total += s[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ops, SigmoidSaturatesWithoutOverflow)
{
  Tape tape;
  const auto s = nx::sigmoid(tape.constant(Tensor::vector({-800.0, 0.0, 800.0}))).value();
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.5);
  EXPECT_EQ(s[2], 1.0);
}

TEST(Ops, BroadcastAddRowVector)
{
  Tape tape;
  const auto a = rnd({3, 2});
  const auto b = Tensor::vector({10.0, 20.0});
  const auto c = nx::add(tape.constant(a), tape.constant(b)).value();
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_DOUBLE_EQ(c(r, 0), a(r, 0) + 10.0);
    EXPECT_DOUBLE_EQ(c(r, 1), a(r, 1) + 20.0);
  }
}

// ---------------------------------------------------------------------------
// Error contracts

TEST(Ops, LogOfNonPositiveIsDomainError)
{
  Tape tape;
  EXPECT_THROW(nx::log(tape.constant(Tensor::vector({1.0, 0.0}))), pcgan::DomainError);
  EXPECT_THROW(nx::log(tape.constant(Tensor::vector({-1.0}))), pcgan::DomainError);
}

TEST(Ops, DivisionByZeroIsDomainError)
{
  Tape tape;
  EXPECT_THROW(
    nx::div(tape.constant(Tensor::vector({1.0})), tape.constant(Tensor::vector({0.0}))),
    pcgan::DomainError);
}

TEST(Ops, OverflowIsNumericError)
{
  Tape tape;
  EXPECT_THROW(nx::exp(tape.constant(Tensor::vector({1000.0}))), pcgan::NumericError);
}

TEST(Tape, BackwardNeedsScalar)
{
  Tape tape;
  const auto x = tape.parameter(rnd({2, 2}));
  EXPECT_THROW(tape.backward(nx::tanh(x)), pcgan::UsageError);
}

TEST(Tape, UnreachedNodeHasZeroGradient)
{
  Tape tape;
  const auto x = tape.parameter(rnd({2}));
  const auto y = tape.parameter(rnd({2}));
  tape.backward(nx::sum(x));
  const auto g = tape.grad(y);
  EXPECT_EQ(g.shape(), y.value().shape());
  for (double v : g.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Tape, GradientsAccumulateOverReuse)
{
  Tape tape;
  const auto x = tape.parameter(Tensor::vector({3.0}));
  tape.backward(nx::sum(nx::add(nx::mul(x, x), x)));
  EXPECT_DOUBLE_EQ(tape.grad(x)[0], 7.0);
}

// ---------------------------------------------------------------------------
// Gradients against central differences, one op at a time

struct OpCase
{
  const char * name;
  std::vector<nx::Shape> shapes;
  pcgan::test::ScalarFn fn;
  double lo{-1.0};
  double hi{1.0};
};

class OpGradient : public ::testing::TestWithParam<OpCase>
{
};

TEST_P(OpGradient, MatchesFiniteDifferences)
{
  const auto & c = GetParam();
  std::vector<Tensor> inputs;
  for (const auto & s : c.shapes) {
    inputs.push_back(rnd(s, c.lo, c.hi));
  }
  EXPECT_LT(max_gradient_error(c.fn, inputs), kTol) << c.name;
}

namespace
{

using V = std::vector<Var>;

std::vector<OpCase> op_cases()
{
  return {
    {"matmul", {{3, 4}, {4, 2}}, [](Tape & t, const V & v) { return probe(t, nx::matmul(v[0], v[1])); }},
    {"add", {{3, 2}, {3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::add(v[0], v[1])); }},
    {"add_row", {{3, 2}, {2}}, [](Tape & t, const V & v) { return probe(t, nx::add(v[0], v[1])); }},
    {"add_scalar_tensor", {{3, 2}, {}}, [](Tape & t, const V & v) { return probe(t, nx::add(v[0], v[1])); }},
    {"sub", {{2, 3}, {2, 3}}, [](Tape & t, const V & v) { return probe(t, nx::sub(v[0], v[1])); }},
    {"mul", {{2, 3}, {2, 3}}, [](Tape & t, const V & v) { return probe(t, nx::mul(v[0], v[1])); }},
    {"div", {{2, 3}, {2, 3}}, [](Tape & t, const V & v) { return probe(t, nx::div(v[0], v[1])); }, 0.5, 2.0},
    {"mul_rows", {{4, 3}, {4, 1}}, [](Tape & t, const V & v) { return probe(t, nx::mul_rows(v[0], v[1])); }},
    {"scale", {{2, 2}}, [](Tape & t, const V & v) { return probe(t, nx::scale(v[0], -2.5)); }},
    {"add_scalar", {{2, 2}}, [](Tape & t, const V & v) { return probe(t, nx::add_scalar(v[0], 1.5)); }},
    {"neg", {{2, 2}}, [](Tape & t, const V & v) { return probe(t, nx::neg(v[0])); }},
    {"tanh", {{3, 3}}, [](Tape & t, const V & v) { return probe(t, nx::tanh(v[0])); }, -2.0, 2.0},
    {"sigmoid", {{3, 3}}, [](Tape & t, const V & v) { return probe(t, nx::sigmoid(v[0])); }, -4.0, 4.0},
    {"relu", {{3, 3}}, [](Tape & t, const V & v) { return probe(t, nx::relu(v[0])); }, 0.1, 1.0},
    {"relu_negative", {{3, 3}}, [](Tape & t, const V & v) { return probe(t, nx::relu(v[0])); }, -1.0, -0.1},
    {"exp", {{3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::exp(v[0])); }},
    {"log", {{3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::log(v[0])); }, 0.5, 3.0},
    {"square", {{3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::square(v[0])); }},
    {"clamp_inside", {{3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::clamp(v[0], -2.0, 2.0)); }},
    {"clamp_outside", {{3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::clamp(v[0], -0.05, -0.01)); }, 0.1, 1.0},
    {"concat", {{2, 3}, {2, 1}, {2, 2}}, [](Tape & t, const V & v) { return probe(t, nx::concat(v)); }},
    {"slice", {{3, 5}}, [](Tape & t, const V & v) { return probe(t, nx::slice(v[0], 1, 4)); }},
    {"stack_rows", {{2, 3}, {1, 3}}, [](Tape & t, const V & v) { return probe(t, nx::stack_rows(v)); }},
    {"gather_rows", {{3, 2}}, [](Tape & t, const V & v) { return probe(t, nx::gather_rows(v[0], {2, 0, 2, 1})); }},
    {"reshape", {{2, 3}}, [](Tape & t, const V & v) { return probe(t, nx::reshape(v[0], {3, 2})); }},
    {"softmax", {{3, 4}}, [](Tape & t, const V & v) { return probe(t, nx::softmax(v[0])); }, -3.0, 3.0},
    {"log_softmax", {{3, 4}}, [](Tape & t, const V & v) { return probe(t, nx::log_softmax(v[0])); }, -3.0, 3.0},
    {"logsumexp", {{3, 4}}, [](Tape & t, const V & v) { return probe(t, nx::logsumexp(v[0])); }, -3.0, 3.0},
    {"sum", {{3, 4}}, [](Tape & t, const V & v) { return probe(t, nx::sum(v[0])); }},
    {"mean", {{3, 4}}, [](Tape & t, const V & v) { return probe(t, nx::mean(v[0])); }},
    {"segment_softmax", {{6, 1}},
     [](Tape & t, const V & v) { return probe(t, nx::segment_softmax(v[0], {0, 2, 3, 6})); }, -3.0, 3.0},
    {"segment_sum_rows", {{6, 2}},
     [](Tape & t, const V & v) { return probe(t, nx::segment_sum_rows(v[0], {0, 2, 3, 6})); }},
    {"composite", {{2, 3}, {3, 3}},
     [](Tape & t, const V & v) {
       const auto h = nx::tanh(nx::matmul(v[0], v[1]));
       return probe(t, nx::log_softmax(nx::mul(h, nx::sigmoid(h))));
     }},
  };
}

std::string case_name(const ::testing::TestParamInfo<OpCase> & info) { return info.param.name; }

}  // namespace

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::ValuesIn(op_cases()), case_name);

// ---------------------------------------------------------------------------
// Parameters and optimizer

TEST(Params, InitIsDeterministicAndBounded)
{
  nx::Rng a(5), b(5);
  const auto wa = nx::init_weight(16, 8, a);
  const auto wb = nx::init_weight(16, 8, b);
  EXPECT_EQ(wa, wb);
  for (double v : wa.values()) {
    EXPECT_LE(std::abs(v), 0.25);
  }
  const auto bias = nx::init_bias(4);
  for (double v : bias.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradientSign)
{
  nx::ParamSet p{{"w", Tensor::vector({1.0, -2.0, 0.5})}};
  const nx::ParamSet g{{"w", Tensor::vector({0.3, -4.0, 1e-3})}};
  nx::AdamState st;
  nx::adam_step(p, g, st);
  EXPECT_NEAR(p.at("w")[0], 1.0 - 1e-3, 1e-9);
  EXPECT_NEAR(p.at("w")[1], -2.0 + 1e-3, 1e-9);
  EXPECT_NEAR(p.at("w")[2], 0.5 - 1e-3, 1e-8);
}

TEST(Adam, ScriptedTraceMatchesScalarRecurrence)
{
  const std::vector<double> grads{0.5, -1.0, 2.0, 0.25};
  nx::ParamSet p{{"x", Tensor::vector({0.7})}};
  nx::AdamState st;
  st.config.learning_rate = 0.01;
  double x = 0.7, m = 0.0, v = 0.0;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const double g = grads[t - 1];
    nx::adam_step(p, {{"x", Tensor::vector({g})}}, st);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    const double vh = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p.at("x")[0], x, 1e-15);
  }
  EXPECT_EQ(st.step, 4);
}

TEST(Adam, MissingGradientIsError)
{
  nx::ParamSet p{{"a", Tensor::vector({1.0})}, {"b", Tensor::vector({1.0})}};
  nx::AdamState st;
  EXPECT_THROW(nx::adam_step(p, {{"a", Tensor::vector({1.0})}}, st), pcgan::DimensionError);
}

TEST(Clip, GlobalNormScalesOnlyAboveThreshold)
{
  nx::ParamSet g{{"a", Tensor::vector({3.0})}, {"b", Tensor::vector({4.0, 0.0})}};
  EXPECT_DOUBLE_EQ(nx::global_norm(g), 5.0);
  auto small = g;
  EXPECT_DOUBLE_EQ(nx::clip_global_norm(small, 10.0), 5.0);
  EXPECT_EQ(small, g);
  EXPECT_DOUBLE_EQ(nx::clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(nx::global_norm(g), 1.0, 1e-15);
  EXPECT_NEAR(g.at("a")[0], 0.6, 1e-15);
}

TEST(Serialization, ParamsRoundTripBitExact)
{
  nx::ParamSet p{{"layer.weight", rnd({3, 4})}, {"layer.bias", Tensor::vector({0.1, 1e-300, -7.0, 1.0 / 3.0})}};
  const auto back = nx::params_from_json(nlohmann::json::parse(nx::params_to_json(p).dump()));
  EXPECT_EQ(back, p);
}

TEST(Serialization, AdamStateRoundTrip)
{
  nx::ParamSet p{{"w", rnd({2, 2})}};
  nx::AdamState st;
  nx::adam_step(p, {{"w", rnd({2, 2})}}, st);
  const auto back = nx::adam_from_json(nlohmann::json::parse(nx::adam_to_json(st).dump()));
  EXPECT_EQ(back.step, st.step);
  EXPECT_EQ(back.first_moment, st.first_moment);
  EXPECT_EQ(back.second_moment, st.second_moment);
  EXPECT_EQ(back.config.learning_rate, st.config.learning_rate);
}
