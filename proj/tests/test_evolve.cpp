#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "qsplit/error.hpp"
#include "qsplit/evolve.hpp"
#include "qsplit/oracle.hpp"
#include "support/problems.hpp"

using namespace qsplit;

namespace {

EvolutionPlan make_plan(EquationKind kind, std::vector<std::string> coeffs, std::vector<int> qubits,
                        int steps = 10, double T = 1.0, int p = 1,
                        ProductFormula formula = ProductFormula::standard) {
  EvolutionPlan plan;
  plan.kind = kind;
  plan.formula = formula;
  plan.order = p;
  plan.grid = GridSpec(qubits);
  plan.coeffs = CoefficientSet::parse(kind, coeffs, plan.grid.dim());
  plan.horizon = T;
  plan.steps = steps;
  return plan;
}

Field smooth(const GridSpec& grid) {
  const char* text = grid.dim() == 1 ? "exp(sin(2*pi*x1))" : "exp(sin(2*pi*x1)+cos(2*pi*x2))";
  return normalize(sample_function(grid, parse_expression(text, grid.dim())));
}

Field random_field(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> a(grid.size());
  for (auto& v : a) v = {g(rng), g(rng)};
  return Field(grid, std::move(a));
}

bool bitwise_equal(const Field& a, const Field& b) {
  return a.size() == b.size() &&
         std::memcmp(a.amplitudes().data(), b.amplitudes().data(), a.size() * sizeof(Complex)) == 0;
}

}  // namespace

TEST(Substep, ZeroWeightsAreIdentity) {
  const GridSpec grid({4, 3});
  const Field f = random_field(grid, 1);
  const std::vector<double> w(grid.size(), 0.0);
  for (auto mode : {SubstepMode::phase, SubstepMode::damping}) {
    EXPECT_LT(distance(axis_phase_substep(f, 1, w, mode), f, false), 1e-14);
  }
}

TEST(Substep, SingleModeGetsScalarPhase) {
  const GridSpec grid({4});
  const Field f = sample_function(grid, parse_expression("cos(2*pi*3*x1)", 1));
  // weight per Fourier index k: 0.1 * k; cos has modes 3 and 13
  std::vector<double> w(grid.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = k == 3 || k == 13 ? 0.7 : 5.0;
  const Field g = axis_phase_substep(f, 0, w, SubstepMode::phase);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(std::abs(g[i] - f[i] * std::polar(1.0, -0.7)), 1e-14);
}

TEST(Substep, DampingLeavesZeroSliceUnchanged) {
  const GridSpec grid({3, 3});
  const Field f = random_field(grid, 2);
  std::vector<double> w(grid.size(), 4.0);
  for (std::size_t line = 0; line < grid.lines(0); ++line) w[grid.line_start(0, line)] = 0.0;
  const Field g = axis_phase_substep(f, 0, w, SubstepMode::damping);
  const Field fh = axis_fourier(f, 0, FourierDirection::forward);
  const Field gh = axis_fourier(g, 0, FourierDirection::forward);
  for (std::size_t line = 0; line < grid.lines(0); ++line) {
    const std::size_t s = grid.line_start(0, line);
    EXPECT_LT(std::abs(gh[s] - fh[s]), 1e-14);
  }
}

TEST(Substep, RejectsBadInput) {
  const GridSpec grid({3});
  const Field f = random_field(grid, 3);
  std::vector<double> w(grid.size(), 0.0);
  EXPECT_THROW((void)axis_phase_substep(f, 1, w, SubstepMode::phase), Error);
  w[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW((void)axis_phase_substep(f, 0, w, SubstepMode::phase), Error);
  EXPECT_THROW((void)axis_phase_substep(f, 0, std::vector<double>(3), SubstepMode::phase), Error);
}

TEST(ConvectionStep, ConstantVelocityIsExactPhase) {
  const auto plan = make_plan(EquationKind::convection, {"1"}, {5}, 1, 0.1);
  const Field f = random_field(plan.grid, 4);
  const Field g = convection_step(f, 0.0, 0.1, plan);
  const auto symbol = derivative_symbol(stencil_coefficients(1), 5);
  const Field fh = axis_fourier(f, 0, FourierDirection::forward);
  const Field gh = axis_fourier(g, 0, FourierDirection::forward);
  for (std::size_t k = 0; k < f.size(); ++k) {
    EXPECT_LT(std::abs(gh[k] - fh[k] * std::polar(1.0, -0.1 * symbol[k])), 1e-13);
  }
}

TEST(ConvectionStep, MatchesDenseExponentialProduct) {
  const auto plan = make_plan(EquationKind::convection, {"1+0.5*sin(2*pi*x2)", "1+0.5*cos(2*pi*x1)+t"},
                              {3, 3}, 1, 1.0, 2);
  const double t = 0.3;
  const double h = 1e-2;
  const Field f = random_field(plan.grid, 5);
  const Field split = convection_step(f, t, h, plan);

  // exp(-i h c2(t+h) D2) exp(-i h c1(t+h) D1) f
  const auto d1 = dense_derivative(plan.grid, 0, 2);
  const auto d2 = dense_derivative(plan.grid, 1, 2);
  DenseOperator h1{dense_multiplier(plan.grid, plan.coeffs[0], t + h).matrix * d1.matrix, plan.grid, "H1"};
  DenseOperator h2{dense_multiplier(plan.grid, plan.coeffs[1], t + h).matrix * d2.matrix, plan.grid, "H2"};
  const auto e1 = matrix_exponential(h1, {0.0, -h});
  const auto e2 = matrix_exponential(h2, {0.0, -h});
  const Field dense = e2.apply(e1.apply(f));
  EXPECT_LT(distance(split, dense, false), 1e-10 * scaled_norm(f));
}

TEST(DiffusionStep, MatchesDenseExponentialProduct) {
  const auto plan = make_plan(EquationKind::diffusion, {"0.1*(1+0.5*sin(2*pi*x2))", "0.2+0.1*cos(2*pi*x1)"},
                              {3, 3}, 1, 1.0, 1);
  const double h = 1e-2;
  const Field f = random_field(plan.grid, 6);
  const Field split = diffusion_step(f, 0.0, h, plan);
  const auto d1 = dense_derivative(plan.grid, 0, 1);
  const auto d2 = dense_derivative(plan.grid, 1, 1);
  DenseOperator a1{dense_multiplier(plan.grid, plan.coeffs[0], h).matrix * d1.matrix * d1.matrix, plan.grid, "A1"};
  DenseOperator a2{dense_multiplier(plan.grid, plan.coeffs[1], h).matrix * d2.matrix * d2.matrix, plan.grid, "A2"};
  const Field dense = matrix_exponential(a2, -h).apply(matrix_exponential(a1, -h).apply(f));
  EXPECT_LT(distance(split, dense, false), 1e-10 * scaled_norm(f));
}

TEST(DiffusionStep, SingleModeDecay) {
  const auto plan = make_plan(EquationKind::diffusion, {"1"}, {5}, 1, 0.01);
  const Field f = sample_function(plan.grid, parse_expression("1+cos(2*pi*x1)", 1));
  const Field g = diffusion_step(f, 0.0, 0.01, plan);
  const double d1 = derivative_symbol(stencil_coefficients(1), 5)[1];
  std::array<double, 1> x{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    plan.grid.coordinates(i, x);
    EXPECT_NEAR(g[i].real(), 1.0 + std::exp(-0.01 * d1 * d1) * std::cos(2 * std::numbers::pi * x[0]), 1e-13);
  }
}

TEST(DiffusionStep, RejectsNegativeCoefficient) {
  auto plan = make_plan(EquationKind::diffusion, {"0-1"}, {3}, 1, 0.1);
  const Field f = random_field(plan.grid, 7);
  try {
    (void)diffusion_step(f, 0.0, 0.1, plan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_coefficient);
  }
  EXPECT_THROW(plan.validate(), Error);
}

TEST(Step, KindAndGridMismatch) {
  const auto plan = make_plan(EquationKind::convection, {"1"}, {3});
  EXPECT_THROW((void)diffusion_step(random_field(plan.grid, 1), 0, 0.1, plan), Error);
  EXPECT_THROW((void)convection_step(random_field(GridSpec({4}), 1), 0, 0.1, plan), Error);
}

TEST(Evolve, ConstantConvectionEqualsSinglePhase) {
  const auto plan = make_plan(EquationKind::convection, {"1", "0.5"}, {4, 4}, 17, 0.8, 2);
  const Field f = smooth(plan.grid);
  const Field g = evolve(plan, f).final_state;
  const Field exact = analytic_constant_convection(f, std::vector<double>{1.0, 0.5}, 2, 0.8);
  EXPECT_LT(distance(g, exact, false), 1e-12);
  EXPECT_EQ(g.time(), 0.8);
}

TEST(Evolve, DiffusionSingleModeAnalytic) {
  const double T = 0.05;
  const auto plan = make_plan(EquationKind::diffusion, {"1"}, {5}, 7, T);
  const Field f = sample_function(plan.grid, parse_expression("1+cos(2*pi*x1)", 1));
  const Field g = evolve(plan, f).final_state;
  const double d1 = derivative_symbol(stencil_coefficients(1), 5)[1];
  std::array<double, 1> x{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    plan.grid.coordinates(i, x);
    EXPECT_NEAR(g[i].real(), 1.0 + std::exp(-T * d1 * d1) * std::cos(2 * std::numbers::pi * x[0]), 1e-12);
  }
}

TEST(Evolve, TrajectoryAndReport) {
  auto plan = make_plan(EquationKind::convection, {"1+0.5*sin(2*pi*x2)", "1"}, {3, 3}, 5);
  plan.record_trajectory = true;
  const auto result = evolve(plan, smooth(plan.grid));
  ASSERT_EQ(result.trajectory.size(), 6u);
  EXPECT_EQ(result.trajectory.front().time(), 0.0);
  EXPECT_EQ(result.trajectory.back().time(), 1.0);
  EXPECT_EQ(result.report.norms.size(), 5u);
  EXPECT_EQ(result.report.substeps, 10u);
  EXPECT_TRUE(bitwise_equal(result.trajectory.back(), result.final_state));
}

TEST(Properties, ConvectionIsUnitary) {
  const auto plan = make_plan(EquationKind::convection, {"1+0.5*sin(2*pi*x2)", "1+0.5*cos(2*pi*x1)"},
                              {5, 5}, 1000, 1.0, 2);
  const Field f = random_field(plan.grid, 8);
  const double n0 = scaled_norm(f);
  const auto result = evolve(plan, f);
  double prev = n0;
  for (double n : result.report.norms) {
    EXPECT_LT(std::fabs(n - prev), 1e-14 * n0);
    prev = n;
  }
  EXPECT_LT(std::fabs(result.report.norms.back() - n0), 1e-12 * n0);
}

TEST(Properties, DiffusionContractsAndKeepsMean) {
  const auto plan = make_plan(EquationKind::diffusion, {"0.1*(1+0.5*sin(2*pi*x2))", "0.1*(1+0.5*cos(2*pi*x1))"},
                              {5, 5}, 1000);
  const Field f = random_field(plan.grid, 9);
  const Complex m0 = measure(f, Observable::mean());
  const auto result = evolve(plan, f);
  double prev = scaled_norm(f);
  for (double n : result.report.norms) {
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_LT(std::abs(measure(result.final_state, Observable::mean()) - m0), 1e-12);
}

TEST(Properties, RealDataStaysReal) {
  const auto plan = make_plan(EquationKind::convection, {"1+0.5*sin(2*pi*x2)", "1+0.5*cos(2*pi*x1)"},
                              {4, 4}, 100, 1.0, 3);
  const Field g = evolve(plan, smooth(plan.grid)).final_state;
  double worst = 0.0;
  for (const auto& a : g.amplitudes()) worst = std::max(worst, std::fabs(a.imag()));
  EXPECT_LT(worst, 1e-11);
}

TEST(Properties, StandardEqualsGeneralizedWithoutTime) {
  for (auto kind : {EquationKind::convection, EquationKind::diffusion}) {
    std::vector<std::string> c = {"0.1*(1+0.5*sin(2*pi*x2))", "0.1*(1+0.5*cos(2*pi*x1))"};
    auto s = make_plan(kind, c, {4, 4}, 37, 0.7, 2, ProductFormula::standard);
    auto g = make_plan(kind, c, {4, 4}, 37, 0.7, 2, ProductFormula::generalized);
    s.record_trajectory = g.record_trajectory = true;
    const Field f = smooth(s.grid);
    const auto rs = evolve(s, f);
    const auto rg = evolve(g, f);
    for (std::size_t l = 0; l < rs.trajectory.size(); ++l) {
      EXPECT_TRUE(bitwise_equal(rs.trajectory[l], rg.trajectory[l])) << l;
    }
  }
}

TEST(Properties, StandardAndGeneralizedDifferWithTime) {
  auto s = make_plan(EquationKind::convection, {"1+t*sin(2*pi*x2)", "1"}, {4, 4}, 8, 1.0, 1);
  auto g = s;
  g.formula = ProductFormula::generalized;
  const Field f = smooth(s.grid);
  EXPECT_GT(distance(evolve(s, f).final_state, evolve(g, f).final_state, false), 1e-6);
}

TEST(Properties, CommutingFactorsAnyOrder) {
  // constant coefficients: the two axis factors commute, so x1-first equals x2-first
  const auto plan = make_plan(EquationKind::convection, {"0.7", "1.3"}, {4, 5}, 1, 0.3, 2);
  const Field f = random_field(plan.grid, 10);
  const Field forward = convection_step(f, 0.0, 0.3, plan);
  const auto s1 = derivative_symbol(stencil_coefficients(2), 4);
  const auto s2 = derivative_symbol(stencil_coefficients(2), 5);
  Field reversed = f;
  axis_phase_substep_inplace(reversed, 1, step_weights(plan, s2, 1, 0.0, 0.3), SubstepMode::phase);
  axis_phase_substep_inplace(reversed, 0, step_weights(plan, s1, 0, 0.0, 0.3), SubstepMode::phase);
  EXPECT_LT(distance(forward, reversed, false), 1e-13 * scaled_norm(f));
}

TEST(Properties, FirstOrderInStepSize) {
  const auto problem = fixtures::sheared_convection();
  const GridSpec grid({4, 4});
  const Field f = problem.initial_state(grid);
  const auto ref = reference_evolution(grid, problem.coeffs, 1, 1.0, f, {32});
  auto plan = problem.plan({4, 4}, 32);
  const double e32 = distance(evolve(plan, f).final_state, ref.final_state, false);
  plan.steps = 64;
  const double e64 = distance(evolve(plan, f).final_state, ref.final_state, false);
  EXPECT_NEAR(e32 / e64, 2.0, 0.15);
}

TEST(Plan, ValidateRejectsBadPlans) {
  auto plan = make_plan(EquationKind::convection, {"x1", "1"}, {3, 3});
  try {
    plan.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_coefficient);
    EXPECT_NE(std::string(e.what()).find("axis 1"), std::string::npos);
  }
  auto coarse = make_plan(EquationKind::convection, {"1"}, {2}, 1, 1.0, 2);
  EXPECT_THROW(coarse.validate(), Error);
  auto zero = make_plan(EquationKind::convection, {"1"}, {3});
  zero.steps = 0;
  EXPECT_THROW(zero.validate(), Error);
}
