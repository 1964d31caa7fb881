#include <cstring>

#include <gtest/gtest.h>

#include "ztopo/sweep.hpp"

using namespace ztopo;

namespace {

SweepSpec small_spec(const char* axis1, const char* axis2, double a = 0.35) {
  SweepSpec s;
  s.axis1 = SweepAxis::parse(axis1);
  s.axis2 = SweepAxis::parse(axis2);
  s.fixed.lattice_const = a;
  s.fixed.n_atoms = 30;
  return s;
}

bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(SweepAxis, ParseAndFormat) {
  const SweepAxis ax = SweepAxis::parse("phi:-1.5708:1.5708:201");
  EXPECT_EQ(ax.parameter, SweepParameter::phi);
  EXPECT_EQ(ax.count, 201);
  EXPECT_DOUBLE_EQ(ax.value(0), -1.5708);
  EXPECT_DOUBLE_EQ(ax.value(200), 1.5708);
  EXPECT_EQ(SweepAxis::parse(ax.str()).str(), ax.str());
  EXPECT_EQ(SweepAxis::parse("shift_diag:0:0.5:3").parameter, SweepParameter::shift_diag);
}

TEST(SweepAxis, ParseErrors) {
  EXPECT_THROW(SweepAxis::parse("phi:0:1"), ValidationError);
  EXPECT_THROW(SweepAxis::parse("theta:0:1:3"), ValidationError);
  EXPECT_THROW(SweepAxis::parse("phi:0:1x:3"), ValidationError);
  EXPECT_THROW(SweepAxis::parse("phi:0:1:3.5"), ValidationError);
}

TEST(SweepSpec, Validation) {
  EXPECT_THROW(small_spec("phi:0:1:1", "shift_y:0:1:3").validate(), ValidationError);
  EXPECT_THROW(small_spec("phi:0:1:3", "phi:0:1:3").validate(), ValidationError);
  EXPECT_THROW(small_spec("shift_diag:0:1:3", "shift_x:0:1:3").validate(), ValidationError);
  SweepSpec s = small_spec("phi:0:1:3", "shift_y:0:1:3");
  s.fixed.lattice_const = -1.0;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(RunSweep, KnownPhasePoints) {
  // duplicate axis2 values collapse onto the same geometry
  const PhaseDiagramGrid g = run_sweep(small_spec("phi:-0.785398163397:0.785398163397:2",
                                                  "shift_y:0:0:2", 0.3), 1);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.nu[g.index(0, 0)], 1);
  EXPECT_EQ(g.nu[g.index(0, 1)], 1);
  EXPECT_EQ(g.nu[g.index(1, 0)], 0);
  EXPECT_EQ(g.nu[g.index(1, 1)], 0);
  EXPECT_TRUE(g.errors.empty());
  for (double loc : g.loc) {
    EXPECT_GE(loc, 1.0 / 30);
    EXPECT_LE(loc, 1.0);
  }
}

TEST(RunSweep, DeterministicAcrossWorkerCounts) {
  const SweepSpec spec = small_spec("phi:-1.4:1.4:9", "shift_y:-0.4:0.4:7");
  const PhaseDiagramGrid ref = run_sweep(spec, 1);
  for (int jobs : {2, 3, 8}) {
    const PhaseDiagramGrid g = run_sweep(spec, jobs);
    EXPECT_EQ(g.nu, ref.nu) << jobs;
    EXPECT_TRUE(bit_identical(g.loc, ref.loc)) << jobs;
    EXPECT_TRUE(bit_identical(g.winding_raw, ref.winding_raw)) << jobs;
    EXPECT_EQ(g.well_defined, ref.well_defined) << jobs;
  }
}

TEST(RunSweep, ProgressCounter) {
  std::atomic<std::size_t> progress{0};
  run_sweep(small_spec("phi:-1:1:3", "shift_x:-0.2:0.2:4"), 2, &progress);
  EXPECT_EQ(progress.load(), 12u);
}

TEST(RunSweep, IllDefinedAndFailedCells) {
  SweepSpec spec = small_spec("shift_x:-0.5:0.5:3", "shift_y:-0.5:0:2", 0.3);
  spec.fixed.phi = 0.3;
  const PhaseDiagramGrid g = run_sweep(spec, 2);
  // (shift_x, shift_y) = (+-0.5, -0.5) puts B on an A site
  EXPECT_EQ(g.nu[g.index(0, 0)], nu_failed);
  EXPECT_EQ(g.nu[g.index(2, 0)], nu_failed);
  EXPECT_TRUE(std::isnan(g.loc[g.index(0, 0)]));
  ASSERT_EQ(g.errors.size(), 2u);
  EXPECT_EQ(g.errors[0].i1, 0);
  EXPECT_EQ(g.errors[1].i1, 2);
  EXPECT_NE(g.nu[g.index(1, 0)], nu_failed);

  const PhaseDiagramGrid gap = run_sweep(small_spec("phi:0:0.5:2", "shift_y:0:0:2", 0.3), 1);
  EXPECT_EQ(gap.nu[gap.index(0, 0)], nu_ill_defined);
  EXPECT_FALSE(gap.well_defined[gap.index(0, 0)]);
}

TEST(RunSweep, PolarizationWindowShift) {
  const PhaseDiagramGrid a = run_sweep(small_spec("phi:-1.2:1.4:6", "shift_y:-0.3:0.3:3"), 1);
  const PhaseDiagramGrid b = run_sweep(
      small_spec("phi:1.94159265358979:4.54159265358979:6", "shift_y:-0.3:0.3:3"), 1);
  EXPECT_EQ(a.nu, b.nu);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.loc[i], b.loc[i], 1e-10);
}

TEST(OrderSummary, TrivialGrid) {
  const PhaseDiagramGrid g =
      run_sweep(small_spec("phi:0.3:1.2:5", "shift_y:0:0:2", 0.3), 1);
  const PhaseSummary s = order_parameter_summary(g);
  ASSERT_EQ(s.components.size(), 1u);
  EXPECT_EQ(s.components.at(0), 1);
  EXPECT_DOUBLE_EQ(s.area_fraction.at(0), 1.0);
  EXPECT_EQ(s.violation_fraction, 0.0);
  EXPECT_DOUBLE_EQ(s.loc_threshold, 4.0 / 30);
}

TEST(OrderSummary, TwoRegionsAcrossTransition) {
  const PhaseDiagramGrid g =
      run_sweep(small_spec("phi:-1.3:1.3:14", "shift_y:0:0:2", 0.3), 1);
  const PhaseSummary s = order_parameter_summary(g);
  EXPECT_EQ(s.components.at(0), 1);
  EXPECT_EQ(s.components.at(1), 1);
  EXPECT_EQ(s.ill_defined_cells, 0);
}

TEST(OrderSummary, HandBuiltGrid) {
  PhaseDiagramGrid g;
  g.spec = small_spec("phi:0:1:3", "shift_y:0:1:3");
  g.nu = {1, 0, 1, 1, 0, nu_ill_defined, 0, 0, nu_failed};
  g.loc = {0.5, 0.05, 0.01, 0.3, 0.05, 0.05, 0.05, 0.05, std::nan("")};
  const PhaseSummary s = order_parameter_summary(g, 0.1);
  EXPECT_EQ(s.components.at(1), 2);  // {0, 3} and {2}
  EXPECT_EQ(s.components.at(0), 1);
  EXPECT_EQ(s.ill_defined_cells, 1);
  EXPECT_EQ(s.failed_cells, 1);
  EXPECT_NEAR(s.violation_fraction, 1.0 / 3, 1e-15);
  EXPECT_NEAR(s.confirmed_fraction, 2.0 / 3, 1e-15);
}
