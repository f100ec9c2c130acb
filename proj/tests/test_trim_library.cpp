#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <trim_mpc/ocp.hpp>
#include <trim_mpc/trim_library.hpp>

using namespace trim_mpc;

TEST(Library, DefaultTrims)
{
  const auto lib = default_library();
  ASSERT_EQ(lib.size(), 5u);
  EXPECT_EQ(lib.at(1).u, (ControlValue{0, 0}));
  EXPECT_EQ(lib.at(2).u, (ControlValue{1.5, 0}));
  EXPECT_EQ(lib.at(3).u, (ControlValue{-0.25, -1}));
  EXPECT_EQ(lib.at(4).u, (ControlValue{-0.25, 1}));
  EXPECT_EQ(lib.at(5).u, (ControlValue{0, 1}));
  EXPECT_EQ(lib.rest_id(), 1);
}

TEST(Library, RejectsDuplicates)
{
  EXPECT_THROW(TrimLibrary({{1, {0, 0}, ""}, {1, {1, 0}, ""}}), std::invalid_argument);
  try {
    TrimLibrary({{1, {0, 0}, ""}, {2, {1, 0}, ""}, {7, {1, 0}, ""}});
    FAIL();
  } catch (const std::invalid_argument & e) {
    EXPECT_NE(std::string(e.what()).find("2 and 7"), std::string::npos);
  }
  EXPECT_THROW(TrimLibrary(std::vector<TrimPrimitive>{}), std::invalid_argument);
}

TEST(Plan, RestKeepsState)
{
  const auto lib = default_library();
  const State x0{0.3, 0.2, 0.1};
  EXPECT_EQ(plan_endpoint(lib, {{{1, 3.0}}}, x0), x0);
}

TEST(Plan, StraightMove)
{
  const auto lib = default_library();
  EXPECT_LT(raw_distance(plan_endpoint(lib, {{{2, 4.0 / 3.0}}}, {-2, 0, 0}), {0, 0, 0}), 1e-14);
}

TEST(Plan, TurnMoveTurnReachesTarget)
{
  const auto lib  = default_library();
  const auto plan = feasible_plan({0, 1, 0}, {0, 0, 0}, lib);
  ASSERT_TRUE(plan);
  EXPECT_LT(state_distance(plan_endpoint(lib, *plan, {0, 1, 0}), {0, 0, 0}), 1e-9);
}

TEST(Plan, CanonicalMergesAndDropsZeros)
{
  const TrimPlan p{{{2, 1.0}, {2, 0.5}, {5, 0.0}, {3, 1.0}}};
  const auto c = canonical(p);
  ASSERT_EQ(c.segments.size(), 2u);
  EXPECT_DOUBLE_EQ(c.segments[0].duration, 1.5);
  EXPECT_EQ(c.segments[1].id, 3);
}

TEST(Plan, PrefixAndSuffixSplit)
{
  const TrimPlan p{{{2, 1.0}, {5, 2.0}}};
  const auto a = take_prefix(p, 1.5), b = drop_prefix(p, 1.5);
  EXPECT_DOUBLE_EQ(a.total_duration(), 1.5);
  EXPECT_DOUBLE_EQ(b.total_duration(), 1.5);
  EXPECT_EQ(b.segments.front().id, 5);
  const auto lib = default_library();
  const State mid = plan_endpoint(lib, a, {0, 0, 0});
  EXPECT_LT(raw_distance(plan_endpoint(lib, b, mid), plan_endpoint(lib, p, {0, 0, 0})), 1e-14);
}

TEST(Plan, FlowSamplesIncludeSwitches)
{
  const auto lib = default_library();
  const auto tr  = plan_flow(lib, {{{2, 1.0}, {5, 1.0}}}, {0, 0, 0}, 0.25);
  EXPECT_DOUBLE_EQ(tr.samples.back().t, 2.0);
  bool has_switch = false;
  for (const auto & s : tr.samples) { has_switch |= std::abs(s.t - 1.0) < 1e-15; }
  EXPECT_TRUE(has_switch);
}

TEST(Plan, CostUsesConstantRate)
{
  const auto lib = default_library();
  StageCost c;
  EXPECT_DOUBLE_EQ(plan_cost(lib, {{{2, 2.0}}}, c), 4.5);
  EXPECT_DOUBLE_EQ(plan_cost(lib, {{{1, 9.0}}}, c), 0.0);
  c.c2 = 0.5;
  EXPECT_NEAR(unit_cost(lib.at(4), {}, c), 1.0625 + 0.5 * std::sqrt(1.0625), 1e-15);
}
