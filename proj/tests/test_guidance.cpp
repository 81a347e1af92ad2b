// Guidance stack: reference trajectory, sensing, PID, fuel accounting,
// aiming tables, scenario sampling, capture metrics, and the reward.

#include <gtest/gtest.h>

#include <cmath>

#include "tethernet/aiming.hpp"
#include "tethernet/capture.hpp"
#include "tethernet/control.hpp"

using namespace tethernet;

// ---------------------------------------------------------------------------
// Reference trajectory
// ---------------------------------------------------------------------------

TEST(DesiredPosition, LinearRampWithExactEndpoints) {
  const Vec3 r0{1.0, 2.0, 3.0}, rf{-5.0, 4.0, -17.0};
  const double tf = 25.0;
  const Vec3 start = desired_position(0.0, r0, rf, tf);
  EXPECT_EQ(start.x, r0.x);
  EXPECT_EQ(start.y, r0.y);
  const Vec3 end = desired_position(tf, r0, rf, tf);
  EXPECT_EQ(end.z, rf.z);
  const Vec3 after = desired_position(tf + 3.0, r0, rf, tf);
  EXPECT_EQ(after.x, rf.x);
  const Vec3 before = desired_position(-1.0, r0, rf, tf);
  EXPECT_EQ(before.y, r0.y);

  const Vec3 mid = desired_position(tf / 2.0, r0, rf, tf);
  EXPECT_NEAR(mid.x, 0.5 * (r0.x + rf.x), 1e-12);
  EXPECT_NEAR(mid.y, 0.5 * (r0.y + rf.y), 1e-12);
  EXPECT_NEAR(mid.z, 0.5 * (r0.z + rf.z), 1e-12);

  EXPECT_THROW(desired_position(1.0, r0, rf, 0.0), ConfigError);
}

// ---------------------------------------------------------------------------
// Sensing
// ---------------------------------------------------------------------------

TEST(Sense, NoiseStatisticsMatchThreeSigmaBounds) {
  ControllerConfig cc;  // 0.1 m / 0.1 m/s three-sigma bounds
  Rng rng(2025, 0);
  const Measurement truth{{1.0, -2.0, 3.0}, {0.1, 0.2, -0.3}};
  const int n = 100000;
  double sum = 0.0, sq = 0.0, vsum = 0.0, vsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Measurement m = sense(truth, cc, rng);
    const double e = m.pos.x - truth.pos.x;
    sum += e;
    sq += e * e;
    const double ev = m.vel.z - truth.vel.z;
    vsum += ev;
    vsq += ev * ev;
  }
  const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.001);
  EXPECT_NEAR(sd, 0.1 / 3.0, 0.05 * (0.1 / 3.0));  // sigma = bound/3, within 5%
  const double vmean = vsum / n, vsd = std::sqrt(vsq / n - vmean * vmean);
  EXPECT_NEAR(vsd, 0.1 / 3.0, 0.05 * (0.1 / 3.0));
}

TEST(Sense, ZeroNoiseIsPassThrough) {
  ControllerConfig cc;
  cc.pos_noise_3sigma = 0.0;
  cc.vel_noise_3sigma = 0.0;
  Rng rng(1, 1);
  const Measurement truth{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const Measurement m = sense(truth, cc, rng);
  EXPECT_EQ(m.pos.x, 1.0);
  EXPECT_EQ(m.vel.y, 5.0);
}

// ---------------------------------------------------------------------------
// PID and fuel
// ---------------------------------------------------------------------------

TEST(PidThrust, ProportionalHandCaseWithSaturation) {
  ControllerConfig cc;  // kp=10, thrust limit 5.1 N per axis
  MuControllerState st;
  const Measurement meas{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  // Error of 1 m on x commands kp*1 = 10 N, saturating at 5.1; 0.2 m on y
  // commands 2 N unsaturated.
  const Vec3 u = pid_thrust(st, meas, {1.0, 0.2, 0.0}, 0.05, cc);
  EXPECT_DOUBLE_EQ(u.x, 5.1);
  EXPECT_DOUBLE_EQ(u.y, 2.0);
  EXPECT_DOUBLE_EQ(u.z, 0.0);
  // Integral accumulates after the command is formed.
  EXPECT_DOUBLE_EQ(st.integral.x, 1.0 * 0.05);
  EXPECT_DOUBLE_EQ(st.integral.y, 0.2 * 0.05);
  EXPECT_EQ(st.last_command.x, 5.1);
}

TEST(PidThrust, IntegralActsOnSubsequentTicks) {
  ControllerConfig cc;
  MuControllerState st;
  const Measurement meas{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  const Vec3 desired{0.1, 0.0, 0.0};
  const Vec3 u1 = pid_thrust(st, meas, desired, 0.05, cc);
  EXPECT_DOUBLE_EQ(u1.x, 1.0);  // kp * 0.1
  const Vec3 u2 = pid_thrust(st, meas, desired, 0.05, cc);
  // Second tick sees integral = 0.005: u = 1.0 + ki*0.005 = 1.03.
  EXPECT_DOUBLE_EQ(u2.x, 1.0 + 6.0 * 0.005);
}

TEST(PidThrust, DerivativeTermDampsVelocity) {
  ControllerConfig cc;
  MuControllerState st;
  const Measurement meas{{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}};  // moving toward target
  const Vec3 u = pid_thrust(st, meas, {0.1, 0.0, 0.0}, 0.05, cc);
  EXPECT_DOUBLE_EQ(u.x, 10.0 * 0.1 - 6.0 * 0.5);
}

TEST(PidThrust, NonFiniteMeasurementFailsSafe) {
  ControllerConfig cc;
  MuControllerState st;
  Measurement meas{{std::nan(""), 0.0, 0.0}, {0.0, 0.0, 0.0}};
  const Vec3 u = pid_thrust(st, meas, {1.0, 1.0, 1.0}, 0.05, cc);
  EXPECT_EQ(u.norm(), 0.0);
  EXPECT_EQ(st.sensor_faults, 1);
  EXPECT_EQ(st.integral.norm(), 0.0);  // no windup on faults
}

TEST(FuelIncrement, MatchesRocketEquationRate) {
  // Full-axis thrust 5.1 N held 10 s: m = |u| t / (g0 Isp) = 51/588.6 kg.
  double m = 0.0;
  const Vec3 u{5.1, 0.0, 0.0};
  for (int i = 0; i < 200; ++i) m += fuel_increment(u, 0.05, 60.0, 9.81);
  EXPECT_NEAR(m, 51.0 / (9.81 * 60.0), 1e-6);
  EXPECT_NEAR(m, 0.0866462, 1e-6);

  // Mixed-axis thrust uses the Euclidean magnitude: |(3,4,0)| = 5 N for 1 s.
  EXPECT_NEAR(fuel_increment({3.0, 4.0, 0.0}, 1.0, 60.0, 9.81), 5.0 / 588.6, 1e-9);
  EXPECT_NEAR(fuel_increment({3.0, 4.0, 0.0}, 1.0, 60.0, 9.81), 8.4947e-3, 1e-6);
}

TEST(MuController, InactiveAndRetargetBehaviour) {
  ControllerConfig cc;
  cc.pos_noise_3sigma = 0.0;
  cc.vel_noise_3sigma = 0.0;
  Rng rng(9, 2);
  MuController ctrl(cc, {0.0, 0.0, 0.0}, {10.0, 0.0, 0.0});
  const Measurement truth{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  const Vec3 u = ctrl.tick(0.0, truth, rng);
  EXPECT_DOUBLE_EQ(u.x, 0.0);  // desired(0) == r0 == position
  // Mid-deployment there is a real error.
  const Vec3 u2 = ctrl.tick(12.5, truth, rng);
  EXPECT_GT(u2.x, 0.0);
  EXPECT_GT(ctrl.fuel(), 0.0);

  // Retarget resets the integral and swaps the reference trajectory.
  ctrl.retarget(12.5, {0.0, 0.0, 0.0}, {0.0, 5.0, 0.0}, 8.0);
  EXPECT_EQ(ctrl.state().integral.norm(), 0.0);
  const Vec3 d = ctrl.desired_at(12.5 + 4.0);  // halfway up the ramp
  EXPECT_NEAR(d.y, 2.5, 1e-12);

  ctrl.deactivate();
  EXPECT_EQ(ctrl.tick(13.0, truth, rng).norm(), 0.0);
  EXPECT_EQ(ctrl.held().norm(), 0.0);
}

// ---------------------------------------------------------------------------
// Aiming
// ---------------------------------------------------------------------------

TEST(Aiming, NominalTableFourMu) {
  const ScenarioBounds b;
  const auto pts = nominal_aiming({1.0, -2.0, -50.0}, Variant::FourMu, b);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_DOUBLE_EQ(pts[0].x, 1.0 - 12.0);
  EXPECT_DOUBLE_EQ(pts[0].y, -2.0 - 12.0);
  EXPECT_DOUBLE_EQ(pts[1].x, 1.0 + 12.0);
  EXPECT_DOUBLE_EQ(pts[1].y, -2.0 - 12.0);
  EXPECT_DOUBLE_EQ(pts[2].x, 1.0 - 12.0);
  EXPECT_DOUBLE_EQ(pts[2].y, -2.0 + 12.0);
  EXPECT_DOUBLE_EQ(pts[3].x, 1.0 + 12.0);
  EXPECT_DOUBLE_EQ(pts[3].y, -2.0 + 12.0);
  for (const auto& p : pts) EXPECT_DOUBLE_EQ(p.z, -50.0);
}

TEST(Aiming, NominalTableEightMuAndRawVariant) {
  const ScenarioBounds b;
  const auto pts = nominal_aiming({0.0, 0.0, -50.0}, Variant::EightMu, b);
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_DOUBLE_EQ(pts[4].y, -11.71);
  EXPECT_DOUBLE_EQ(pts[5].x, 11.70);
  EXPECT_DOUBLE_EQ(pts[6].x, -11.71);
  EXPECT_DOUBLE_EQ(pts[7].y, 11.71);  // symmetric completion
  // The verbatim printed table duplicates two rows.
  const auto raw = nominal_aiming({0.0, 0.0, -50.0}, Variant::EightMu, b, true);
  EXPECT_DOUBLE_EQ(raw[3].x, raw[2].x);
  EXPECT_DOUBLE_EQ(raw[3].y, raw[2].y);
  EXPECT_DOUBLE_EQ(raw[7].x, raw[4].x);
  EXPECT_DOUBLE_EQ(raw[7].y, raw[4].y);
}

TEST(Aiming, ScenarioValidationBounds) {
  const ScenarioBounds b;  // x,y in [-9,9], z in [-60,-40]
  EXPECT_NO_THROW(validate_scenario({0.0, 0.0, -50.0, 1}, b));
  EXPECT_NO_THROW(validate_scenario({-9.0, 9.0, -60.0, 1}, b));
  EXPECT_THROW(validate_scenario({9.1, 0.0, -50.0, 1}, b), ScenarioError);
  EXPECT_THROW(validate_scenario({0.0, -9.1, -50.0, 1}, b), ScenarioError);
  EXPECT_THROW(validate_scenario({0.0, 0.0, -39.9, 1}, b), ScenarioError);
  EXPECT_THROW(validate_scenario({0.0, 0.0, -60.1, 1}, b), ScenarioError);
}

TEST(Aiming, ApplyActionClipAndReject) {
  const std::vector<Vec3> nominal{{0, 0, -50}, {1, 1, -50}};
  AimingAction act(2, {0.0, 0.0});
  act[0] = {2.0, -3.0};
  act[1] = {7.0, 0.0};  // out of bounds
  const auto clipped = apply_action(nominal, act, 5.0, true);
  EXPECT_DOUBLE_EQ(clipped[0].x, 2.0);
  EXPECT_DOUBLE_EQ(clipped[0].y, -3.0);
  EXPECT_DOUBLE_EQ(clipped[1].x, 1.0 + 5.0);  // clipped to +5
  EXPECT_DOUBLE_EQ(clipped[1].z, -50.0);      // z untouched
  EXPECT_THROW(apply_action(nominal, act, 5.0, false), ScenarioError);
  EXPECT_THROW(apply_action(nominal, AimingAction(3, {0.0, 0.0}), 5.0, true),
               std::invalid_argument);
}

TEST(Aiming, QuantizeToGrid) {
  EXPECT_DOUBLE_EQ(quantize_to_grid(0.26, 0.1), 0.3);
  EXPECT_DOUBLE_EQ(quantize_to_grid(-0.26, 0.1), -0.3);
  EXPECT_DOUBLE_EQ(quantize_to_grid(0.0, 0.1), 0.0);
  Rng rng(14, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-9.0, 9.0);
    const double q = quantize_to_grid(v, 0.1);
    EXPECT_LE(std::abs(q - v), 0.05 + 1e-12);
    // On-lattice: 10*q is integral up to fp noise.
    EXPECT_NEAR(std::round(q * 10.0), q * 10.0, 1e-9);
  }
}

TEST(Aiming, SampleScenarioStaysOnLatticeInsideBounds) {
  const ScenarioBounds b;
  Rng rng(77, 0);
  bool hit_x_min = false, hit_x_max = false;
  for (int i = 0; i < 20000; ++i) {
    const Scenario s = sample_scenario(rng, b);
    ASSERT_GE(s.x, b.x_min - 1e-12);
    ASSERT_LE(s.x, b.x_max + 1e-12);
    ASSERT_GE(s.z, b.z_min - 1e-12);
    ASSERT_LE(s.z, b.z_max + 1e-12);
    ASSERT_NEAR(std::round(s.x * 10.0), s.x * 10.0, 1e-9);
    ASSERT_NEAR(std::round(s.y * 10.0), s.y * 10.0, 1e-9);
    ASSERT_NEAR(std::round(s.z * 10.0), s.z * 10.0, 1e-9);
    hit_x_min |= s.x < b.x_min + 0.5;
    hit_x_max |= s.x > b.x_max - 0.5;
  }
  EXPECT_TRUE(hit_x_min);  // both edges of the box are reachable
  EXPECT_TRUE(hit_x_max);
}

// ---------------------------------------------------------------------------
// Capture metrics
// ---------------------------------------------------------------------------

TEST(Cqi, CubeHandCaseExact) {
  // Net points on a 2x2x2 cube: V=8, S=24; offset |q| equal to the
  // characteristic length makes the last term exactly 0.8.
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back({i & 1 ? 1.0 : -1.0, (i >> 1) & 1 ? 1.0 : -1.0,
                   (i >> 2) & 1 ? 1.0 : -1.0});
  const TargetGeometry tg;  // 159.9 / 59.9 / 1.95
  const Vec3 net_com{0.0, 0.0, 0.0};
  const Vec3 debris{0.0, 0.0, 1.95};
  const double got = cqi(pts, net_com, debris, tg);
  const double expect = 0.1 * std::abs(8.0 - 159.9) / 159.9 +
                        0.1 * std::abs(24.0 - 59.9) / 59.9 + 0.8;
  EXPECT_NEAR(got, expect, 1e-12);
}

TEST(Cqi, PerfectMatchIsZero) {
  // A cloud whose hull exactly matches the target volume/surface with zero
  // offset scores zero. Build the target as a cube with V=159.9.
  const double a = std::cbrt(159.9);
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back({(i & 1 ? a : 0.0), ((i >> 1) & 1 ? a : 0.0), ((i >> 2) & 1 ? a : 0.0)});
  TargetGeometry tg;
  tg.volume = 159.9;
  tg.surface = 6.0 * a * a;
  const Vec3 com{a / 2, a / 2, a / 2};
  EXPECT_NEAR(cqi(pts, com, com, tg), 0.0, 1e-12);
}

TEST(ClosingTrigger, InclusiveThreshold) {
  EXPECT_TRUE(closing_trigger({0, 0, 0}, {0, 0, 2.5}, 2.5));   // boundary fires
  EXPECT_TRUE(closing_trigger({0, 0, 0}, {0, 0, 2.49}, 2.5));
  EXPECT_FALSE(closing_trigger({0, 0, 0}, {0, 0, 2.51}, 2.5));
}

TEST(CaptureSuccess, ThresholdMatrix) {
  EXPECT_TRUE(capture_success(2.5, 8, 2.5, 8));    // both at threshold
  EXPECT_FALSE(capture_success(2.51, 8, 2.5, 8));  // CQI too high
  EXPECT_FALSE(capture_success(2.5, 7, 2.5, 8));   // too few pairs
  EXPECT_TRUE(capture_success(0.0, 12, 2.5, 8));
  EXPECT_EQ(failure_reason_of(false, 50.0, 0, 2.5, 8), "NoTrigger");
  EXPECT_EQ(failure_reason_of(true, 3.0, 8, 2.5, 8), "CQI");
  EXPECT_EQ(failure_reason_of(true, 2.0, 5, 2.5, 8), "LockedPairs");
  EXPECT_EQ(failure_reason_of(true, 3.0, 5, 2.5, 8), "CQI+LockedPairs");
  EXPECT_EQ(failure_reason_of(true, 2.0, 9, 2.5, 8), "");
}

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

TEST(Reward, HandCases) {
  // Success with full mouth and fuel at the budget: R = 1 + w*(1 - 1) = 1.
  RewardInputs a{432.64, 432.64, 2.5, 8, 0.08};
  EXPECT_NEAR(reward(a, 1.0, 0.08, 2.5, 8), 1.0, 1e-9);
  // Success with (hypothetically) zero fuel: R = 1 + 1 = 2.
  RewardInputs b{432.64, 432.64, 2.5, 8, 0.0};
  EXPECT_NEAR(reward(b, 1.0, 0.08, 2.5, 8), 2.0, 1e-9);
  // Total failure: area 0, CQI 10, no pairs:
  // R = -ln((10-2.5)^2+1) - ln((0-8)^2+1).
  RewardInputs c{0.0, 432.64, 10.0, 0, 0.05};
  const double expect = -std::log(57.25) - std::log(65.0);
  EXPECT_NEAR(reward(c, 1.0, 0.08, 2.5, 8), expect, 1e-9);
  EXPECT_NEAR(expect, -8.2218, 5e-5);  // -8.221815 to machine precision
  // Eight-MU weighting w=1.5 scales only the fuel bonus.
  RewardInputs d{432.64, 432.64, 2.0, 6, 0.04};
  EXPECT_NEAR(reward(d, 1.5, 0.08, 2.5, 6), 1.0 + 1.5 * 0.5, 1e-9);
}

TEST(Reward, FuelBonusExclusiveToSuccessBranch) {
  Rng rng(4242, 0);
  for (int i = 0; i < 100000; ++i) {
    RewardInputs in;
    in.mouth_area = rng.uniform(0.0, 432.64);
    in.a_max = 432.64;
    in.settled_cqi = rng.uniform(0.0, 6.0);
    in.locked_pairs = int(rng.uniform(0.0, 13.0));
    in.fuel_total = rng.uniform(0.0, 0.08);
    const double w = 1.0, m_fmax = 0.08;
    const double r = reward(in, w, m_fmax, 2.5, 8);
    const bool success = in.settled_cqi <= 2.5 && in.locked_pairs >= 8;
    double expect = in.mouth_area / in.a_max;
    if (in.settled_cqi > 2.5) {
      const double d = in.settled_cqi - 2.5;
      expect -= std::log(d * d + 1.0);
    }
    if (in.locked_pairs < 8) {
      const double d = double(in.locked_pairs - 8);
      expect -= std::log(d * d + 1.0);
    }
    if (success) expect += w * (1.0 - in.fuel_total / m_fmax);
    ASSERT_NEAR(r, expect, 1e-12);
    // The bonus branch must appear exactly when both criteria hold.
    const double base_only = r - (success ? w * (1.0 - in.fuel_total / m_fmax) : 0.0);
    if (!success) ASSERT_EQ(r, base_only);
  }
}

TEST(NetHullPoints, IncludesNodesKnotAndMus) {
  const Config cfg;
  const auto [a, s] = build_assembly(cfg);
  const auto pts = net_hull_points(a, s);
  EXPECT_EQ(pts.size(), static_cast<size_t>(a.node_count + 1 + a.mu_count()));
}
