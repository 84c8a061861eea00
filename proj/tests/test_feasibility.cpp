#include <doctest.h>

#include <sstream>

#include "ehrelay/feasibility.hpp"
#include "oracles.hpp"

using namespace ehrelay;

namespace {

CandidateSets manual(std::vector<std::vector<int>> sets, Eigen::MatrixXd p_hat) {
  CandidateSets c;
  c.s_eta = std::move(sets);
  c.p_hat = std::move(p_hat);
  return c;
}

struct Instance {
  Scenario s;
  EhTrace trace;
  CandidateSets cand;
};

// Random single-pair instance with candidate powers drawn directly.
Instance random_instance(Rng& rng, int M = 1) {
  Instance in;
  in.s.M = M;
  in.s.K = 1 + static_cast<int>(uniform_index(rng, 6));
  in.s.N_c = 1 + static_cast<int>(uniform_index(rng, 20));
  in.s.N_e = 1 + static_cast<int>(uniform_index(rng, 6));
  in.trace = gen_eh_trace(in.s, rng);
  in.cand.s_eta.resize(M);
  in.cand.p_hat = Eigen::MatrixXd::Zero(M, in.s.K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < in.s.K; ++k) {
      if (uniform01(rng) < 0.75) {
        in.cand.s_eta[m].push_back(k);
        in.cand.p_hat(m, k) = uniform(rng, 0.01, 0.3);
      }
    }
    if (in.cand.s_eta[m].empty()) {
      in.cand.s_eta[m].push_back(0);
      in.cand.p_hat(m, 0) = uniform(rng, 0.01, 0.3);
    }
  }
  return in;
}

}  // namespace

TEST_CASE("zeta worked examples") {
  Scenario s;
  s.K = 2;
  s.N_c = 10;
  s.N_e = 1;
  EhTrace t = constant_trace(s, 0.05);
  t.e_init.setConstant(0.05 * s.T_c);
  Eigen::MatrixXd p(1, 2);
  p << 0.1, 0.0;
  CHECK(zeta(manual({{0}}, p), t, 1, s) == doctest::Approx(1.0).epsilon(1e-15));

  t.psi.setConstant(0.03);
  p << 0.1, 0.1;
  CHECK(zeta(manual({{0, 1}}, p), t, 1, s) == doctest::Approx(1.2).epsilon(1e-15));

  // With the startup term zeroed, doubling every power halves zeta.
  t.e_init.setConstant(0.05 * s.T_c);
  const double base = zeta(manual({{0, 1}}, p), t, 1, s);
  t.e_init.setConstant(0.1 * s.T_c);
  const double doubled = zeta(manual({{0, 1}}, 2.0 * p), t, 1, s);
  CHECK(doubled == doctest::Approx(base / 2.0));

  CHECK(std::isinf(zeta(manual({{}}, Eigen::MatrixXd::Zero(1, 2)), t, 1, s)));
}

TEST_CASE("zeta matches term-by-term summation") {
  Rng rng = make_rng(8, 8);
  for (int i = 0; i < 200; ++i) {
    const Instance in = random_instance(rng);
    for (int l = 1; l <= in.s.N_e; ++l) {
      const double expected =
          oracle::zeta_by_hand(in.cand.s_eta[0], in.cand.p_hat.row(0).transpose(), in.trace.psi,
                               in.trace.e_init, l, in.s.N_c, in.s.T_c);
      CHECK(zeta(in.cand, in.trace, l, in.s) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("theorem check uses the minimum over intervals") {
  Scenario s;
  s.K = 1;
  s.N_c = 1000;
  s.N_e = 2;
  EhTrace t = constant_trace(s, 0.06);
  t.e_init.setConstant(0.05 * s.T_c);
  Eigen::MatrixXd p(1, 1);
  p << 0.1;
  const auto cand = manual({{0}}, p);
  CHECK(zeta(cand, t, 1, s) == doctest::Approx(1.2));
  CHECK(theorem1_check(cand, t, s));
  // Interval 2 drags the cumulative average down to 0.045 W: zeta = 0.9.
  t.psi(0, 1) = 0.03;
  CHECK(zeta(cand, t, 2, s) == doctest::Approx(0.9));
  CHECK_FALSE(theorem1_check(cand, t, s));

  t.psi.setConstant(0.05);
  CHECK(theorem1_check(cand, t, s));
}

TEST_CASE("child rate and the share substitution") {
  Scenario s;
  s.K = 1;
  s.N_e = 4;
  EhTrace t = constant_trace(s, 0.02);
  t.psi << 0.011, 0.027, 0.019, 0.024;
  CHECK(child_rate(1.0, t, 0, 3) == doctest::Approx(cumulative_avg_rate(t, 0, 3)));
  CHECK(child_rate(0.0, t, 0, 3) == 0.0);

  Rng rng = make_rng(4, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> theta(4);
    for (double& x : theta) x = uniform01(rng);
    for (int j = 1; j <= 4; ++j) {
      double weighted = 0.0;
      double plain = 0.0;
      for (int i = 0; i < j; ++i) {
        weighted += theta[i] * t.psi(0, i);
        plain += t.psi(0, i);
      }
      const double tilde = weighted / plain;
      CHECK(tilde >= 0.0);
      CHECK(tilde <= 1.0);
      CHECK(child_rate(tilde, t, 0, j) == doctest::Approx(weighted / j).epsilon(1e-14));
    }
  }
}

TEST_CASE("relay-division instance shape and dump") {
  Rng rng = make_rng(6, 6);
  Instance in = random_instance(rng, 3);
  const Fp6Instance inst = build_fp6(in.cand, in.trace, 1, in.s);
  CHECK(inst.problem.n_vars == 2 * 3 * in.s.K);
  CHECK(static_cast<int>(inst.problem.rows.size()) == 3 + 2 * in.s.K);
  for (int v = 0; v < inst.problem.n_vars; ++v) {
    CHECK(inst.problem.lower[v] == 0.0);
    CHECK(inst.problem.upper[v] == 1.0);
  }
  CHECK(inst.problem.rows[0].sense == lp::Sense::greater_equal);
  CHECK(inst.problem.rows[3].sense == lp::Sense::equal);
  std::stringstream out;
  write(out, inst);
  CHECK(out.str().find("# relay division") == 0);
}

TEST_CASE("single-pair collapse equals the theorem check") {
  Rng rng = make_rng(12, 12);
  int feasible = 0;
  for (int i = 0; i < 300; ++i) {
    const Instance in = random_instance(rng);
    const bool theorem = theorem1_check(in.cand, in.trace, in.s);
    CHECK(check_all_intervals(in.cand, in.trace, in.s) == theorem);
    feasible += theorem ? 1 : 0;
  }
  // Both verdicts should be exercised.
  CHECK(feasible > 30);
  CHECK(feasible < 270);
}

TEST_CASE("two symmetric pairs are feasible exactly when the even split is") {
  Scenario s;
  s.M = 2;
  s.K = 2;
  s.N_c = 10;
  s.N_e = 1;
  for (double rate : {0.01, 0.02, 0.03, 0.05, 0.08}) {
    EhTrace t = constant_trace(s, rate);
    Eigen::MatrixXd p(2, 2);
    p << 0.1, 0.1, 0.1, 0.1;
    const auto cand = manual({{0, 1}, {0, 1}}, p);
    const Fp6Instance inst = build_fp6(cand, t, 1, s);
    std::vector<double> half(inst.problem.n_vars, 0.5);
    const bool split_ok = lp::max_violation(inst.problem, half) <= 1e-12;
    CAPTURE(rate);
    CHECK(check_all_intervals(cand, t, s) == split_ok);
  }
}

TEST_CASE("pre-selection and feasibility are monotone in eta") {
  Scenario s;
  s.K = 6;
  Rng place = make_rng(21, stream::placement);
  place_relays(s, place);
  Rng harvest = make_rng(21, stream::harvest);
  const EhTrace t = gen_eh_trace(s, harvest);
  const AfSuccessUtility u(s, compute_gains(s));
  CandidateSets previous = preselect(0.05, u, s);
  bool was_feasible = false;
  for (double eta = 0.1; eta < 20.0; eta *= 1.15) {
    const CandidateSets c = preselect(eta, u, s);
    for (int k = 0; k < s.K; ++k) {
      if (previous.contains(0, k)) {
        CHECK(c.contains(0, k));
        CHECK(c.p_hat(0, k) <= previous.p_hat(0, k) + 1e-9);
      }
    }
    const bool ok = check_all_intervals(c, t, s);
    if (was_feasible) CHECK(ok);
    was_feasible = was_feasible || ok;
    previous = c;
  }
}

TEST_CASE("joint relay division covers every interval for every pair") {
  Rng rng = make_rng(13, 13);
  for (int i = 0; i < 40; ++i) {
    Instance in = random_instance(rng, 2);
    const RelayDivision d = solve_relay_division(in.cand, in.trace, in.s);
    if (!d.feasible) continue;
    for (int m = 0; m < 2; ++m) {
      const EhTrace child = child_trace(d, in.trace, m);
      CandidateSets single;
      single.s_eta = {in.cand.s_eta[m]};
      single.p_hat = in.cand.p_hat.row(m);
      for (int j = 1; j <= in.s.N_e; ++j) CHECK(zeta(single, child, j, in.s) >= 1.0 - 1e-7);
    }
    for (int k = 0; k < in.s.K; ++k) CHECK(d.phi.col(k).sum() == doctest::Approx(1.0));
  }
}
