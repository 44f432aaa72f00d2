#include "vrpe/schedule.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vrpe/error.hpp"
#include "vrpe/sampling.hpp"

namespace vrpe {

namespace {

constexpr double kRelTol = 1e-12;

bool at_least(double value, double bound) { return value >= bound * (1.0 - kRelTol); }
bool at_most(double value, double bound) { return value <= bound * (1.0 + kRelTol); }

/// Smallest n >= floor_n with rho^n <= target.
Index geometric_count(double rho, double target, Index floor_n) {
  if (target >= 1.0) return floor_n;
  if (!(target > 0.0)) throw InfeasibleInputs("burn-in target must be positive");
  Index n = std::max<Index>(floor_n, ceil_tol(std::log(target) / std::log(rho)));
  while (!at_most(std::pow(rho, static_cast<double>(n)), target)) ++n;
  while (n > floor_n && at_most(std::pow(rho, static_cast<double>(n - 1)), target)) --n;
  return n;
}

Index recentering_floor(double coefficient, const ScheduleStats& s, int K, int k, Index N) {
  const double noise = coefficient * s.varsigma_sq / (s.mu * (1.0 - s.gamma) * (1.0 - s.gamma));
  const double target = std::pow(0.75, K - k) * static_cast<double>(N);
  return std::max<Index>({1, ceil_tol(noise), ceil_tol(target)});
}

struct MarkovConstants {
  double rho;
  double c_p;
  double c_m;
  double min_pi;
};

MarkovConstants markov_constants(const ScheduleStats& s) {
  if (!s.mixing || !s.bias_constant || !s.min_pi) {
    throw InfeasibleInputs("Markovian schedule requires mixing constants, C_M and min pi");
  }
  MarkovConstants c{s.mixing->rho, s.mixing->c_p, *s.bias_constant, *s.min_pi};
  if (!(c.rho > 0.0 && c.rho < 1.0)) throw InfeasibleInputs("mixing rate must lie in (0, 1)");
  if (!(c.c_p > 0.0 && c.c_m > 0.0 && c.min_pi > 0.0)) {
    throw InfeasibleInputs("mixing constants must be positive");
  }
  return c;
}

double tau_target(const ScheduleStats& s, const MarkovConstants& c) {
  const double varsigma = std::sqrt(s.varsigma_sq);
  return std::min(2.0 * (1.0 - c.rho) * varsigma / (3.0 * c.c_m),
                  2.0 * (1.0 - c.rho) * (1.0 - c.rho) / (5.0 * c.c_m));
}

double m0_target(const ScheduleStats& s, const MarkovConstants& c, double eta, Index tau) {
  return std::min(c.min_pi / c.c_p, std::sqrt(s.mu) * eta * static_cast<double>(tau) *
                                        s.varsigma_sq * (1.0 - c.rho) / c.c_m);
}

bool recentering_bias_ok(const MarkovConstants& c, Index tau, Index L) {
  const double lhs = std::pow(c.rho, static_cast<double>(L));
  const double rhs = static_cast<double>(tau) * (1.0 - c.rho) / (5.0 * c.c_m * static_cast<double>(L));
  return at_most(lhs, rhs);
}

void check_stats(const ScheduleStats& s, int K, Index N) {
  if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw InfeasibleInputs("gamma must lie in (0, 1)");
  if (!(s.mu > 0.0 && s.beta >= s.mu * (1.0 - 1e-12))) {
    throw InfeasibleInputs("feature constants must satisfy 0 < mu <= beta");
  }
  if (!(s.varsigma_sq >= 0.0) || !std::isfinite(s.varsigma_sq)) {
    throw InfeasibleInputs("variance parameter must be finite and nonnegative");
  }
  if (K < 1 || N < 1) throw InfeasibleInputs("K and N must be positive");
}

}  // namespace

Index ceil_tol(double x) {
  if (!std::isfinite(x)) throw InfeasibleInputs("non-finite schedule quantity");
  const double shrunk = x > 0.0 ? x * (1.0 - kRelTol) : x * (1.0 + kRelTol);
  const double c = std::ceil(shrunk);
  if (c > static_cast<double>(std::numeric_limits<Index>::max() / 4)) {
    throw InfeasibleInputs("schedule quantity overflows");
  }
  return static_cast<Index>(c);
}

const char* setting_name(Setting setting) {
  switch (setting) {
    case Setting::Vrtd: return "VRTD";
    case Setting::VrftdIid: return "VRFTD_IID";
    case Setting::VrftdMarkov: return "VRFTD_MARKOV";
  }
  return "unknown";
}

Index EpochSchedule::total_samples() const {
  Index total = 0;
  for (const Index n : N) total += m * T + n;
  return total;
}

void EpochSchedule::check_structure() const {
  if (K < 1 || static_cast<int>(N.size()) != K) throw InvalidSpec("schedule needs K recentering sizes");
  if (T < 1 || m < 1) throw InvalidSpec("T and m must be positive");
  if (m0 < 0 || m0 >= m) throw InvalidSpec("inner burn-in must be below the mini-batch size");
  for (const Index n : N) {
    if (n < 1 || n0 < 0 || n0 >= n) throw InvalidSpec("recentering burn-in must be below every N_k");
  }
  if (lambda != 0 && lambda != 1) throw InvalidSpec("lambda must be 0 or 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidSpec("stepsize must be finite and nonnegative");
}

ScheduleStats schedule_stats(const Problem& problem, bool with_mixing) {
  ScheduleStats s;
  s.beta = problem.basis.beta();
  s.mu = problem.basis.mu();
  s.gamma = problem.instance.gamma();
  s.varsigma_sq = variance_parameter(problem.instance, problem.basis, problem.stationary.pi);
  if (with_mixing) {
    s.mixing = mixing_constants(problem.instance.P());
    s.bias_constant = bias_constant(problem.instance, problem.basis, *s.mixing, problem.stationary);
    s.min_pi = problem.stationary.min();
  }
  return s;
}

EpochSchedule theoretical_schedule(const ScheduleStats& s, int K, Index N, Setting setting) {
  check_stats(s, K, N);
  const double g = s.gamma;
  EpochSchedule out;
  out.K = K;
  out.target_N = N;
  switch (setting) {
    case Setting::Vrtd: {
      double eta = (1.0 - g) / (2.0 * s.beta * (1.0 + g) * (1.0 + g));
      if (s.varsigma_sq > 0.0) eta = std::min(eta, (1.0 - g) / (32.0 * s.varsigma_sq));
      out.eta = eta;
      out.lambda = 0;
      out.T = ceil_tol(32.0 / (s.mu * (1.0 - g) * eta));
      out.m = 1;
      out.averaging = Averaging::PaperWeighted;
      for (int k = 1; k <= K; ++k) out.N.push_back(recentering_floor(38.0, s, K, k, N));
      break;
    }
    case Setting::VrftdIid: {
      const double eta = 1.0 / (4.0 * s.beta * (1.0 + g));
      out.eta = eta;
      out.lambda = 1;
      out.T = ceil_tol(32.0 / (s.mu * (1.0 - g) * eta));
      out.m = std::max<Index>(1, ceil_tol(256.0 * eta * s.varsigma_sq / (1.0 - g)));
      out.averaging = Averaging::UniformTail;
      for (int k = 1; k <= K; ++k) out.N.push_back(recentering_floor(56.0, s, K, k, N));
      break;
    }
    case Setting::VrftdMarkov: {
      const MarkovConstants c = markov_constants(s);
      if (!(s.varsigma_sq > 0.0)) {
        throw InfeasibleInputs("Markovian bias horizon needs a positive variance parameter");
      }
      const double eta = 1.0 / (4.0 * s.beta * (1.0 + g));
      out.eta = eta;
      out.lambda = 1;
      out.T = ceil_tol(64.0 / (s.mu * (1.0 - g) * eta));
      out.averaging = Averaging::UniformTail;
      // tau >= 1: a zero horizon would make the m0 condition unsatisfiable.
      out.tau = geometric_count(c.rho, tau_target(s, c), 1);
      out.n0 = geometric_count(c.rho, c.min_pi / c.c_p, 0);
      out.m0 = geometric_count(c.rho, m0_target(s, c, eta, out.tau), 0);
      const double tau1 = static_cast<double>(out.tau + 1);
      out.m = out.m0 + std::max<Index>(1, ceil_tol(792.0 * eta * tau1 * s.varsigma_sq / (1.0 - g)));
      for (int k = 1; k <= K; ++k) {
        const double noise = 206.0 * tau1 * s.varsigma_sq / (s.mu * (1.0 - g) * (1.0 - g));
        const double target = std::pow(0.75, K - k) * static_cast<double>(N);
        Index L = std::max<Index>({1, ceil_tol(noise), ceil_tol(target)});
        while (!recentering_bias_ok(c, out.tau, L)) ++L;
        out.N.push_back(L + out.n0);
      }
      break;
    }
  }
  out.check_structure();
  const auto check = validate_schedule(out, s, setting);
  if (!check.ok()) throw InfeasibleInputs("generated schedule failed validation: " + check.violations.front());
  return out;
}

ScheduleCheck validate_schedule(const EpochSchedule& sc, const ScheduleStats& s, Setting setting) {
  ScheduleCheck out;
  auto fail = [&](const std::string& what) { out.violations.push_back(what); };
  try {
    sc.check_structure();
  } catch (const Error& e) {
    fail(e.what());
    return out;
  }
  const double g = s.gamma;
  const int K = sc.K;
  const double N = static_cast<double>(sc.target_N);
  if (sc.target_N < 1) fail("target N must be positive");
  const double inner = s.mu * (1.0 - g) * sc.eta;
  if (!(sc.eta > 0.0)) fail("stepsize must be positive");

  switch (setting) {
    case Setting::Vrtd: {
      if (!at_most(sc.eta, (1.0 - g) / (2.0 * s.beta * (1.0 + g) * (1.0 + g)))) fail("eta exceeds (1-gamma)/(2 beta (1+gamma)^2)");
      if (s.varsigma_sq > 0.0 && !at_most(sc.eta, (1.0 - g) / (32.0 * s.varsigma_sq))) fail("eta exceeds (1-gamma)/(32 varsigma^2)");
      if (!at_least(static_cast<double>(sc.T), 32.0 / inner)) fail("T below 32/(mu (1-gamma) eta)");
      if (sc.m != 1 || sc.m0 != 0 || sc.n0 != 0) fail("VRTD uses single-sample inner steps without burn-in");
      if (sc.lambda != 0) fail("VRTD has no extrapolation");
      if (sc.averaging != Averaging::PaperWeighted) fail("VRTD output must use the weighted average");
      for (int k = 1; k <= K; ++k) {
        const double Nk = static_cast<double>(sc.N[k - 1]);
        if (!at_least(Nk, 38.0 * s.varsigma_sq / (s.mu * (1.0 - g) * (1.0 - g)))) fail("N_k below 38 varsigma^2/(mu (1-gamma)^2)");
        if (!at_least(Nk, std::pow(0.75, K - k) * N)) fail("N_k below (3/4)^{K-k} N");
      }
      break;
    }
    case Setting::VrftdIid: {
      if (!at_most(sc.eta, 1.0 / (4.0 * s.beta * (1.0 + g)))) fail("eta exceeds 1/(4 beta (1+gamma))");
      if (sc.lambda != 1) fail("lambda must equal 1");
      if (!at_least(static_cast<double>(sc.T), 32.0 / inner)) fail("T below 32/(mu (1-gamma) eta)");
      if (!at_least(static_cast<double>(sc.m), std::max(1.0, 256.0 * sc.eta * s.varsigma_sq / (1.0 - g)))) fail("m below max{1, 256 eta varsigma^2/(1-gamma)}");
      if (sc.m0 != 0 || sc.n0 != 0) fail("i.i.d. schedule has no burn-in");
      if (sc.averaging != Averaging::UniformTail) fail("output must be the uniform tail average");
      for (int k = 1; k <= K; ++k) {
        const double Nk = static_cast<double>(sc.N[k - 1]);
        if (!at_least(Nk, 56.0 * s.varsigma_sq / (s.mu * (1.0 - g) * (1.0 - g)))) fail("N_k below 56 varsigma^2/(mu (1-gamma)^2)");
        if (!at_least(Nk, std::pow(0.75, K - k) * N)) fail("N_k below (3/4)^{K-k} N");
      }
      break;
    }
    case Setting::VrftdMarkov: {
      MarkovConstants c{};
      try {
        c = markov_constants(s);
      } catch (const Error& e) {
        fail(e.what());
        return out;
      }
      const double rho = c.rho;
      const double tau = static_cast<double>(sc.tau);
      if (sc.tau < 1) fail("tau must be a positive integer");
      if (!at_most(std::pow(rho, tau), tau_target(s, c))) fail("rho^tau exceeds the bias-horizon bound");
      if (!at_most(std::pow(rho, static_cast<double>(sc.n0)), c.min_pi / c.c_p)) fail("rho^{n0} exceeds min pi / C_P");
      if (!at_most(std::pow(rho, static_cast<double>(sc.m0)), m0_target(s, c, sc.eta, sc.tau))) fail("rho^{m0} exceeds its bound");
      if (!at_most(sc.eta, 1.0 / (4.0 * s.beta * (1.0 + g)))) fail("eta exceeds 1/(4 beta (1+gamma))");
      if (sc.lambda != 1) fail("lambda must equal 1");
      if (!at_least(static_cast<double>(sc.T), 64.0 / inner)) fail("T below 64/(mu (1-gamma) eta)");
      if (!at_least(static_cast<double>(sc.m - sc.m0), std::max(1.0, 792.0 * sc.eta * (tau + 1.0) * s.varsigma_sq / (1.0 - g)))) fail("m - m0 below its bound");
      if (sc.averaging != Averaging::UniformTail) fail("output must be the uniform tail average");
      for (int k = 1; k <= K; ++k) {
        const Index L = sc.N[k - 1] - sc.n0;
        const double Ld = static_cast<double>(L);
        if (!recentering_bias_ok(c, sc.tau, L)) fail("rho^{N_k - n0} exceeds its bound");
        if (!at_least(Ld, 206.0 * (tau + 1.0) * s.varsigma_sq / (s.mu * (1.0 - g) * (1.0 - g)))) fail("N_k - n0 below 206 (tau+1) varsigma^2/(mu (1-gamma)^2)");
        if (!at_least(Ld, std::pow(0.75, K - k) * N)) fail("N_k - n0 below (3/4)^{K-k} N");
      }
      break;
    }
  }
  return out;
}

}  // namespace vrpe
