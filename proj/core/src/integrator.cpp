#include "emi/integrator.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "emi/error.hpp"

namespace emi {

namespace {

// Chebyshev T_j(x) and T_j'(x) for j = 0..s.
void chebyshev(int s, double x, std::vector<double>& T, std::vector<double>& dT) {
  T.assign(s + 1, 0.0);
  dT.assign(s + 1, 0.0);
  T[0] = 1.0;
  dT[0] = 0.0;
  if (s == 0) return;
  T[1] = x;
  dT[1] = 1.0;
  for (int j = 2; j <= s; ++j) {
    T[j] = 2.0 * x * T[j - 1] - T[j - 2];
    dT[j] = 2.0 * T[j - 1] + 2.0 * x * dT[j - 1] - dT[j - 2];
  }
}

struct Coefficients {
  double w0, w1;
  std::vector<double> b, c;  // b_j = 1 / T_j(w0), c_j stage times
};

Coefficients coefficients(int s, double damping) {
  if (s < 1) throw ConfigError("stage count must be at least 1");
  Coefficients k;
  k.w0 = 1.0 + damping / (double(s) * double(s));
  std::vector<double> T, dT;
  chebyshev(s, k.w0, T, dT);
  k.w1 = T[s] / dT[s];
  k.b.resize(s + 1);
  k.c.resize(s + 1);
  for (int j = 0; j <= s; ++j) {
    k.b[j] = 1.0 / T[j];
    k.c[j] = j == 0 ? 0.0 : k.w1 * dT[j] / T[j];
  }
  return k;
}

Eigen::VectorXd pack(const MembraneState& s) {
  const auto n = s.V.size();
  Eigen::VectorXd y(n + s.z.size());
  y.head(n) = s.V;
  y.tail(s.z.size()) = Eigen::Map<const Eigen::VectorXd>(s.z.data(), s.z.size());
  return y;
}

MembraneState unpack(const Eigen::VectorXd& y, Eigen::Index n, Eigen::Index ns, double t) {
  MembraneState s;
  s.V = y.head(n);
  s.z = Eigen::Map<const Eigen::MatrixXd>(y.data() + n, n, ns);
  s.t = t;
  return s;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

std::pair<Eigen::VectorXd, Eigen::MatrixXd> SplitRHS::slow(const MembraneState& s) const {
  static const Stimulus none{};
  const auto r = eval_rhs(*model, s.V, s.z, s.t, stimulus ? *stimulus : none);
  return {-(r.I_ion + r.I_stim) / capacitance, r.g};
}

RadiusEstimate estimate_spectral_radius(const LinearMap& map, std::size_t dim, std::uint64_t seed,
                                        double tol, int max_iterations) {
  RadiusEstimate est;
  if (dim == 0) {
    est.converged = true;
    return est;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  for (auto& x : v) x = normal(rng);
  v.normalize();
  double prev = -1.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd w = map(v);
    const double r = w.norm();
    est.iterations = it;
    est.rho = r;
    if (r == 0.0) {
      est.converged = true;
      return est;
    }
    if (std::abs(r - prev) <= tol * r) {
      est.converged = true;
      return est;
    }
    prev = r;
    v = w / r;
  }
  return est;
}

int rkc_stage_count(double dt_rho, double safety, int max_stages) {
  if (!(dt_rho >= 0.0) || !std::isfinite(dt_rho)) throw NumericalError("invalid dt * rho");
  const double s = std::ceil(std::sqrt(dt_rho * safety / 0.65)) + 1.0;
  if (s > max_stages)
    throw ConfigError("required stage count " + std::to_string(s) + " exceeds the cap " +
                      std::to_string(max_stages));
  return static_cast<int>(s);
}

double rkc_stability(int s, double damping, double z) {
  const auto k = coefficients(s, damping);
  std::vector<double> T, dT;
  chebyshev(s, k.w0 + k.w1 * z, T, dT);
  return T[s] * k.b[s];
}

double rkc_stability_bound(int s, double damping) {
  const auto k = coefficients(s, damping);
  return (1.0 + k.w0) / k.w1;
}

Eigen::VectorXd rkc_advance(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                            double t, const Eigen::VectorXd& y, double dt, int s, double damping) {
  const auto k = coefficients(s, damping);
  // Increments over y: the first-order recursion has no y term, so a zero
  // right hand side returns y exactly.
  Eigen::VectorXd prev2 = Eigen::VectorXd::Zero(y.size());
  Eigen::VectorXd prev = (k.w1 / k.w0) * dt * f(t, y);
  if (!finite(prev)) throw NumericalError("non-finite value in RKC stage 1");
  for (int j = 2; j <= s; ++j) {
    const double mu = 2.0 * k.w0 * k.b[j] / k.b[j - 1];
    const double nu = -k.b[j] / k.b[j - 2];
    const double mu_t = 2.0 * k.w1 * k.b[j] / k.b[j - 1];
    Eigen::VectorXd next = mu * prev + nu * prev2 + mu_t * dt * f(t + k.c[j - 1] * dt, y + prev);
    if (!finite(next)) throw NumericalError("non-finite value in RKC stage " + std::to_string(j));
    prev2 = std::move(prev);
    prev = std::move(next);
  }
  return y + prev;
}

double slow_radius(const SplitRHS& rhs, const MembraneState& state) {
  const auto& m = *rhs.model;
  const auto ns = static_cast<Eigen::Index>(m.num_states());
  std::vector<double> z(ns), zp(ns), dz(ns), dzp(ns);
  double bound = 0.0;
  for (Eigen::Index k = 0; k < state.V.size(); ++k) {
    const double V = state.V[k];
    for (Eigen::Index c = 0; c < ns; ++c) z[c] = state.z(k, c);
    const double h = 1e-6 * std::max(1.0, std::abs(V));
    const double dI = (m.current(V + h, z.data()) - m.current(V - h, z.data())) / (2.0 * h);
    bound = std::max(bound, std::abs(dI) / rhs.capacitance);
    m.state_rate(V, z.data(), dz.data());
    for (Eigen::Index c = 0; c < ns; ++c) {
      const double hz = 1e-6 * std::max(1.0, std::abs(z[c]));
      zp = z;
      zp[c] += hz;
      m.state_rate(V, zp.data(), dzp.data());
      bound = std::max(bound, std::abs(dzp[c] - dz[c]) / hz);
    }
  }
  return bound;
}

MembraneState rkc_step(const MembraneState& state, const SplitRHS& rhs, const StepperConfig& cfg,
                       double rho_fast, double rho_slow, StepInfo* info) {
  const auto n = state.V.size();
  const auto ns = state.z.cols();
  const double dt = cfg.dt;
  auto auto_s = [&](double rho) {
    return cfg.stages > 0 ? cfg.stages : rkc_stage_count(dt * rho, cfg.rho_safety, cfg.max_stages);
  };

  auto combined = [&](double t, const Eigen::VectorXd& y) {
    const auto s = unpack(y, n, ns, t);
    auto [dV, dz] = rhs.slow(s);
    Eigen::VectorXd out(y.size());
    out.head(n) = dV + rhs.fast(s.V);
    out.tail(dz.size()) = Eigen::Map<const Eigen::VectorXd>(dz.data(), dz.size());
    return out;
  };
  auto slow_only = [&](double t, const Eigen::VectorXd& y) {
    const auto s = unpack(y, n, ns, t);
    auto [dV, dz] = rhs.slow(s);
    Eigen::VectorXd out(y.size());
    out.head(n) = dV;
    out.tail(dz.size()) = Eigen::Map<const Eigen::VectorXd>(dz.data(), dz.size());
    return out;
  };
  auto fast_only = [&](double, const Eigen::VectorXd& V) { return rhs.fast(V); };

  MembraneState next;
  if (!cfg.strang) {
    const double rho = rho_fast + rho_slow;
    const int s = auto_s(rho);
    next = unpack(rkc_advance(combined, state.t, pack(state), dt, s, cfg.damping), n, ns,
                  state.t + dt);
    if (info) *info = {s, s, rho, std::abs(rkc_stability(s, cfg.damping, -dt * rho))};
  } else {
    StepperConfig half = cfg;
    half.dt = 0.5 * dt;
    const int ss = cfg.stages > 0 ? cfg.stages
                                  : rkc_stage_count(half.dt * rho_slow, cfg.rho_safety, cfg.max_stages);
    const int sf = auto_s(rho_fast);
    Eigen::VectorXd y = rkc_advance(slow_only, state.t, pack(state), half.dt, ss, cfg.damping);
    y.head(n) = rkc_advance(fast_only, state.t, y.head(n), dt, sf, cfg.damping);
    y = rkc_advance(slow_only, state.t + half.dt, y, half.dt, ss, cfg.damping);
    next = unpack(y, n, ns, state.t + dt);
    if (info) {
      const double a = std::max(std::abs(rkc_stability(sf, cfg.damping, -dt * rho_fast)),
                                std::abs(rkc_stability(ss, cfg.damping, -half.dt * rho_slow)));
      *info = {sf, sf + 2 * ss, rho_fast, a};
    }
  }
  return next;
}

SimulationResult simulate(const CoupledSystem& system, const IonicModel& model,
                          const Stimulus& stim, double capacitance, double t_end,
                          const StepperConfig& cfg, const SimulationOptions& opts) {
  if (!(capacitance > 0.0)) throw ConfigError("membrane capacitance must be positive");
  const auto m0 = static_cast<Eigen::Index>(system.num_transmembrane());
  stim.validate(static_cast<std::size_t>(m0));
  SplitRHS rhs;
  rhs.psi = [&system](const Eigen::VectorXd& v) { return system.psi(v); };
  rhs.model = &model;
  rhs.stimulus = &stim;
  rhs.capacitance = capacitance;
  MembraneState init;
  init.V = Eigen::VectorXd::Constant(m0, model.rest_potential());
  init.z = model.rest_state().transpose().replicate(m0, 1);
  return simulate(rhs, std::move(init), t_end, cfg, opts);
}

SimulationResult simulate(const SplitRHS& rhs, MembraneState state, double t_end,
                          const StepperConfig& cfg, const SimulationOptions& opts) {
  if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("end time must be nonnegative");
  if (cfg.rho_refresh < 1) throw ConfigError("refresh cadence must be at least one step");
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::size_t>(state.V.size());
  for (auto p : opts.probes)
    if (p >= n) throw ConfigError("probe index outside the transmembrane nodes");

  SimulationResult res;
  const auto est = estimate_spectral_radius([&rhs](const Eigen::VectorXd& v) { return rhs.fast(v); },
                                            n, cfg.seed);
  res.rho_fast = est.rho;
  if (!est.converged) res.diagnostic = "spectral radius estimate did not converge; ";

  auto probe_values = [&](const MembraneState& s) {
    Eigen::VectorXd v(opts.probes.size());
    for (std::size_t k = 0; k < opts.probes.size(); ++k) v[k] = s.V[opts.probes[k]];
    return v;
  };
  res.activation.assign(opts.probes.size(), std::numeric_limits<double>::quiet_NaN());
  res.times.push_back(state.t);
  res.probe_values.push_back(probe_values(state));
  std::size_t next_snapshot = 0;
  auto take_snapshots = [&](const MembraneState& s) {
    while (next_snapshot < opts.snapshot_times.size() &&
           opts.snapshot_times[next_snapshot] <= s.t + 1e-9 * cfg.dt) {
      res.snapshots.push_back({s.t, s.V, s.z});
      ++next_snapshot;
    }
  };
  take_snapshots(state);

  const long steps = std::lround(t_end / cfg.dt);
  double rho_slow = 0.0;
  std::size_t activated = 0;
  for (long k = 0; k < steps; ++k) {
    if (k % cfg.rho_refresh == 0) {
      rho_slow = slow_radius(rhs, state);
      const double rho = res.rho_fast + rho_slow;
      res.rho_history.push_back(rho);
      res.stage_history.push_back(
          cfg.stages > 0 ? cfg.stages : rkc_stage_count(cfg.dt * rho, cfg.rho_safety, cfg.max_stages));
    }
    StepInfo info;
    MembraneState next;
    try {
      next = rkc_step(state, rhs, cfg, res.rho_fast, rho_slow, &info);
    } catch (const NumericalError& e) {
      res.failed = true;
      res.diagnostic += "step " + std::to_string(k) + " failed: " + e.what();
      break;
    }
    next.t = state.t + cfg.dt;
    res.steps = k + 1;
    res.rhs_evaluations += info.evaluations;
    res.max_amplification = std::max(res.max_amplification, info.amplification);
    if (info.amplification > 1.0 + 1e-12) res.certificate_ok = false;

    for (std::size_t p = 0; p < opts.probes.size(); ++p) {
      if (!std::isnan(res.activation[p])) continue;
      const double a = state.V[opts.probes[p]], b = next.V[opts.probes[p]];
      if (a < opts.threshold && b >= opts.threshold) {
        res.activation[p] = state.t + cfg.dt * (opts.threshold - a) / (b - a);
        ++activated;
      }
    }
    state = std::move(next);
    if ((k + 1) % opts.record_every == 0 || k + 1 == steps) {
      res.times.push_back(state.t);
      res.probe_values.push_back(probe_values(state));
    }
    take_snapshots(state);
    if (opts.stop_when_activated && !opts.probes.empty() && activated == opts.probes.size()) break;
  }
  res.final_state = std::move(state);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace emi
