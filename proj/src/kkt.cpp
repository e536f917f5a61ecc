#include "aoifl/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace aoifl {
namespace {

constexpr double kLn2 = std::numbers::ln2;

// u e^u - (e^u - 1), evaluated without cancellation for small u.
double excess(double u) {
  if (std::abs(u) < 0.1) {
    // sum_{m>=2} (m-1) u^m / m!
    double term = u;  // u^m / m! at m = 1
    double sum = 0.0;
    for (int m = 2; m <= 14; ++m) {
      term *= u / m;
      sum += (m - 1) * term;
    }
    return sum;
  }
  return u * std::exp(u) - std::expm1(u);
}

// Bits-per-Hz exponent y = 1 / (B x2).
double y_of(const AllocationInstance& inst, double x2) { return 1.0 / (inst.bandwidth_hz * x2); }

// lambda_1 demanded by the communication side at x2, times |h|^2.
double comm_multiplier(const AllocationInstance& inst, double x2) {
  return excess(y_of(inst, x2) * kLn2);
}

double comp_multiplier(const AllocationInstance& inst, double x1) {
  return 2.0 * inst.kappa * std::pow(inst.cpu_hz, 3) / std::pow(x1, 3);
}

// x1 on the active time constraint.
double x1_on_constraint(const AllocationInstance& inst, double x2) {
  return (inst.t_max_s - inst.gradient_bits * x2) / inst.full_compute_time();
}

double upper_x2(const AllocationInstance& inst) {
  return (inst.t_max_s - inst.full_compute_time()) / inst.gradient_bits;
}

AllocationResult finish(const AllocationInstance& inst, double x1, double x2, int case_id,
                        bool alpha_full) {
  AllocationResult r;
  r.feasible = true;
  r.case_id = case_id;
  r.x1 = x1;
  r.x2 = x2;
  r.tau = std::min(1.0, 1.0 / x1);
  const double snr_needed = std::expm1(y_of(inst, x2) * kLn2);
  r.alpha = alpha_full ? 1.0 : std::min(1.0, snr_needed / (inst.power_w * inst.gain));
  r.t_cp = inst.full_compute_time() * x1;
  r.t_cm = inst.gradient_bits * x2;
  r.e_cp = inst.kappa * inst.mu_cycles * inst.beta * inst.cpu_hz * inst.cpu_hz / (x1 * x1);
  r.e_cm = inst.gradient_bits * x2 * snr_needed / inst.gain;
  r.e_total = r.e_cp + r.e_cm;
  return r;
}

AllocationResult infeasible_result() {
  AllocationResult r;
  r.feasible = false;
  r.e_cp = r.e_cm = r.e_total = std::numeric_limits<double>::infinity();
  r.t_cp = r.t_cm = std::numeric_limits<double>::infinity();
  return r;
}

void validate(const AllocationInstance& inst) {
  const double fields[] = {inst.cpu_hz,        inst.power_w, inst.beta,       inst.gain,
                           inst.bandwidth_hz,  inst.gradient_bits, inst.kappa, inst.mu_cycles,
                           inst.t_max_s};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("allocation instance fields must be positive and finite");
    }
  }
}

}  // namespace

std::string to_string(AllocationMode mode) {
  switch (mode) {
    case AllocationMode::kkt: return "kkt";
    case AllocationMode::fra1: return "fra1";
    case AllocationMode::fra2: return "fra2";
  }
  return "kkt";
}

AllocationMode parse_allocation_mode(const std::string& text) {
  if (text == "kkt") return AllocationMode::kkt;
  if (text == "fra1") return AllocationMode::fra1;
  if (text == "fra2") return AllocationMode::fra2;
  throw std::invalid_argument("unknown allocation mode '" + text + "' (kkt|fra1|fra2)");
}

AllocationInstance make_instance(const DeviceProfile& device, double gain,
                                 const SystemParams& params) {
  AllocationInstance inst;
  inst.cpu_hz = device.cpu_hz;
  inst.power_w = device.power_w;
  inst.beta = static_cast<double>(device.beta);
  inst.gain = gain;
  inst.bandwidth_hz = params.bandwidth_hz;
  inst.gradient_bits = params.gradient_bits;
  inst.kappa = params.kappa;
  inst.mu_cycles = params.mu_cycles;
  inst.t_max_s = device.t_max_s;
  return inst;
}

double upsilon1(const AllocationInstance& inst) {
  return kLn2 / (inst.bandwidth_hz * std::log1p(inst.power_w * inst.gain));
}

bool feasible(const AllocationInstance& inst) {
  validate(inst);
  return inst.full_compute_time() + inst.gradient_bits * upsilon1(inst) <= inst.t_max_s;
}

double objective_x(const AllocationInstance& inst, double x1, double x2) {
  const double e_cp = inst.kappa * inst.mu_cycles * inst.beta * inst.cpu_hz * inst.cpu_hz / (x1 * x1);
  const double e_cm = inst.gradient_bits * x2 * std::expm1(y_of(inst, x2) * kLn2) / inst.gain;
  return e_cp + e_cm;
}

double stationarity_residual(const AllocationInstance& inst, double x1, double x2) {
  const double lhs = comp_multiplier(inst, x1);
  const double rhs = comm_multiplier(inst, x2) / inst.gain;
  return (lhs - rhs) / std::max(lhs, rhs);
}

std::pair<double, double> case4_root(const AllocationInstance& inst) {
  validate(inst);
  if (!feasible(inst)) throw std::domain_error("case4_root: infeasible instance");
  // phi grows with x2: the compute side rises as x1 shrinks, the
  // communication side falls as y shrinks.
  auto phi = [&](double x2) {
    return comp_multiplier(inst, x1_on_constraint(inst, x2)) - comm_multiplier(inst, x2) / inst.gain;
  };
  double lo = upsilon1(inst);
  double hi = upper_x2(inst);
  const double f_lo = phi(lo);
  const double f_hi = phi(hi);
  if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
    throw std::domain_error("case4_root: no sign change on the x2 bracket");
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double x2 = std::abs(phi(lo)) <= std::abs(phi(hi)) ? lo : hi;
  return {x1_on_constraint(inst, x2), x2};
}

AllocationResult solve(const AllocationInstance& inst) {
  validate(inst);
  if (!feasible(inst)) return infeasible_result();

  const double t_comp = inst.full_compute_time();
  const double v1 = upsilon1(inst);
  const double slack = inst.t_max_s - (t_comp + inst.gradient_bits * v1);

  // Case 1: both limits tight.
  if (slack <= kCaseOneTolerance * inst.t_max_s) return finish(inst, 1.0, v1, 1, true);

  const double kc3h = 2.0 * inst.kappa * std::pow(inst.cpu_hz, 3) * inst.gain;

  // Case 2: full CPU, power below its limit.
  const double x2_full_cpu = upper_x2(inst);
  const double case2 = comm_multiplier(inst, x2_full_cpu) - kc3h;
  if (case2 > 0.0) return finish(inst, 1.0, x2_full_cpu, 2, false);

  // Case 3: full power, CPU below its limit.
  const double y1 = y_of(inst, v1);
  const double t_left = inst.t_max_s - inst.gradient_bits * v1;
  const double case3 =
      -excess(y1 * kLn2) +
      2.0 * inst.kappa * std::pow(inst.mu_cycles * inst.beta, 3) * inst.gain / std::pow(t_left, 3);
  if (case3 > 0.0) return finish(inst, x1_on_constraint(inst, v1), v1, 3, true);

  const auto [x1, x2] = case4_root(inst);
  return finish(inst, x1, x2, 4, false);
}

AllocationResult oracle(const AllocationInstance& inst, std::size_t grid_size) {
  validate(inst);
  if (!feasible(inst)) throw std::invalid_argument("oracle: infeasible instance");
  if (grid_size < 2) grid_size = 2;

  const double lo = upsilon1(inst);
  const double hi = std::max(lo, upper_x2(inst));
  auto energy = [&](double x2) { return objective_x(inst, x1_on_constraint(inst, x2), x2); };

  if (hi - lo <= 0.0) return finish(inst, std::max(1.0, x1_on_constraint(inst, lo)), lo, 0, true);

  const double step = (hi - lo) / static_cast<double>(grid_size);
  std::size_t best = 0;
  double best_e = energy(lo);
  for (std::size_t i = 1; i <= grid_size; ++i) {
    const double x = i == grid_size ? hi : lo + step * static_cast<double>(i);
    const double e = energy(x);
    if (e < best_e) {
      best_e = e;
      best = i;
    }
  }

  double a = best == 0 ? lo : lo + step * static_cast<double>(best - 1);
  double b = best == grid_size ? hi : lo + step * static_cast<double>(best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = energy(c);
  double fd = energy(d);
  for (int iter = 0; iter < 200 && (b - a) > 1e-15 * b; ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = energy(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = energy(d);
    }
  }

  // Endpoints can win when the minimum sits on a bound.
  double x2 = 0.5 * (a + b);
  double e = energy(x2);
  for (double cand : {lo, hi, lo + step * static_cast<double>(best)}) {
    const double ec = energy(cand);
    if (ec < e) {
      e = ec;
      x2 = cand;
    }
  }
  const bool at_lo = x2 == lo;
  return finish(inst, std::max(1.0, x1_on_constraint(inst, x2)), x2, 0, at_lo);
}

AllocationResult baseline_fixed(const AllocationInstance& inst, double tau0, double alpha0) {
  validate(inst);
  if (!(tau0 > 0.0 && tau0 <= 1.0) || !(alpha0 > 0.0 && alpha0 <= 1.0)) {
    throw std::invalid_argument("baseline_fixed: coefficients must lie in (0, 1]");
  }
  AllocationResult r;
  r.tau = tau0;
  r.alpha = alpha0;
  r.x1 = 1.0 / tau0;
  const double rate = inst.bandwidth_hz * std::log1p(alpha0 * inst.power_w * inst.gain) / kLn2;
  r.x2 = 1.0 / rate;
  r.t_cp = inst.full_compute_time() / tau0;
  r.t_cm = inst.gradient_bits / rate;
  const double freq = tau0 * inst.cpu_hz;
  r.e_cp = inst.kappa * inst.mu_cycles * inst.beta * freq * freq;
  r.e_cm = alpha0 * inst.power_w * r.t_cm;
  r.e_total = r.e_cp + r.e_cm;
  r.feasible = r.t_cp + r.t_cm <= inst.t_max_s;
  return r;
}

AllocationResult allocate(const AllocationInstance& inst, AllocationMode mode) {
  switch (mode) {
    case AllocationMode::kkt: return solve(inst);
    case AllocationMode::fra1: return baseline_fixed(inst, 0.5, 0.5);
    case AllocationMode::fra2: return baseline_fixed(inst, 1.0, 1.0);
  }
  return solve(inst);
}

}  // namespace aoifl
