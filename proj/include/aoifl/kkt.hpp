#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "aoifl/wireless.hpp"

namespace aoifl {

/// Data of the single-device energy minimization on one sub-channel.
struct AllocationInstance {
  double cpu_hz = 1e9;       // C
  double power_w = 0.01;     // P
  double beta = 1.0;         // local samples
  double gain = 1.0;         // |h|^2, normalized
  double bandwidth_hz = 1e6; // B
  double gradient_bits = 1e6;// D
  double kappa = 1e-29;
  double mu_cycles = 1e6;
  double t_max_s = 1.0;

  /// mu beta / C: training time at full CPU.
  double full_compute_time() const { return mu_cycles * beta / cpu_hz; }
};

AllocationInstance make_instance(const DeviceProfile& device, double gain,
                                 const SystemParams& params);

/// Allocation expressed both in coefficients (tau, alpha) and in the
/// substituted variables x1 = 1/tau, x2 = 1/(B log2(1 + alpha P |h|^2)).
/// case_id is 1-4 for the closed-form branches and 0 when the result did not
/// come from the case analysis (oracle, fixed baselines, infeasible).
struct AllocationResult {
  bool feasible = false;
  double tau = 0.0;
  double alpha = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double t_cp = 0.0;
  double t_cm = 0.0;
  double e_cp = 0.0;
  double e_cm = 0.0;
  double e_total = 0.0;
  int case_id = 0;
};

enum class AllocationMode { kkt, fra1, fra2 };

std::string to_string(AllocationMode mode);
AllocationMode parse_allocation_mode(const std::string& text);

/// Relative tolerance for the Case 1 equality test.
inline constexpr double kCaseOneTolerance = 1e-9;

/// 1 / (B log2(1 + P |h|^2)): the smallest x2, reached at alpha = 1.
double upsilon1(const AllocationInstance& inst);

/// True iff mu beta / C + D upsilon1 <= T_max.
bool feasible(const AllocationInstance& inst);

/// Energy at a point of the substituted problem.
double objective_x(const AllocationInstance& inst, double x1, double x2);

/// Difference of the two sides of the interior stationarity condition,
///   2 kappa C^3 / x1^3 - (ln2 2^y y - (2^y - 1)) / |h|^2,  y = 1 / (B x2),
/// divided by the larger side. Zero at a Case 4 optimum.
double stationarity_residual(const AllocationInstance& inst, double x1, double x2);

/// Closed-form optimum. Infeasible instances come back with feasible = false
/// and infinite energy.
AllocationResult solve(const AllocationInstance& inst);

/// Interior root when none of Cases 1-3 applies: bisection on x2 over
/// (upsilon1, (T_max - mu beta / C) / D) run to floating-point resolution,
/// x1 then follows from the active time constraint.
/// Throws std::domain_error when the bracket has no sign change.
std::pair<double, double> case4_root(const AllocationInstance& inst);

/// Brute-force reference: with the time constraint binding, minimizes the
/// energy over x2 alone on a uniform grid of `grid_size` intervals, then
/// refines around the best grid point by golden-section search.
/// Throws std::invalid_argument on infeasible instances.
AllocationResult oracle(const AllocationInstance& inst, std::size_t grid_size = 1000);

/// Times and energies at fixed coefficients; feasible iff the time limit holds.
AllocationResult baseline_fixed(const AllocationInstance& inst, double tau0, double alpha0);

/// Dispatch on mode: kkt -> solve, fra1 -> (0.5, 0.5), fra2 -> (1, 1).
AllocationResult allocate(const AllocationInstance& inst, AllocationMode mode);

}  // namespace aoifl
