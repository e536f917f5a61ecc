#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aoifl/kkt.hpp"
#include "aoifl/rng.hpp"
#include "aoifl/wireless.hpp"

namespace aoifl {

/// Energy of a (sub-channel, device) pair; std::nullopt marks a pair that
/// cannot meet the time limit. Infeasible compares above every finite value.
using PairEnergy = std::optional<double>;

/// U[k][n] for sub-channel k (rows) and device column n.
///
/// Columns index the selected devices in the order given to build_table, not
/// global device ids. After padded(), extra columns are virtual devices with
/// zero energy everywhere and extra rows are virtual sub-channels that are
/// infeasible for every real device.
class EnergyTable {
 public:
  EnergyTable() = default;
  EnergyTable(std::size_t channels, std::size_t devices);

  static EnergyTable from_rows(const std::vector<std::vector<PairEnergy>>& rows);

  std::size_t channels() const { return channels_; }
  std::size_t devices() const { return devices_; }
  std::size_t real_channels() const { return real_channels_; }
  std::size_t real_devices() const { return real_devices_; }
  bool is_square() const { return channels_ == devices_; }
  bool is_pad_device(std::size_t n) const { return n >= real_devices_; }
  bool is_pad_channel(std::size_t k) const { return k >= real_channels_; }

  const PairEnergy& at(std::size_t k, std::size_t n) const { return cells_[k * devices_ + n]; }
  void set(std::size_t k, std::size_t n, PairEnergy value) { cells_[k * devices_ + n] = value; }

  /// Square copy padded with virtual devices or sub-channels.
  EnergyTable padded() const;

 private:
  std::size_t channels_ = 0;
  std::size_t devices_ = 0;
  std::size_t real_channels_ = 0;
  std::size_t real_devices_ = 0;
  std::vector<PairEnergy> cells_;
};

/// One-to-one assignment on a square table: channel_of[n] is the sub-channel
/// of device column n.
struct Matching {
  std::vector<std::size_t> channel_of;

  std::size_t size() const { return channel_of.size(); }
  bool is_valid() const;
  friend bool operator==(const Matching&, const Matching&) = default;
};

/// Total over real devices, ordered first by how many sit on an infeasible
/// pair, then by the finite energy sum.
struct MatchingCost {
  std::size_t infeasible = 0;
  double energy = 0.0;

  friend auto operator<=>(const MatchingCost&, const MatchingCost&) = default;
};

struct MatchingRun {
  Matching matching;
  std::size_t iterations = 0;          // full cycles, including the final quiet one
  std::size_t pair_evaluations = 0;    // blocking-pair tests performed
  std::vector<MatchingCost> trace;     // initial cost, then one entry per accepted swap
  std::vector<MatchingCost> cycle_costs;  // cost after each full cycle
};

struct PairAssignment {
  std::size_t device = 0;   // table column
  std::size_t channel = 0;  // table row
  double energy = 0.0;
};

/// U[k][n] = allocate(device selected[n] on sub-channel k).e_total, or
/// infeasible when that allocation is infeasible.
EnergyTable build_table(std::span<const std::size_t> selected, const ChannelState& channels,
                        std::span<const DeviceProfile> profiles, const SystemParams& params,
                        AllocationMode mode = AllocationMode::kkt);

bool strictly_better(const PairEnergy& a, const PairEnergy& b);
bool not_worse(const PairEnergy& a, const PairEnergy& b);

MatchingCost total_cost(const EnergyTable& table, const Matching& matching);

Matching random_matching(std::size_t size, Rng& rng);

/// Exchanges the sub-channels of device columns n and n_prime.
Matching swap(const Matching& matching, std::size_t n, std::size_t n_prime);

/// True iff exchanging n and n_prime lowers the energy of at least one of
/// them and raises neither.
bool is_blocking_pair(const EnergyTable& table, const Matching& matching, std::size_t n,
                      std::size_t n_prime);

/// Swap matching from a seeded random start. Devices are visited in
/// ascending order each cycle; each accepts its first blocking partner (also
/// scanned in ascending order). Stops after a cycle without swaps.
MatchingRun run_matching(const EnergyTable& table, Rng& rng);
MatchingRun run_matching_from(const EnergyTable& table, Matching initial);

/// True iff no pair of devices is swap-blocking.
bool stability_check(const EnergyTable& table, const Matching& matching);

inline constexpr std::size_t kExhaustiveLimit = 8;

/// Best of all permutations: fewest real devices on infeasible pairs, then
/// least energy; ties keep the lexicographically first permutation.
Matching exhaustive_matching(const EnergyTable& table);

/// Real devices on real sub-channels with a finite energy, by device column.
std::vector<PairAssignment> prune(const Matching& matching, const EnergyTable& table);

}  // namespace aoifl
