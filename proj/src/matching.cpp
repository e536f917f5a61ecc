#include "aoifl/matching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aoifl {

EnergyTable::EnergyTable(std::size_t channels, std::size_t devices)
    : channels_(channels),
      devices_(devices),
      real_channels_(channels),
      real_devices_(devices),
      cells_(channels * devices) {}

EnergyTable EnergyTable::from_rows(const std::vector<std::vector<PairEnergy>>& rows) {
  const std::size_t k = rows.size();
  const std::size_t n = k == 0 ? 0 : rows.front().size();
  EnergyTable t(k, n);
  for (std::size_t r = 0; r < k; ++r) {
    if (rows[r].size() != n) throw std::invalid_argument("EnergyTable: ragged rows");
    for (std::size_t c = 0; c < n; ++c) {
      if (rows[r][c] && !(*rows[r][c] >= 0.0)) {
        throw std::invalid_argument("EnergyTable: energies must be non-negative");
      }
      t.set(r, c, rows[r][c]);
    }
  }
  return t;
}

EnergyTable EnergyTable::padded() const {
  const std::size_t size = std::max(channels_, devices_);
  EnergyTable out(size, size);
  out.real_channels_ = real_channels_;
  out.real_devices_ = real_devices_;
  for (std::size_t k = 0; k < size; ++k) {
    for (std::size_t n = 0; n < size; ++n) {
      if (k < channels_ && n < devices_) {
        out.set(k, n, at(k, n));
      } else if (n >= devices_) {
        out.set(k, n, 0.0);  // virtual device
      }  // else: real device on a virtual sub-channel stays infeasible
    }
  }
  return out;
}

bool Matching::is_valid() const {
  std::vector<bool> seen(channel_of.size(), false);
  for (std::size_t k : channel_of) {
    if (k >= channel_of.size() || seen[k]) return false;
    seen[k] = true;
  }
  return true;
}

EnergyTable build_table(std::span<const std::size_t> selected, const ChannelState& channels,
                        std::span<const DeviceProfile> profiles, const SystemParams& params,
                        AllocationMode mode) {
  EnergyTable table(channels.subchannels(), selected.size());
  for (std::size_t k = 0; k < channels.subchannels(); ++k) {
    for (std::size_t n = 0; n < selected.size(); ++n) {
      const std::size_t id = selected[n];
      if (id >= profiles.size() || id >= channels.devices()) {
        throw std::out_of_range("build_table: device id out of range");
      }
      const auto r = allocate(make_instance(profiles[id], channels.at(k, id), params), mode);
      if (r.feasible) table.set(k, n, r.e_total);
    }
  }
  return table;
}

bool strictly_better(const PairEnergy& a, const PairEnergy& b) {
  if (!a) return false;
  if (!b) return true;
  return *a < *b;
}

bool not_worse(const PairEnergy& a, const PairEnergy& b) {
  if (!b) return true;
  if (!a) return false;
  return *a <= *b;
}

MatchingCost total_cost(const EnergyTable& table, const Matching& matching) {
  MatchingCost cost;
  for (std::size_t n = 0; n < matching.size(); ++n) {
    if (table.is_pad_device(n)) continue;
    const auto& e = table.at(matching.channel_of[n], n);
    if (e) {
      cost.energy += *e;
    } else {
      ++cost.infeasible;
    }
  }
  return cost;
}

Matching random_matching(std::size_t size, Rng& rng) { return Matching{rng.permutation(size)}; }

Matching swap(const Matching& matching, std::size_t n, std::size_t n_prime) {
  if (n >= matching.size() || n_prime >= matching.size()) {
    throw std::out_of_range("swap: device is not matched");
  }
  Matching out = matching;
  std::swap(out.channel_of[n], out.channel_of[n_prime]);
  return out;
}

bool is_blocking_pair(const EnergyTable& table, const Matching& matching, std::size_t n,
                      std::size_t n_prime) {
  if (n >= matching.size() || n_prime >= matching.size()) {
    throw std::out_of_range("is_blocking_pair: device is not matched");
  }
  if (n == n_prime) return false;
  const std::size_t k = matching.channel_of[n];
  const std::size_t k_prime = matching.channel_of[n_prime];
  const auto& before_n = table.at(k, n);
  const auto& before_p = table.at(k_prime, n_prime);
  const auto& after_n = table.at(k_prime, n);
  const auto& after_p = table.at(k, n_prime);
  if (!not_worse(after_n, before_n) || !not_worse(after_p, before_p)) return false;
  return strictly_better(after_n, before_n) || strictly_better(after_p, before_p);
}

MatchingRun run_matching_from(const EnergyTable& table, Matching initial) {
  if (!table.is_square()) throw std::invalid_argument("run_matching: table must be square");
  if (initial.size() != table.devices() || !initial.is_valid()) {
    throw std::invalid_argument("run_matching: initial matching does not fit the table");
  }
  MatchingRun run;
  run.matching = std::move(initial);
  run.trace.push_back(total_cost(table, run.matching));

  const std::size_t size = table.devices();
  bool changed = true;
  while (changed) {
    changed = false;
    ++run.iterations;
    for (std::size_t n = 0; n < size; ++n) {
      for (std::size_t n_prime = 0; n_prime < size; ++n_prime) {
        if (n_prime == n) continue;
        ++run.pair_evaluations;
        if (is_blocking_pair(table, run.matching, n, n_prime)) {
          run.matching = swap(run.matching, n, n_prime);
          run.trace.push_back(total_cost(table, run.matching));
          changed = true;
          break;
        }
      }
    }
    run.cycle_costs.push_back(total_cost(table, run.matching));
  }
  return run;
}

MatchingRun run_matching(const EnergyTable& table, Rng& rng) {
  if (!table.is_square()) throw std::invalid_argument("run_matching: table must be square");
  return run_matching_from(table, random_matching(table.devices(), rng));
}

bool stability_check(const EnergyTable& table, const Matching& matching) {
  for (std::size_t n = 0; n < matching.size(); ++n) {
    for (std::size_t n_prime = 0; n_prime < matching.size(); ++n_prime) {
      if (is_blocking_pair(table, matching, n, n_prime)) return false;
    }
  }
  return true;
}

Matching exhaustive_matching(const EnergyTable& table) {
  if (!table.is_square()) throw std::invalid_argument("exhaustive_matching: table must be square");
  if (table.devices() > kExhaustiveLimit) {
    throw std::invalid_argument("exhaustive_matching: at most 8 devices supported");
  }
  Matching current{std::vector<std::size_t>(table.devices())};
  std::iota(current.channel_of.begin(), current.channel_of.end(), std::size_t{0});
  Matching best = current;
  MatchingCost best_cost = total_cost(table, best);
  while (std::next_permutation(current.channel_of.begin(), current.channel_of.end())) {
    const MatchingCost c = total_cost(table, current);
    if (c < best_cost) {
      best_cost = c;
      best = current;
    }
  }
  return best;
}

std::vector<PairAssignment> prune(const Matching& matching, const EnergyTable& table) {
  std::vector<PairAssignment> out;
  for (std::size_t n = 0; n < matching.size(); ++n) {
    if (table.is_pad_device(n)) continue;
    const std::size_t k = matching.channel_of[n];
    if (table.is_pad_channel(k)) continue;
    const auto& e = table.at(k, n);
    if (e) out.push_back({n, k, *e});
  }
  return out;
}

}  // namespace aoifl
