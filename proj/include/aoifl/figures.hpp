#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aoifl/config.hpp"

namespace aoifl {

struct FigureOptions {
  std::size_t seeds = 5;
  std::size_t rounds = 0;  // 0 keeps the preset's round count
};

std::vector<std::string> figure_names();

/// Radio setting shared by the energy presets: N=10, K=4, T_max=5 s,
/// P=10 dBm, C=1 GHz, R=200 m, D=10 Mbit, no training.
ExperimentConfig radio_preset();

/// N=10, K=5 on an ideal channel, non-IID single-class shards.
ExperimentConfig divergence_preset(AggregationMode mode);

/// N=10, K=5, T_max=10 s, D=15 Mbit.
ExperimentConfig availability_preset(AssignmentMode mode);

struct Scheme {
  std::string name;
  AllocationMode allocation;
  AssignmentMode assignment;
};

/// KRA+MSA, FRA1+MSA, FRA2+MSA, KRA+RSA.
std::vector<Scheme> sweep_schemes();

/// Writes <out_dir>/<name>.csv (plus a sidecar for fig9) and returns the
/// paths. Throws std::invalid_argument for an unknown name.
std::vector<std::string> generate_figure(const std::string& name, const std::string& out_dir,
                                         const FigureOptions& options = {});

}  // namespace aoifl
