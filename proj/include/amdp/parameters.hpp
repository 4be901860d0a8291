#pragma once

#include "amdp/chain.hpp"
#include "amdp/solvers.hpp"

namespace amdp {

/// Diameter, mixing time and optimal bias span of one MDP.
struct MdpParameters {
  double diameter = kInfinity;
  double t_mix = kInfinity;
  double H = 0.0;
  bool h_le_diameter = true;
  bool h_le_8tmix = true;
};

inline constexpr double kParameterTolerance = 1e-6;

inline MdpParameters structural_parameters(const TabularMdp& m, const AmdpOptimum& opt,
                                           const MixingOptions& mix = {}) {
  MdpParameters p;
  p.diameter = diameter(m);
  p.t_mix = mixing_time(m, mix);
  p.H = opt.H;
  p.h_le_diameter = p.H <= p.diameter + kParameterTolerance;
  p.h_le_8tmix = p.H <= 8.0 * p.t_mix + kParameterTolerance;
  return p;
}

inline MdpParameters structural_parameters(const TabularMdp& m, const MixingOptions& mix = {}) {
  return structural_parameters(m, amdp_optimal_auto(m), mix);
}

}  // namespace amdp
