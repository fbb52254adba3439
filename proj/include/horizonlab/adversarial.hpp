#pragma once

#include <cstdint>

#include "horizonlab/env.hpp"

namespace horizonlab {

struct GreedyTrapParams {
    double M = 1.0;   // delayed reward behind the low-scored action
    int horizon = 2;  // episode horizon, >= 2
};

struct BeamTrapParams {
    int beam_width_B = 8; // the beam width the construction defeats
    double M = 1.0;
    int horizon = 2;
};

struct LookaheadChainParams {
    int k = 1;            // lookahead depth the construction defeats
    int horizon_H = 2;    // episode horizon, > k
    double R_max = 1.0;   // reward paid at the end of each good segment
};

/// A constructed environment together with its analytically known optimum.
struct AdversarialInstance {
    Environment env;
    double optimal_return = 0.0;
};

/// s0 offers `a` (u=1) and `b` (u=0). Both lead through a single action into
/// an absorbing zero-reward state; only the step after `b` pays M.
AdversarialInstance make_greedy_trap(const GreedyTrapParams& p);

/// s0 offers the good action `g` (u=0, index 0) and B+1 decoys (u=1). Only
/// the state behind `g` pays M on its single onward action.
AdversarialInstance make_beam_trap(const BeamTrapParams& p);

/// N = floor((H-1)/(k+1)) segments. In each, `g` and `d` start k-step
/// zero-reward chains; at the (k+1)-th transition `g` pays R_max. u favours d.
AdversarialInstance make_lookahead_chain(const LookaheadChainParams& p);

int lookahead_chain_segments(const LookaheadChainParams& p);

/// Maximum return over every trajectory of at most episode_horizon steps.
/// Exhaustive; intended for environments with a modest number of trajectories.
double brute_force_optimal_return(const Environment& env, std::uint64_t max_trajectories = 50'000'000);

} // namespace horizonlab
