#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mardpg {

struct GradSuiteBlock {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradSuiteResult {
    std::vector<GradSuiteBlock> blocks;
    double max_rel_err = 0.0;

    bool pass(double tol) const { return max_rel_err < tol; }
};

// Finite-difference verification of every gradient path the trainer relies
// on, at the default model dimensions: actor, critic, LSTM cell, the
// actor-into-critic chain, and the full BPTT communication objective over a
// length-5 episode. Repeats for `n_seeds` random instances and keeps the
// worst relative error per block. Prints one line per block when `out` is
// given.
GradSuiteResult run_gradient_suite(int n_seeds, uint64_t base_seed = 1,
                                   std::ostream* out = nullptr);

}  // namespace mardpg
