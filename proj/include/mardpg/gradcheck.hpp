#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mardpg/optim.hpp"

namespace mardpg {

struct GradCheckBlock {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    double max_rel_err = 0.0;

    bool pass(double tol) const { return max_rel_err < tol; }
};

// Compares analytic gradients against central finite differences of a scalar
// loss. `loss` must be deterministic and read the parameters through the same
// storage `params` views point at; `analytic` must hold the gradient evaluated
// at the unperturbed point. Relative error is |a-n| / max(1e-8, |a|+|n|).
// A non-finite loss during perturbation aborts the check.
GradCheckReport grad_check(const std::function<double()>& loss, const ParamViews& params,
                           const ParamViews& analytic, double fd_step = 1e-5);

}  // namespace mardpg
