#include "mardpg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mardpg {

GradCheckReport grad_check(const std::function<double()>& loss, const ParamViews& params,
                           const ParamViews& analytic, double fd_step) {
    if (params.size() != analytic.size()) {
        throw std::invalid_argument("grad_check: parameter/gradient array count mismatch");
    }
    GradCheckReport report;
    for (std::size_t a = 0; a < params.size(); ++a) {
        if (params[a].size() != analytic[a].size()) {
            throw std::invalid_argument("grad_check: shape mismatch in " + params[a].name);
        }
        GradCheckBlock block;
        block.name = params[a].name;
        for (std::size_t i = 0; i < params[a].size(); ++i) {
            double& p = params[a].data[i];
            const double saved = p;
            p = saved + fd_step;
            const double up = loss();
            p = saved - fd_step;
            const double down = loss();
            p = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw std::runtime_error("grad_check: non-finite loss while perturbing " +
                                         params[a].name + "[" + std::to_string(i) + "]");
            }
            const double numeric = (up - down) / (2.0 * fd_step);
            const double an = analytic[a].data[i];
            const double rel =
                std::abs(an - numeric) / std::max(1e-8, std::abs(an) + std::abs(numeric));
            block.max_rel_err = std::max(block.max_rel_err, rel);
        }
        report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
        report.blocks.push_back(std::move(block));
    }
    return report;
}

}  // namespace mardpg
