#pragma once

#include <string>
#include <vector>

#include "mardpg/nn.hpp"
#include "mardpg/vec.hpp"

namespace mardpg {

// Named flat view over one trainable array. Networks expose their parameters
// (and gradient stores expose matching views in the same order) so the
// optimizer, gradient checker and checkpoint code can treat every network
// uniformly.
struct ParamView {
    std::string name;
    double* data = nullptr;
    int rows = 0;
    int cols = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

using ParamViews = std::vector<ParamView>;

ParamViews views_of(Mlp& net, const std::string& prefix);
ParamViews views_of(MlpGrads& g, const std::string& prefix);
ParamViews views_of(LstmParams& p, const std::string& prefix);
ParamViews views_of(LstmGrads& g, const std::string& prefix);

ParamViews join(std::vector<ParamViews> groups);

double l2_norm(const ParamViews& views);

// RMSProp: ms <- decay*ms + (1-decay)*g^2; p <- p - lr*g/sqrt(ms+eps).
// A non-finite gradient entry rejects the whole step (the accumulator and the
// parameters are left untouched) and reports the offending array and index.
struct RmsProp {
    double lr = 1e-3;
    double decay = 0.9;
    double eps = 1e-8;
    std::vector<std::vector<double>> ms;

    void step(const ParamViews& params, const ParamViews& grads);
};

}  // namespace mardpg
