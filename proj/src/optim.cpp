#include "mardpg/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mardpg {

ParamViews views_of(Mlp& net, const std::string& prefix) {
    ParamViews out;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        const std::string base = prefix + ".l" + std::to_string(l);
        out.push_back({base + ".w", layer.w.data.data(), layer.w.rows, layer.w.cols});
        out.push_back({base + ".b", layer.b.data(), static_cast<int>(layer.b.size()), 1});
    }
    return out;
}

ParamViews views_of(MlpGrads& g, const std::string& prefix) {
    ParamViews out;
    for (std::size_t l = 0; l < g.layers.size(); ++l) {
        auto& layer = g.layers[l];
        const std::string base = prefix + ".l" + std::to_string(l);
        out.push_back({base + ".w", layer.dw.data.data(), layer.dw.rows, layer.dw.cols});
        out.push_back({base + ".b", layer.db.data(), static_cast<int>(layer.db.size()), 1});
    }
    return out;
}

ParamViews views_of(LstmParams& p, const std::string& prefix) {
    ParamViews out;
    Matrix* ws[] = {&p.wi, &p.wf, &p.wg, &p.wo};
    Vec* bs[] = {&p.bi, &p.bf, &p.bg, &p.bo};
    const char* gate[] = {"i", "f", "g", "o"};
    for (int k = 0; k < 4; ++k) {
        out.push_back({prefix + ".w" + gate[k], ws[k]->data.data(), ws[k]->rows, ws[k]->cols});
        out.push_back({prefix + ".b" + gate[k], bs[k]->data(), static_cast<int>(bs[k]->size()), 1});
    }
    return out;
}

ParamViews views_of(LstmGrads& g, const std::string& prefix) {
    ParamViews out;
    Matrix* ws[] = {&g.dwi, &g.dwf, &g.dwg, &g.dwo};
    Vec* bs[] = {&g.dbi, &g.dbf, &g.dbg, &g.dbo};
    const char* gate[] = {"i", "f", "g", "o"};
    for (int k = 0; k < 4; ++k) {
        out.push_back({prefix + ".w" + gate[k], ws[k]->data.data(), ws[k]->rows, ws[k]->cols});
        out.push_back({prefix + ".b" + gate[k], bs[k]->data(), static_cast<int>(bs[k]->size()), 1});
    }
    return out;
}

ParamViews join(std::vector<ParamViews> groups) {
    ParamViews out;
    for (auto& g : groups) {
        out.insert(out.end(), g.begin(), g.end());
    }
    return out;
}

double l2_norm(const ParamViews& views) {
    double s = 0.0;
    for (const auto& v : views) {
        for (std::size_t i = 0; i < v.size(); ++i) s += v.data[i] * v.data[i];
    }
    return std::sqrt(s);
}

void RmsProp::step(const ParamViews& params, const ParamViews& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("RmsProp::step: " + std::to_string(params.size()) +
                                    " parameter arrays vs " + std::to_string(grads.size()) +
                                    " gradient arrays");
    }
    for (std::size_t a = 0; a < params.size(); ++a) {
        if (params[a].size() != grads[a].size()) {
            throw std::invalid_argument("RmsProp::step: shape mismatch in array " +
                                        params[a].name);
        }
    }
    // Scan before mutating anything so a bad gradient leaves state untouched.
    for (std::size_t a = 0; a < grads.size(); ++a) {
        for (std::size_t i = 0; i < grads[a].size(); ++i) {
            if (!std::isfinite(grads[a].data[i])) {
                throw std::runtime_error("RmsProp::step: non-finite gradient in " + grads[a].name +
                                         " at index " + std::to_string(i));
            }
        }
    }
    if (ms.empty()) {
        ms.resize(params.size());
        for (std::size_t a = 0; a < params.size(); ++a) ms[a].assign(params[a].size(), 0.0);
    }
    if (ms.size() != params.size()) {
        throw std::invalid_argument("RmsProp::step: optimizer state bound to a different shape");
    }
    for (std::size_t a = 0; a < params.size(); ++a) {
        for (std::size_t i = 0; i < params[a].size(); ++i) {
            const double g = grads[a].data[i];
            ms[a][i] = decay * ms[a][i] + (1.0 - decay) * g * g;
            params[a].data[i] -= lr * g / std::sqrt(ms[a][i] + eps);
        }
    }
}

}  // namespace mardpg
