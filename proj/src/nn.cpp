#include "mardpg/nn.hpp"

#include <algorithm>
#include <cmath>

namespace mardpg {

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Vec affine(const Matrix& w, const Vec& b, const Vec& x) {
    Vec out(static_cast<std::size_t>(w.rows), 0.0);
    for (int r = 0; r < w.rows; ++r) {
        double s = b[static_cast<std::size_t>(r)];
        const double* row = &w.data[static_cast<std::size_t>(r) * w.cols];
        for (int c = 0; c < w.cols; ++c) s += row[c] * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
    return out;
}

Vec apply_act(Act act, const Vec& z) {
    switch (act) {
        case Act::linear:
            return z;
        case Act::relu: {
            Vec y = z;
            for (double& v : y) v = std::max(0.0, v);
            return y;
        }
        case Act::softmax:
            return softmax(z);
    }
    throw std::logic_error("apply_act: unknown activation");
}

// dL/dz from dL/dy given the layer's activation.
Vec act_backward(Act act, const Vec& z, const Vec& y, const Vec& dy) {
    switch (act) {
        case Act::linear:
            return dy;
        case Act::relu: {
            Vec dz(dy.size());
            for (std::size_t i = 0; i < dy.size(); ++i) dz[i] = z[i] > 0.0 ? dy[i] : 0.0;
            return dz;
        }
        case Act::softmax: {
            double inner = 0.0;
            for (std::size_t i = 0; i < dy.size(); ++i) inner += dy[i] * y[i];
            Vec dz(dy.size());
            for (std::size_t i = 0; i < dy.size(); ++i) dz[i] = y[i] * (dy[i] - inner);
            return dz;
        }
    }
    throw std::logic_error("act_backward: unknown activation");
}

}  // namespace

Vec softmax(const Vec& z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    Vec y(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        // Clamp the shifted logit so extreme spreads stay strictly positive
        // instead of underflowing to 0.
        y[i] = std::exp(std::max(z[i] - m, -700.0));
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Act>& acts) {
    if (dims.size() < 2) {
        throw std::invalid_argument("make_mlp: need at least one layer");
    }
    if (acts.size() != dims.size() - 1) {
        throw std::invalid_argument("make_mlp: layer count " + std::to_string(dims.size() - 1) +
                                    " != activation count " + std::to_string(acts.size()));
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] <= 0) {
            throw std::invalid_argument("make_mlp: dims[" + std::to_string(i) +
                                        "] must be positive");
        }
    }
    Mlp net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        layer.b.assign(static_cast<std::size_t>(dims[l + 1]), 0.0);
        layer.act = acts[l];
        net.layers.push_back(std::move(layer));
    }
    return net;
}

MlpGrads make_grads(const Mlp& net) {
    MlpGrads g;
    for (const auto& layer : net.layers) {
        DenseGrads dg;
        dg.dw = Matrix(layer.w.rows, layer.w.cols);
        dg.db.assign(layer.b.size(), 0.0);
        g.layers.push_back(std::move(dg));
    }
    return g;
}

void MlpGrads::zero() {
    for (auto& l : layers) {
        std::fill(l.dw.data.begin(), l.dw.data.end(), 0.0);
        std::fill(l.db.begin(), l.db.end(), 0.0);
    }
    count = 0;
}

void MlpGrads::add(const MlpGrads& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].dw.data.size(); ++i) {
            layers[l].dw.data[i] += other.layers[l].dw.data[i];
        }
        for (std::size_t i = 0; i < layers[l].db.size(); ++i) {
            layers[l].db[i] += other.layers[l].db[i];
        }
    }
    count += other.count;
}

void MlpGrads::scale(double s) {
    for (auto& l : layers) {
        for (double& v : l.dw.data) v *= s;
        for (double& v : l.db) v *= s;
    }
}

void init_glorot(Mlp& net, std::mt19937_64& rng) {
    for (auto& layer : net.layers) {
        const double bound = std::sqrt(6.0 / (layer.w.cols + layer.w.rows));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : layer.w.data) v = dist(rng);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

Vec mlp_forward(const Mlp& net, const Vec& x, MlpTape* tape) {
    if (tape) {
        tape->input = x;
        tape->pre.clear();
        tape->post.clear();
    }
    Vec cur = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        if (static_cast<int>(cur.size()) != layer.in_dim()) {
            throw std::invalid_argument("mlp_forward: layer " + std::to_string(l) + " expects " +
                                        std::to_string(layer.in_dim()) + " inputs, got " +
                                        std::to_string(cur.size()));
        }
        Vec z = affine(layer.w, layer.b, cur);
        Vec y = apply_act(layer.act, z);
        if (tape) {
            tape->pre.push_back(std::move(z));
            tape->post.push_back(y);
        }
        cur = std::move(y);
    }
    return cur;
}

Vec mlp_logits(const Mlp& net, const Vec& x) {
    Vec cur = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        if (static_cast<int>(cur.size()) != layer.in_dim()) {
            throw std::invalid_argument("mlp_logits: layer " + std::to_string(l) + " expects " +
                                        std::to_string(layer.in_dim()) + " inputs, got " +
                                        std::to_string(cur.size()));
        }
        Vec z = affine(layer.w, layer.b, cur);
        cur = (l + 1 == net.layers.size()) ? std::move(z) : apply_act(layer.act, z);
    }
    return cur;
}

Vec mlp_backward(const Mlp& net, const MlpTape& tape, const Vec& dl_dy, MlpGrads& grads) {
    const std::size_t n_layers = net.layers.size();
    if (tape.pre.size() != n_layers || tape.post.size() != n_layers ||
        grads.layers.size() != n_layers) {
        throw std::invalid_argument("mlp_backward: tape/grads do not match network shape");
    }
    if (dl_dy.size() != tape.post.back().size()) {
        throw std::invalid_argument("mlp_backward: cotangent length " +
                                    std::to_string(dl_dy.size()) + " != output length " +
                                    std::to_string(tape.post.back().size()));
    }
    Vec dy = dl_dy;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = net.layers[l];
        const Vec& in = (l == 0) ? tape.input : tape.post[l - 1];
        Vec dz = act_backward(layer.act, tape.pre[l], tape.post[l], dy);

        auto& g = grads.layers[l];
        for (int r = 0; r < layer.w.rows; ++r) {
            const double dzr = dz[static_cast<std::size_t>(r)];
            double* grow = &g.dw.data[static_cast<std::size_t>(r) * layer.w.cols];
            for (int c = 0; c < layer.w.cols; ++c) grow[c] += dzr * in[static_cast<std::size_t>(c)];
            g.db[static_cast<std::size_t>(r)] += dzr;
        }

        Vec dx(static_cast<std::size_t>(layer.w.cols), 0.0);
        for (int r = 0; r < layer.w.rows; ++r) {
            const double dzr = dz[static_cast<std::size_t>(r)];
            const double* row = &layer.w.data[static_cast<std::size_t>(r) * layer.w.cols];
            for (int c = 0; c < layer.w.cols; ++c) dx[static_cast<std::size_t>(c)] += row[c] * dzr;
        }
        dy = std::move(dx);
    }
    grads.count += 1;
    return dy;
}

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

LstmParams make_lstm(int input_dim, int hidden_dim) {
    if (input_dim <= 0 || hidden_dim <= 0) {
        throw std::invalid_argument("make_lstm: dims must be positive");
    }
    LstmParams p;
    const int cols = input_dim + hidden_dim;
    p.wi = Matrix(hidden_dim, cols);
    p.wf = Matrix(hidden_dim, cols);
    p.wg = Matrix(hidden_dim, cols);
    p.wo = Matrix(hidden_dim, cols);
    p.bi.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    p.bf.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    p.bg.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    p.bo.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    return p;
}

LstmGrads make_grads(const LstmParams& p) {
    LstmGrads g;
    g.dwi = Matrix(p.wi.rows, p.wi.cols);
    g.dwf = Matrix(p.wf.rows, p.wf.cols);
    g.dwg = Matrix(p.wg.rows, p.wg.cols);
    g.dwo = Matrix(p.wo.rows, p.wo.cols);
    g.dbi.assign(p.bi.size(), 0.0);
    g.dbf.assign(p.bf.size(), 0.0);
    g.dbg.assign(p.bg.size(), 0.0);
    g.dbo.assign(p.bo.size(), 0.0);
    return g;
}

void LstmGrads::zero() {
    for (Matrix* m : {&dwi, &dwf, &dwg, &dwo}) std::fill(m->data.begin(), m->data.end(), 0.0);
    for (Vec* v : {&dbi, &dbf, &dbg, &dbo}) std::fill(v->begin(), v->end(), 0.0);
    count = 0;
}

void LstmGrads::add(const LstmGrads& other) {
    const Matrix* src_m[] = {&other.dwi, &other.dwf, &other.dwg, &other.dwo};
    Matrix* dst_m[] = {&dwi, &dwf, &dwg, &dwo};
    for (int k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < dst_m[k]->data.size(); ++i) {
            dst_m[k]->data[i] += src_m[k]->data[i];
        }
    }
    const Vec* src_v[] = {&other.dbi, &other.dbf, &other.dbg, &other.dbo};
    Vec* dst_v[] = {&dbi, &dbf, &dbg, &dbo};
    for (int k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < dst_v[k]->size(); ++i) {
            (*dst_v[k])[i] += (*src_v[k])[i];
        }
    }
    count += other.count;
}

void LstmGrads::scale(double s) {
    for (Matrix* m : {&dwi, &dwf, &dwg, &dwo}) {
        for (double& v : m->data) v *= s;
    }
    for (Vec* v : {&dbi, &dbf, &dbg, &dbo}) {
        for (double& x : *v) x *= s;
    }
}

void init_glorot(LstmParams& p, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (p.wi.cols + p.wi.rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Matrix* m : {&p.wi, &p.wf, &p.wg, &p.wo}) {
        for (double& v : m->data) v = dist(rng);
    }
    for (Vec* v : {&p.bi, &p.bf, &p.bg, &p.bo}) std::fill(v->begin(), v->end(), 0.0);
}

void lstm_cell_forward(const LstmParams& p, const Vec& h_prev, const Vec& c_prev, const Vec& x,
                       Vec& h_out, Vec& c_out, LstmTape* tape) {
    const int hidden = p.hidden_dim();
    if (static_cast<int>(x.size()) != p.input_dim()) {
        throw std::invalid_argument("lstm_cell_forward: input length " + std::to_string(x.size()) +
                                    " != " + std::to_string(p.input_dim()));
    }
    if (static_cast<int>(h_prev.size()) != hidden || static_cast<int>(c_prev.size()) != hidden) {
        throw std::invalid_argument("lstm_cell_forward: state length mismatch, hidden dim is " +
                                    std::to_string(hidden));
    }

    Vec xh = concat(x, h_prev);
    Vec zi = affine(p.wi, p.bi, xh);
    Vec zf = affine(p.wf, p.bf, xh);
    Vec zg = affine(p.wg, p.bg, xh);
    Vec zo = affine(p.wo, p.bo, xh);

    Vec i(zi.size()), f(zf.size()), g(zg.size()), o(zo.size());
    for (std::size_t k = 0; k < zi.size(); ++k) {
        i[k] = stable_sigmoid(zi[k]);
        f[k] = stable_sigmoid(zf[k]);
        g[k] = std::tanh(zg[k]);
        o[k] = stable_sigmoid(zo[k]);
    }

    Vec c(static_cast<std::size_t>(hidden)), tanh_c(static_cast<std::size_t>(hidden)),
        h(static_cast<std::size_t>(hidden));
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = f[k] * c_prev[k] + i[k] * g[k];
        tanh_c[k] = std::tanh(c[k]);
        h[k] = o[k] * tanh_c[k];
    }

    if (tape) {
        tape->xh = std::move(xh);
        tape->c_prev = c_prev;
        tape->i = i;
        tape->f = f;
        tape->g = g;
        tape->o = o;
        tape->c = c;
        tape->tanh_c = tanh_c;
    }
    h_out = std::move(h);
    c_out = std::move(c);
}

LstmBack lstm_cell_backward(const LstmParams& p, const LstmTape& t, const Vec& dl_dh,
                            const Vec& dl_dc, LstmGrads& grads) {
    const int hidden = p.hidden_dim();
    const int input = p.input_dim();
    if (static_cast<int>(t.xh.size()) != input + hidden ||
        static_cast<int>(t.i.size()) != hidden) {
        throw std::invalid_argument("lstm_cell_backward: tape does not match parameter shape");
    }
    if (static_cast<int>(dl_dh.size()) != hidden || static_cast<int>(dl_dc.size()) != hidden) {
        throw std::invalid_argument("lstm_cell_backward: cotangent length mismatch");
    }

    Vec dzi(t.i.size()), dzf(t.i.size()), dzg(t.i.size()), dzo(t.i.size());
    Vec dc_prev(t.i.size());
    for (std::size_t k = 0; k < t.i.size(); ++k) {
        const double dh = dl_dh[k];
        const double dc_total = dl_dc[k] + dh * t.o[k] * (1.0 - t.tanh_c[k] * t.tanh_c[k]);
        const double d_o = dh * t.tanh_c[k];
        const double d_i = dc_total * t.g[k];
        const double d_f = dc_total * t.c_prev[k];
        const double d_g = dc_total * t.i[k];
        dzo[k] = d_o * t.o[k] * (1.0 - t.o[k]);
        dzi[k] = d_i * t.i[k] * (1.0 - t.i[k]);
        dzf[k] = d_f * t.f[k] * (1.0 - t.f[k]);
        dzg[k] = d_g * (1.0 - t.g[k] * t.g[k]);
        dc_prev[k] = dc_total * t.f[k];
    }

    Vec dxh(t.xh.size(), 0.0);
    const Vec* dz[] = {&dzi, &dzf, &dzg, &dzo};
    const Matrix* w[] = {&p.wi, &p.wf, &p.wg, &p.wo};
    Matrix* dw[] = {&grads.dwi, &grads.dwf, &grads.dwg, &grads.dwo};
    Vec* db[] = {&grads.dbi, &grads.dbf, &grads.dbg, &grads.dbo};
    for (int gate = 0; gate < 4; ++gate) {
        for (int r = 0; r < hidden; ++r) {
            const double dzr = (*dz[gate])[static_cast<std::size_t>(r)];
            const std::size_t off = static_cast<std::size_t>(r) * w[gate]->cols;
            double* dwrow = &dw[gate]->data[off];
            const double* wrow = &w[gate]->data[off];
            for (int c = 0; c < w[gate]->cols; ++c) {
                dwrow[c] += dzr * t.xh[static_cast<std::size_t>(c)];
                dxh[static_cast<std::size_t>(c)] += wrow[c] * dzr;
            }
            (*db[gate])[static_cast<std::size_t>(r)] += dzr;
        }
    }
    grads.count += 1;

    LstmBack back;
    back.dx = slice(dxh, 0, static_cast<std::size_t>(input));
    back.dh_prev = slice(dxh, static_cast<std::size_t>(input), static_cast<std::size_t>(hidden));
    back.dc_prev = std::move(dc_prev);
    return back;
}

}  // namespace mardpg
