#pragma once

#include <random>
#include <vector>

#include "mardpg/vec.hpp"

namespace mardpg {

enum class Act { linear, relu, softmax };

struct DenseLayer {
    Matrix w;  // out_dim x in_dim
    Vec b;     // out_dim
    Act act = Act::linear;

    int in_dim() const { return w.cols; }
    int out_dim() const { return w.rows; }
};

// Plain feed-forward stack. Dimensions are fixed at construction and chained
// layer to layer; forward caches everything backward needs.
struct Mlp {
    std::vector<DenseLayer> layers;

    int in_dim() const { return layers.front().in_dim(); }
    int out_dim() const { return layers.back().out_dim(); }
};

struct MlpTape {
    Vec input;
    std::vector<Vec> pre;   // z_l = W_l x_l + b_l
    std::vector<Vec> post;  // y_l = act_l(z_l)
};

struct DenseGrads {
    Matrix dw;
    Vec db;
};

struct MlpGrads {
    std::vector<DenseGrads> layers;
    int count = 0;  // accumulated samples since last zero()

    void zero();
    void add(const MlpGrads& other);
    void scale(double s);
};

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Act>& acts);
MlpGrads make_grads(const Mlp& net);

// Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))), zero biases.
void init_glorot(Mlp& net, std::mt19937_64& rng);

Vec mlp_forward(const Mlp& net, const Vec& x, MlpTape* tape = nullptr);

// Forward pass that skips the final layer's activation. Used for exploration
// noise injected on pre-softmax logits.
Vec mlp_logits(const Mlp& net, const Vec& x);

// Accumulates parameter gradients into `grads` (adds, does not overwrite) and
// returns dL/dx. The tape must come from a matching mlp_forward call.
Vec mlp_backward(const Mlp& net, const MlpTape& tape, const Vec& dl_dy, MlpGrads& grads);

// Numerically stable softmax (max subtraction); strictly positive, sums to 1.
Vec softmax(const Vec& z);

// ---------------------------------------------------------------------------
// LSTM cell. Gate input is the concatenation [x; h_prev]:
//   i = sigmoid(Wi [x;h] + bi)     f = sigmoid(Wf [x;h] + bf)
//   g = tanh   (Wg [x;h] + bg)     o = sigmoid(Wo [x;h] + bo)
//   c' = f * c + i * g             h' = o * tanh(c')
// ---------------------------------------------------------------------------

struct LstmParams {
    Matrix wi, wf, wg, wo;  // hidden x (input + hidden)
    Vec bi, bf, bg, bo;     // hidden

    int hidden_dim() const { return wi.rows; }
    int input_dim() const { return wi.cols - wi.rows; }
};

struct LstmTape {
    Vec xh;  // [x; h_prev]
    Vec c_prev;
    Vec i, f, g, o;
    Vec c, tanh_c;
};

struct LstmGrads {
    Matrix dwi, dwf, dwg, dwo;
    Vec dbi, dbf, dbg, dbo;
    int count = 0;

    void zero();
    void add(const LstmGrads& other);
    void scale(double s);
};

struct LstmBack {
    Vec dh_prev;
    Vec dc_prev;
    Vec dx;
};

LstmParams make_lstm(int input_dim, int hidden_dim);
LstmGrads make_grads(const LstmParams& p);
void init_glorot(LstmParams& p, std::mt19937_64& rng);

void lstm_cell_forward(const LstmParams& p, const Vec& h_prev, const Vec& c_prev, const Vec& x,
                       Vec& h_out, Vec& c_out, LstmTape* tape = nullptr);

LstmBack lstm_cell_backward(const LstmParams& p, const LstmTape& t, const Vec& dl_dh,
                            const Vec& dl_dc, LstmGrads& grads);

}  // namespace mardpg
