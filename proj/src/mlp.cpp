#include "gvd/mlp.hpp"

#include <cmath>

namespace gvd {

Mlp Mlp::init(int in, int hidden, int out, Rng & rng) {
    if (in < 1 || hidden < 1 || out < 1) {
        throw error(error_kind::config, "network dimensions must be positive");
    }
    Mlp net;
    double s1 = 1.0 / std::sqrt(double(in));
    double s2 = 1.0 / std::sqrt(double(hidden));
    net.w1 = Mat(hidden, in);
    for (int r = 0; r < hidden; ++r)
        for (int c = 0; c < in; ++c) net.w1(r, c) = s1 * rng.normal();
    net.b1 = Vec::Zero(hidden);
    net.w2 = Mat(out, hidden);
    for (int r = 0; r < out; ++r)
        for (int c = 0; c < hidden; ++c) net.w2(r, c) = s2 * rng.normal();
    net.b2 = Vec::Zero(out);
    return net;
}

Mlp Mlp::zeros_like(const Mlp & other) {
    Mlp net;
    net.w1 = Mat::Zero(other.w1.rows(), other.w1.cols());
    net.b1 = Vec::Zero(other.b1.size());
    net.w2 = Mat::Zero(other.w2.rows(), other.w2.cols());
    net.b2 = Vec::Zero(other.b2.size());
    return net;
}

Vec Mlp::forward(const Vec & x) const {
    Vec hidden;
    return forward(x, hidden);
}

Vec Mlp::forward(const Vec & x, Vec & hidden_out) const {
    hidden_out = (w1 * x + b1).array().tanh();
    return w2 * hidden_out + b2;
}

Vec Mlp::backward(const Vec & x, const Vec & hidden, const Vec & d_out, Mlp & grad) const {
    grad.w2.noalias() += d_out * hidden.transpose();
    grad.b2 += d_out;
    Vec d_hidden = (w2.transpose() * d_out).array() * (1.0 - hidden.array().square());
    grad.w1.noalias() += d_hidden * x.transpose();
    grad.b1 += d_hidden;
    return w1.transpose() * d_hidden;
}

void Mlp::add_scaled(const Mlp & g, double scale) {
    w1 += scale * g.w1;
    b1 += scale * g.b1;
    w2 += scale * g.w2;
    b2 += scale * g.b2;
}

void Mlp::scale(double s) {
    w1 *= s;
    b1 *= s;
    w2 *= s;
    b2 *= s;
}

void Mlp::set_zero() {
    w1.setZero();
    b1.setZero();
    w2.setZero();
    b2.setZero();
}

int Mlp::param_count() const {
    return int(w1.size() + b1.size() + w2.size() + b2.size());
}

Vec Mlp::flat_params() const {
    Vec p(param_count());
    int at = 0;
    for (int c = 0; c < w1.cols(); ++c)
        for (int r = 0; r < w1.rows(); ++r) p(at++) = w1(r, c);
    for (int r = 0; r < b1.size(); ++r) p(at++) = b1(r);
    for (int c = 0; c < w2.cols(); ++c)
        for (int r = 0; r < w2.rows(); ++r) p(at++) = w2(r, c);
    for (int r = 0; r < b2.size(); ++r) p(at++) = b2(r);
    return p;
}

void Mlp::set_flat_params(const Vec & p) {
    if (p.size() != param_count()) {
        throw error(error_kind::dimension, "flat parameter vector has wrong length");
    }
    int at = 0;
    for (int c = 0; c < w1.cols(); ++c)
        for (int r = 0; r < w1.rows(); ++r) w1(r, c) = p(at++);
    for (int r = 0; r < b1.size(); ++r) b1(r) = p(at++);
    for (int c = 0; c < w2.cols(); ++c)
        for (int r = 0; r < w2.rows(); ++r) w2(r, c) = p(at++);
    for (int r = 0; r < b2.size(); ++r) b2(r) = p(at++);
}

}  // namespace gvd
