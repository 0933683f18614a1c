// Minimal one-hidden-layer tanh network with manual backprop. Parameters are
// exposed as one flat vector so gradients can be checked against finite
// differences.
#pragma once

#include "gvd/latent.hpp"
#include "gvd/rng.hpp"

namespace gvd {

struct Mlp {
    Mat w1;  // hidden x in
    Vec b1;  // hidden
    Mat w2;  // out x hidden
    Vec b2;  // out

    int in_dim() const { return int(w1.cols()); }
    int hidden_dim() const { return int(w1.rows()); }
    int out_dim() const { return int(w2.rows()); }

    static Mlp init(int in, int hidden, int out, Rng & rng);
    static Mlp zeros_like(const Mlp & other);

    Vec forward(const Vec & x) const;
    // Forward pass that also returns the hidden activation needed by backward.
    Vec forward(const Vec & x, Vec & hidden_out) const;

    // Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
    // Returns d(loss)/d(input) in case the caller chains further.
    Vec backward(const Vec & x, const Vec & hidden, const Vec & d_out, Mlp & grad) const;

    void add_scaled(const Mlp & g, double scale);
    void scale(double s);
    void set_zero();

    int param_count() const;
    Vec flat_params() const;
    void set_flat_params(const Vec & p);
};

}  // namespace gvd
