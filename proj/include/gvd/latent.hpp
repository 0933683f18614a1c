// Latent video tensors and their flattened vector form. A video is a
// frames-by-dim matrix of doubles; flattening is frame-major, so entry
// (f, d) lands at index f * dim + d.
#pragma once

#include <Eigen/Dense>

#include "gvd/errors.hpp"

namespace gvd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Vec flatten(const Mat & video) {
    Vec out(video.rows() * video.cols());
    for (int f = 0; f < video.rows(); ++f)
        for (int d = 0; d < video.cols(); ++d) out(f * video.cols() + d) = video(f, d);
    return out;
}

inline Mat unflatten(const Vec & v, int frames, int dim) {
    if (v.size() != Eigen::Index(frames) * dim) {
        throw error(error_kind::dimension, "flat vector length does not match frames * dim");
    }
    Mat out(frames, dim);
    for (int f = 0; f < frames; ++f)
        for (int d = 0; d < dim; ++d) out(f, d) = v(f * dim + d);
    return out;
}

// Storage uses 32-bit floats; snapping values to that grid at creation time
// makes save/load round trips bit-exact.
inline void quantize_storage(Mat & video) {
    for (int f = 0; f < video.rows(); ++f)
        for (int d = 0; d < video.cols(); ++d) video(f, d) = double(float(video(f, d)));
}

inline bool all_finite(const Mat & m) { return m.allFinite(); }
inline bool all_finite(const Vec & v) { return v.allFinite(); }

}  // namespace gvd
