#include <cmath>

#include "kernels_detail.hpp"

// Serial reference path: same per-row arithmetic as the OpenMP variant,
// rows visited in order on one thread.
namespace mmdqn::kernels::detail {

void fc_forward_serial(const float* x, const float* w, const float* b, float* y, int batch,
                       int in, int out) {
    for (int bi = 0; bi < batch; ++bi) {
        rowops::fc_forward_row(x + static_cast<size_t>(bi) * in, w, b,
                               y + static_cast<size_t>(bi) * out, in, out);
    }
}

void fc_backward_input_serial(const float* dy, const float* w, float* dx, int batch, int in,
                              int out) {
    for (int bi = 0; bi < batch; ++bi) {
        rowops::fc_backward_input_row(dy + static_cast<size_t>(bi) * out, w,
                                      dx + static_cast<size_t>(bi) * in, in, out);
    }
}

void fc_backward_params_serial(const float* x, const float* dy, float* dw, float* db, int batch,
                               int in, int out) {
    for (int o = 0; o < out; ++o) {
        rowops::fc_backward_params_unit(o, x, dy, dw + static_cast<size_t>(o) * in, db, batch,
                                        in, out);
    }
}

void conv2d_forward_serial(const float* x, const float* w, const float* b, float* y, int batch,
                           int channels, int height, int width, int out_channels, int k,
                           int stride) {
    const int rows = conv_out_size(height, k, stride) * conv_out_size(width, k, stride);
    const int n = channels * k * k;
    std::vector<float>& col = rowops::scratch(0);
    col.resize(static_cast<size_t>(batch) * rows * n);
    for (int bi = 0; bi < batch; ++bi) {
        rowops::im2col2d(x + static_cast<size_t>(bi) * channels * height * width, channels,
                         height, width, k, stride, col.data() + static_cast<size_t>(bi) * rows * n);
    }
    for (int bi = 0; bi < batch; ++bi) {
        rowops::conv_forward_from_col(col.data() + static_cast<size_t>(bi) * rows * n, w, b,
                                      y + static_cast<size_t>(bi) * out_channels * rows, rows, n,
                                      out_channels);
    }
}

void conv2d_backward_input_serial(const float* dy, const float* w, float* dx, int batch,
                                  int channels, int height, int width, int out_channels, int k,
                                  int stride) {
    const int rows = conv_out_size(height, k, stride) * conv_out_size(width, k, stride);
    const int n = channels * k * k;
    for (int bi = 0; bi < batch; ++bi) {
        std::vector<float>& dcol = rowops::scratch(2);
        dcol.resize(static_cast<size_t>(rows) * n);
        rowops::conv_backward_dcol_sample(dy + static_cast<size_t>(bi) * out_channels * rows, w,
                                          dcol.data(), rows, n, out_channels);
        rowops::col2im2d(dcol.data(), channels, height, width, k, stride,
                         dx + static_cast<size_t>(bi) * channels * height * width);
    }
}

void conv2d_backward_params_serial(const float* x, const float* dy, float* dw, float* db,
                                   int batch, int channels, int height, int width,
                                   int out_channels, int k, int stride) {
    const int rows = conv_out_size(height, k, stride) * conv_out_size(width, k, stride);
    const int n = channels * k * k;
    std::vector<float>& col = rowops::scratch(0);
    col.resize(static_cast<size_t>(batch) * rows * n);
    for (int bi = 0; bi < batch; ++bi) {
        rowops::im2col2d(x + static_cast<size_t>(bi) * channels * height * width, channels,
                         height, width, k, stride, col.data() + static_cast<size_t>(bi) * rows * n);
    }
    for (int oc = 0; oc < out_channels; ++oc) {
        rowops::conv_backward_params_from_col(oc, col.data(), dy,
                                              dw + static_cast<size_t>(oc) * n, db, batch, rows,
                                              n, out_channels);
    }
}

void conv1d_forward_serial(const float* x, const float* w, const float* b, float* y, int batch,
                           int channels, int length, int out_channels, int k, int stride) {
    const int rows = conv_out_size(length, k, stride);
    const int n = channels * k;
    std::vector<float>& col = rowops::scratch(0);
    col.resize(static_cast<size_t>(batch) * rows * n);
    for (int bi = 0; bi < batch; ++bi) {
        rowops::im2col1d(x + static_cast<size_t>(bi) * channels * length, channels, length, k,
                         stride, col.data() + static_cast<size_t>(bi) * rows * n);
    }
    for (int bi = 0; bi < batch; ++bi) {
        rowops::conv_forward_from_col(col.data() + static_cast<size_t>(bi) * rows * n, w, b,
                                      y + static_cast<size_t>(bi) * out_channels * rows, rows, n,
                                      out_channels);
    }
}

void conv1d_backward_input_serial(const float* dy, const float* w, float* dx, int batch,
                                  int channels, int length, int out_channels, int k, int stride) {
    const int rows = conv_out_size(length, k, stride);
    const int n = channels * k;
    for (int bi = 0; bi < batch; ++bi) {
        std::vector<float>& dcol = rowops::scratch(2);
        dcol.resize(static_cast<size_t>(rows) * n);
        rowops::conv_backward_dcol_sample(dy + static_cast<size_t>(bi) * out_channels * rows, w,
                                          dcol.data(), rows, n, out_channels);
        rowops::col2im1d(dcol.data(), channels, length, k, stride,
                         dx + static_cast<size_t>(bi) * channels * length);
    }
}

void conv1d_backward_params_serial(const float* x, const float* dy, float* dw, float* db,
                                   int batch, int channels, int length, int out_channels, int k,
                                   int stride) {
    const int rows = conv_out_size(length, k, stride);
    const int n = channels * k;
    std::vector<float>& col = rowops::scratch(0);
    col.resize(static_cast<size_t>(batch) * rows * n);
    for (int bi = 0; bi < batch; ++bi) {
        rowops::im2col1d(x + static_cast<size_t>(bi) * channels * length, channels, length, k,
                         stride, col.data() + static_cast<size_t>(bi) * rows * n);
    }
    for (int oc = 0; oc < out_channels; ++oc) {
        rowops::conv_backward_params_from_col(oc, col.data(), dy,
                                              dw + static_cast<size_t>(oc) * n, db, batch, rows,
                                              n, out_channels);
    }
}

void relu_forward_serial(const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_serial(const float* x, const float* dy, float* dx, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void rmsprop_update_serial(float* p, const float* g, float* v, size_t n, float lr, float rho,
                           float eps) {
    for (size_t i = 0; i < n; ++i) {
        v[i] = rho * v[i] + (1.0f - rho) * g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
    }
}

}  // namespace mmdqn::kernels::detail
