#pragma once

#include <cstddef>
#include <vector>

#include "mmdqn/kernels.hpp"

// Internal: the two kernel implementations dispatched by kernels.cpp plus
// the per-output-row arithmetic they share. The serial and OpenMP variants
// differ only in the loop that distributes rows, so results are
// bit-identical for any thread count.
namespace mmdqn::kernels::detail {

// Fixed-order lane-split dot product. Independent accumulator lanes let the
// compiler vectorize without reassociating a serial reduction, and the
// combine order is hard-coded, so results do not depend on build flags of
// the caller or on threading.
inline float dot_lanes(const float* __restrict a, const float* __restrict b, int n) {
    constexpr int kLanes = 16;
    float acc[kLanes] = {};
    int i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (int j = 0; j < kLanes; ++j) acc[j] += a[i + j] * b[i + j];
    }
    float tail = 0.0f;
    for (; i < n; ++i) tail += a[i] * b[i];
    float s0 = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    float s1 = (acc[4] + acc[5]) + (acc[6] + acc[7]);
    float s2 = (acc[8] + acc[9]) + (acc[10] + acc[11]);
    float s3 = (acc[12] + acc[13]) + (acc[14] + acc[15]);
    return ((s0 + s1) + (s2 + s3)) + tail;
}

inline void axpy(float* __restrict y, const float* __restrict x, float a, int n) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

namespace rowops {

// Per-thread scratch reused across calls (grown, never shrunk). Slot 0 is
// the whole-batch column buffer owned by the calling thread; slot 2 is the
// per-sample gradient column used inside worker loops.
inline std::vector<float>& scratch(int which) {
    thread_local std::vector<float> bufs[3];
    return bufs[which];
}

// im2col: one row of C*k*k contiguous input taps per output position, so
// every convolution loop below is a contiguous dot product or axpy.
inline void im2col2d(const float* __restrict xb, int channels, int height, int width, int k,
                     int stride, float* __restrict col) {
    const int oh = conv_out_size(height, k, stride);
    const int ow = conv_out_size(width, k, stride);
    float* dst = col;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int ic = 0; ic < channels; ++ic) {
                const float* base =
                    xb + (static_cast<size_t>(ic) * height + oy * stride) * width + ox * stride;
                for (int ky = 0; ky < k; ++ky) {
                    const float* xr = base + static_cast<size_t>(ky) * width;
                    for (int kx = 0; kx < k; ++kx) *dst++ = xr[kx];
                }
            }
        }
    }
}

inline void col2im2d(const float* __restrict dcol, int channels, int height, int width, int k,
                     int stride, float* __restrict dxb) {
    const int oh = conv_out_size(height, k, stride);
    const int ow = conv_out_size(width, k, stride);
    for (size_t i = 0; i < static_cast<size_t>(channels) * height * width; ++i) dxb[i] = 0.0f;
    const float* src = dcol;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int ic = 0; ic < channels; ++ic) {
                float* base =
                    dxb + (static_cast<size_t>(ic) * height + oy * stride) * width + ox * stride;
                for (int ky = 0; ky < k; ++ky) {
                    float* xr = base + static_cast<size_t>(ky) * width;
                    for (int kx = 0; kx < k; ++kx) xr[kx] += *src++;
                }
            }
        }
    }
}

inline void im2col1d(const float* __restrict xb, int channels, int length, int k, int stride,
                     float* __restrict col) {
    const int ol = conv_out_size(length, k, stride);
    float* dst = col;
    for (int o = 0; o < ol; ++o) {
        for (int ic = 0; ic < channels; ++ic) {
            const float* base = xb + static_cast<size_t>(ic) * length + o * stride;
            for (int kx = 0; kx < k; ++kx) *dst++ = base[kx];
        }
    }
}

inline void col2im1d(const float* __restrict dcol, int channels, int length, int k, int stride,
                     float* __restrict dxb) {
    const int ol = conv_out_size(length, k, stride);
    for (size_t i = 0; i < static_cast<size_t>(channels) * length; ++i) dxb[i] = 0.0f;
    const float* src = dcol;
    for (int o = 0; o < ol; ++o) {
        for (int ic = 0; ic < channels; ++ic) {
            float* base = dxb + static_cast<size_t>(ic) * length + o * stride;
            for (int kx = 0; kx < k; ++kx) base[kx] += *src++;
        }
    }
}

// Shared compute on column rows; identical for 1-D and 2-D convolutions.
inline void conv_forward_from_col(const float* col, const float* w, const float* b, float* y,
                                  int rows, int n, int oc_count) {
    for (int oc = 0; oc < oc_count; ++oc) {
        const float* wr = w + static_cast<size_t>(oc) * n;
        float* yc = y + static_cast<size_t>(oc) * rows;
        for (int r = 0; r < rows; ++r) {
            yc[r] = b[oc] + dot_lanes(wr, col + static_cast<size_t>(r) * n, n);
        }
    }
}

inline void conv_backward_params_from_col(int oc, const float* col_all, const float* dy,
                                          float* dwc, float* db, int batch, int rows, int n,
                                          int oc_count) {
    for (int i = 0; i < n; ++i) dwc[i] = 0.0f;
    float acc_b = 0.0f;
    for (int bi = 0; bi < batch; ++bi) {
        const float* dyc = dy + (static_cast<size_t>(bi) * oc_count + oc) * rows;
        const float* colb = col_all + static_cast<size_t>(bi) * rows * n;
        for (int r = 0; r < rows; ++r) {
            const float g = dyc[r];
            acc_b += g;
            axpy(dwc, colb + static_cast<size_t>(r) * n, g, n);
        }
    }
    db[oc] = acc_b;
}

inline void conv_backward_dcol_sample(const float* dyb, const float* w, float* dcol, int rows,
                                      int n, int oc_count) {
    for (size_t i = 0; i < static_cast<size_t>(rows) * n; ++i) dcol[i] = 0.0f;
    for (int oc = 0; oc < oc_count; ++oc) {
        const float* wr = w + static_cast<size_t>(oc) * n;
        const float* dyc = dyb + static_cast<size_t>(oc) * rows;
        for (int r = 0; r < rows; ++r) {
            axpy(dcol + static_cast<size_t>(r) * n, wr, dyc[r], n);
        }
    }
}

inline void fc_forward_row(const float* x_row, const float* w, const float* b, float* y_row,
                           int in, int out) {
    for (int o = 0; o < out; ++o) {
        y_row[o] = b[o] + dot_lanes(x_row, w + static_cast<size_t>(o) * in, in);
    }
}

inline void fc_backward_input_row(const float* dy_row, const float* w, float* dx_row, int in,
                                  int out) {
    for (int i = 0; i < in; ++i) dx_row[i] = 0.0f;
    for (int o = 0; o < out; ++o) {
        axpy(dx_row, w + static_cast<size_t>(o) * in, dy_row[o], in);
    }
}

// Gradient for one output unit's weight row and bias, summed over the batch.
inline void fc_backward_params_unit(int o, const float* x, const float* dy, float* dw_row,
                                    float* db, int batch, int in, int out) {
    for (int i = 0; i < in; ++i) dw_row[i] = 0.0f;
    float acc = 0.0f;
    for (int bi = 0; bi < batch; ++bi) {
        const float g = dy[static_cast<size_t>(bi) * out + o];
        axpy(dw_row, x + static_cast<size_t>(bi) * in, g, in);
        acc += g;
    }
    db[o] = acc;
}

}  // namespace rowops

#define MMDQN_KERNEL_DECLS(suffix)                                                              \
    void fc_forward_##suffix(const float* x, const float* w, const float* b, float* y,         \
                             int batch, int in, int out);                                       \
    void fc_backward_input_##suffix(const float* dy, const float* w, float* dx, int batch,     \
                                    int in, int out);                                          \
    void fc_backward_params_##suffix(const float* x, const float* dy, float* dw, float* db,    \
                                     int batch, int in, int out);                              \
    void conv2d_forward_##suffix(const float* x, const float* w, const float* b, float* y,     \
                                 int batch, int channels, int height, int width,               \
                                 int out_channels, int k, int stride);                         \
    void conv2d_backward_input_##suffix(const float* dy, const float* w, float* dx, int batch, \
                                        int channels, int height, int width, int out_channels, \
                                        int k, int stride);                                    \
    void conv2d_backward_params_##suffix(const float* x, const float* dy, float* dw,           \
                                         float* db, int batch, int channels, int height,       \
                                         int width, int out_channels, int k, int stride);      \
    void conv1d_forward_##suffix(const float* x, const float* w, const float* b, float* y,     \
                                 int batch, int channels, int length, int out_channels, int k, \
                                 int stride);                                                  \
    void conv1d_backward_input_##suffix(const float* dy, const float* w, float* dx, int batch, \
                                        int channels, int length, int out_channels, int k,     \
                                        int stride);                                           \
    void conv1d_backward_params_##suffix(const float* x, const float* dy, float* dw,           \
                                         float* db, int batch, int channels, int length,       \
                                         int out_channels, int k, int stride);                 \
    void relu_forward_##suffix(const float* x, float* y, size_t n);                            \
    void relu_backward_##suffix(const float* x, const float* dy, float* dx, size_t n);         \
    void rmsprop_update_##suffix(float* p, const float* g, float* v, size_t n, float lr,       \
                                 float rho, float eps);

MMDQN_KERNEL_DECLS(serial)
MMDQN_KERNEL_DECLS(omp)

#undef MMDQN_KERNEL_DECLS

}  // namespace mmdqn::kernels::detail
