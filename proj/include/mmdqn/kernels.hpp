#pragma once

#include <cstddef>

// Batched math kernels behind the network. Every kernel exists twice: a
// serial reference implementation and an OpenMP one parallelized across
// independent output rows, so both produce bit-identical results for any
// thread count. The active variant is a process-wide switch; the OpenMP
// build is the default, the serial build is kept for testing and as the
// baseline in the kernel benchmark.
namespace mmdqn::kernels {

enum class Mode { Serial, OpenMP };

void set_mode(Mode m);
Mode mode();

// y[B,out] = x[B,in] * W[out,in]^T + b[out]
void fc_forward(const float* x, const float* w, const float* b, float* y, int batch, int in,
                int out);
// dx[B,in] += contribution of dy through W (dx is overwritten)
void fc_backward_input(const float* dy, const float* w, float* dx, int batch, int in, int out);
// dw[out,in], db[out] accumulated over the batch (overwritten)
void fc_backward_params(const float* x, const float* dy, float* dw, float* db, int batch, int in,
                        int out);

// Valid (unpadded) strided convolutions. x[B,C,H,W], w[OC,C,k,k], y[B,OC,OH,OW]
// with OH = (H - k) / stride + 1.
void conv2d_forward(const float* x, const float* w, const float* b, float* y, int batch,
                    int channels, int height, int width, int out_channels, int k, int stride);
void conv2d_backward_input(const float* dy, const float* w, float* dx, int batch, int channels,
                           int height, int width, int out_channels, int k, int stride);
void conv2d_backward_params(const float* x, const float* dy, float* dw, float* db, int batch,
                            int channels, int height, int width, int out_channels, int k,
                            int stride);

// 1-D variants: x[B,C,L], w[OC,C,k], y[B,OC,OL] with OL = (L - k) / stride + 1.
void conv1d_forward(const float* x, const float* w, const float* b, float* y, int batch,
                    int channels, int length, int out_channels, int k, int stride);
void conv1d_backward_input(const float* dy, const float* w, float* dx, int batch, int channels,
                           int length, int out_channels, int k, int stride);
void conv1d_backward_params(const float* x, const float* dy, float* dw, float* db, int batch,
                            int channels, int length, int out_channels, int k, int stride);

void relu_forward(const float* x, float* y, size_t n);
void relu_backward(const float* x, const float* dy, float* dx, size_t n);

// v = rho*v + (1-rho)*g^2; p -= lr * g / (sqrt(v) + eps)
void rmsprop_update(float* p, const float* g, float* v, size_t n, float lr, float rho, float eps);

inline int conv_out_size(int n, int k, int stride) { return (n - k) / stride + 1; }

}  // namespace mmdqn::kernels
