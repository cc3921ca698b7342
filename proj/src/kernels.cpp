#include "mmdqn/kernels.hpp"

#include <atomic>

#include "kernels_detail.hpp"

namespace mmdqn::kernels {

namespace {
std::atomic<Mode> g_mode{Mode::OpenMP};
}

void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }
Mode mode() { return g_mode.load(std::memory_order_relaxed); }

#define MMDQN_DISPATCH(fn, ...)                       \
    if (mode() == Mode::Serial) {                     \
        detail::fn##_serial(__VA_ARGS__);             \
    } else {                                          \
        detail::fn##_omp(__VA_ARGS__);                \
    }

void fc_forward(const float* x, const float* w, const float* b, float* y, int batch, int in,
                int out) {
    MMDQN_DISPATCH(fc_forward, x, w, b, y, batch, in, out)
}
void fc_backward_input(const float* dy, const float* w, float* dx, int batch, int in, int out) {
    MMDQN_DISPATCH(fc_backward_input, dy, w, dx, batch, in, out)
}
void fc_backward_params(const float* x, const float* dy, float* dw, float* db, int batch, int in,
                        int out) {
    MMDQN_DISPATCH(fc_backward_params, x, dy, dw, db, batch, in, out)
}
void conv2d_forward(const float* x, const float* w, const float* b, float* y, int batch,
                    int channels, int height, int width, int out_channels, int k, int stride) {
    MMDQN_DISPATCH(conv2d_forward, x, w, b, y, batch, channels, height, width, out_channels, k,
                   stride)
}
void conv2d_backward_input(const float* dy, const float* w, float* dx, int batch, int channels,
                           int height, int width, int out_channels, int k, int stride) {
    MMDQN_DISPATCH(conv2d_backward_input, dy, w, dx, batch, channels, height, width, out_channels,
                   k, stride)
}
void conv2d_backward_params(const float* x, const float* dy, float* dw, float* db, int batch,
                            int channels, int height, int width, int out_channels, int k,
                            int stride) {
    MMDQN_DISPATCH(conv2d_backward_params, x, dy, dw, db, batch, channels, height, width,
                   out_channels, k, stride)
}
void conv1d_forward(const float* x, const float* w, const float* b, float* y, int batch,
                    int channels, int length, int out_channels, int k, int stride) {
    MMDQN_DISPATCH(conv1d_forward, x, w, b, y, batch, channels, length, out_channels, k, stride)
}
void conv1d_backward_input(const float* dy, const float* w, float* dx, int batch, int channels,
                           int length, int out_channels, int k, int stride) {
    MMDQN_DISPATCH(conv1d_backward_input, dy, w, dx, batch, channels, length, out_channels, k,
                   stride)
}
void conv1d_backward_params(const float* x, const float* dy, float* dw, float* db, int batch,
                            int channels, int length, int out_channels, int k, int stride) {
    MMDQN_DISPATCH(conv1d_backward_params, x, dy, dw, db, batch, channels, length, out_channels,
                   k, stride)
}
void relu_forward(const float* x, float* y, size_t n) { MMDQN_DISPATCH(relu_forward, x, y, n) }
void relu_backward(const float* x, const float* dy, float* dx, size_t n) {
    MMDQN_DISPATCH(relu_backward, x, dy, dx, n)
}
void rmsprop_update(float* p, const float* g, float* v, size_t n, float lr, float rho,
                    float eps) {
    MMDQN_DISPATCH(rmsprop_update, p, g, v, n, lr, rho, eps)
}

#undef MMDQN_DISPATCH

}  // namespace mmdqn::kernels
