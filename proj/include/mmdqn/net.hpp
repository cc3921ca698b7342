#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmdqn/rng.hpp"
#include "mmdqn/tensor.hpp"

namespace mmdqn {

enum class NetKind {
    FusionConv,  // per-modality conv heads, concat, FC, FC
    LinearQ,     // single fully connected layer on identity features
};

// Architecture description. The conv stack is two strided valid
// convolutions per modality head (8 then 16 filters, 3-wide kernels,
// stride 2), ReLU everywhere except the linear Q output.
struct NetworkSpec {
    NetKind kind = NetKind::FusionConv;

    int image_h = 40, image_w = 40, image_c = 3;
    std::optional<int> audio_len;  // 114 (pitch) or 100 (raw); nullopt = visual only
    int conv1_filters = 8;
    int conv2_filters = 16;
    int kernel_size = 3;
    int stride = 2;
    int fc_hidden = 128;
    int num_actions = 4;
    // Alternative fusion point: per-head FC into fc_hidden units each,
    // concatenated after instead of before the hidden layer.
    bool fuse_after_hidden = false;

    int linear_inputs = 0;  // LinearQ input width

    int conv_out(int n) const { return (n - kernel_size) / stride + 1; }
    int image_flat() const {
        return conv2_filters * conv_out(conv_out(image_h)) * conv_out(conv_out(image_w));
    }
    int audio_flat() const {
        return audio_len ? conv2_filters * conv_out(conv_out(*audio_len)) : 0;
    }
    // Width of the concatenated head output feeding the first trunk FC.
    int trunk_inputs() const { return image_flat() + audio_flat(); }
};

// Named parameter tensors in a stable order.
struct Parameters {
    std::vector<std::pair<std::string, Tensor>> tensors;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    int64_t total_elements() const;
};

// He-uniform weights (+-sqrt(6/fan_in)), zero biases; deterministic per seed.
Parameters init_params(const NetworkSpec& spec, Rng& rng);

Parameters copy_params(const Parameters& params);

// Activations captured by forward for the matching backward call.
struct ForwardCache {
    Tensor image_in, img_pre1, img_post1, img_pre2, img_post2;
    Tensor aud_in, aud_pre1, aud_post1, aud_pre2, aud_post2;
    Tensor trunk_in;          // concatenated flat heads
    Tensor fc1_pre, fc1_post; // default fusion
    Tensor img_fc_pre, img_fc_post, aud_fc_pre, aud_fc_post;  // fuse_after_hidden
    Tensor fc2_in;            // input to the output layer
    int batch = 0;
};

// Q-values [B, num_actions]; linear output. `audio` must be present iff
// the spec has an audio head. Shape mismatches raise std::invalid_argument
// naming the offending layer; non-finite activations raise
// std::runtime_error naming the layer.
Tensor forward(const Parameters& params, const NetworkSpec& spec, const Tensor& image,
               const Tensor* audio = nullptr, ForwardCache* cache = nullptr);

// Gradients of the scalar loss whose output-gradient is `dq` [B, actions],
// same names/shapes/order as `params`. Requires the cache filled by forward
// on the same inputs.
Parameters backward(const Parameters& params, const NetworkSpec& spec, const ForwardCache& cache,
                    const Tensor& dq);

struct HuberResult {
    double loss = 0.0;
    Tensor grad;  // d(mean loss)/d(pred), same shape as pred
};
HuberResult huber_loss(const Tensor& pred, const Tensor& target, double delta = 1.0);

struct RmsPropState {
    double lr = 0.00025;
    double rho = 0.95;
    double epsilon = 1e-6;
    std::vector<Tensor> v;  // aligned with the parameter order

    void ensure_initialized(const Parameters& params);
};

void rmsprop_step(Parameters& params, const Parameters& grads, RmsPropState& state);

// Checkpoint file: magic "MMDQ", u32 version = 1, u32 tensor count, then
// per tensor u16 name length + UTF-8 name, u8 rank, u32 dims, raw f32
// little-endian data. Round trips bit-exactly.
void save_params(const Parameters& params, const std::string& path);
Parameters load_params(const std::string& path);

}  // namespace mmdqn
