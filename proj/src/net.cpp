#include "mmdqn/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mmdqn/kernels.hpp"

namespace mmdqn {

std::string shape_string(const Tensor& t) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < t.shape.size(); ++i) {
        if (i) os << ",";
        os << t.shape[i];
    }
    os << "]";
    return os.str();
}

void check_finite(const Tensor& t, const std::string& where) {
    // Integer OR-reduction over the exponent bits; vectorizes where a
    // per-element isfinite branch would not.
    const float* p = t.ptr();
    const size_t n = t.data.size();
    uint32_t bad = 0;
    for (size_t i = 0; i < n; ++i) {
        uint32_t bits;
        std::memcpy(&bits, p + i, sizeof(bits));
        bad |= static_cast<uint32_t>((bits & 0x7f800000u) == 0x7f800000u);
    }
    if (bad) throw std::runtime_error("non-finite value in " + where);
}

Tensor& Parameters::at(const std::string& name) {
    for (auto& [n, t] : tensors) {
        if (n == name) return t;
    }
    throw std::invalid_argument("no parameter named " + name);
}

const Tensor& Parameters::at(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return t;
    }
    throw std::invalid_argument("no parameter named " + name);
}

int64_t Parameters::total_elements() const {
    int64_t n = 0;
    for (const auto& [name, t] : tensors) n += t.numel();
    return n;
}

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Weight tensors get He-uniform fills, fan_in = elements per output unit.
void fill_he_uniform(Tensor& t, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (float& v : t.data) v = static_cast<float>(rng.next_range(-bound, bound));
}

struct LayerShapes {
    int img_h1, img_w1, img_h2, img_w2;
    int aud_l1, aud_l2;
};

LayerShapes head_shapes(const NetworkSpec& s) {
    LayerShapes ls{};
    ls.img_h1 = s.conv_out(s.image_h);
    ls.img_w1 = s.conv_out(s.image_w);
    ls.img_h2 = s.conv_out(ls.img_h1);
    ls.img_w2 = s.conv_out(ls.img_w1);
    if (s.audio_len) {
        ls.aud_l1 = s.conv_out(*s.audio_len);
        ls.aud_l2 = s.conv_out(ls.aud_l1);
    }
    return ls;
}

void check_tensor_shape(const Tensor& t, const std::vector<int>& want, const std::string& layer) {
    if (t.shape != want) {
        Tensor expected;
        expected.shape = want;
        throw std::invalid_argument("shape mismatch at " + layer + ": got " + shape_string(t) +
                                    ", expected " + shape_string(expected));
    }
}

}  // namespace

Parameters init_params(const NetworkSpec& spec, Rng& rng) {
    Parameters p;
    auto add_weight = [&](const std::string& name, std::vector<int> shape, int fan_in) {
        Tensor t = Tensor::zeros(std::move(shape));
        fill_he_uniform(t, fan_in, rng);
        p.tensors.emplace_back(name, std::move(t));
    };
    auto add_bias = [&](const std::string& name, int n) {
        p.tensors.emplace_back(name, Tensor::zeros({n}));
    };

    if (spec.kind == NetKind::LinearQ) {
        require(spec.linear_inputs > 0, "init_params: LinearQ needs linear_inputs > 0");
        add_weight("fc.w", {spec.num_actions, spec.linear_inputs}, spec.linear_inputs);
        add_bias("fc.b", spec.num_actions);
        return p;
    }

    const int k = spec.kernel_size;
    add_weight("image_conv1.w", {spec.conv1_filters, spec.image_c, k, k}, spec.image_c * k * k);
    add_bias("image_conv1.b", spec.conv1_filters);
    add_weight("image_conv2.w", {spec.conv2_filters, spec.conv1_filters, k, k},
               spec.conv1_filters * k * k);
    add_bias("image_conv2.b", spec.conv2_filters);
    if (spec.audio_len) {
        add_weight("audio_conv1.w", {spec.conv1_filters, 1, k}, k);
        add_bias("audio_conv1.b", spec.conv1_filters);
        add_weight("audio_conv2.w", {spec.conv2_filters, spec.conv1_filters, k},
                   spec.conv1_filters * k);
        add_bias("audio_conv2.b", spec.conv2_filters);
    }
    if (spec.fuse_after_hidden) {
        add_weight("image_fc.w", {spec.fc_hidden, spec.image_flat()}, spec.image_flat());
        add_bias("image_fc.b", spec.fc_hidden);
        if (spec.audio_len) {
            add_weight("audio_fc.w", {spec.fc_hidden, spec.audio_flat()}, spec.audio_flat());
            add_bias("audio_fc.b", spec.fc_hidden);
        }
        const int fc2_in = spec.fc_hidden * (spec.audio_len ? 2 : 1);
        add_weight("fc2.w", {spec.num_actions, fc2_in}, fc2_in);
        add_bias("fc2.b", spec.num_actions);
    } else {
        add_weight("fc1.w", {spec.fc_hidden, spec.trunk_inputs()}, spec.trunk_inputs());
        add_bias("fc1.b", spec.fc_hidden);
        add_weight("fc2.w", {spec.num_actions, spec.fc_hidden}, spec.fc_hidden);
        add_bias("fc2.b", spec.num_actions);
    }
    return p;
}

Parameters copy_params(const Parameters& params) { return params; }

Tensor forward(const Parameters& params, const NetworkSpec& spec, const Tensor& image,
               const Tensor* audio, ForwardCache* cache) {
    namespace K = kernels;
    require(!image.shape.empty(), "forward: image tensor is empty");
    const int batch = image.dim(0);
    require(batch >= 1, "forward: batch must be >= 1");

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.batch = batch;

    if (spec.kind == NetKind::LinearQ) {
        check_tensor_shape(image, {batch, spec.linear_inputs}, "fc (input)");
        require(audio == nullptr, "forward: LinearQ takes no audio input");
        c.fc2_in = image;
        Tensor q = Tensor::zeros({batch, spec.num_actions});
        K::fc_forward(image.ptr(), params.at("fc.w").ptr(), params.at("fc.b").ptr(), q.ptr(),
                      batch, spec.linear_inputs, spec.num_actions);
        check_finite(q, "fc (forward)");
        return q;
    }

    check_tensor_shape(image, {batch, spec.image_c, spec.image_h, spec.image_w},
                       "image_conv1 (input)");
    if (spec.audio_len) {
        require(audio != nullptr, "forward: spec has an audio head but no audio was given");
        check_tensor_shape(*audio, {batch, 1, *spec.audio_len}, "audio_conv1 (input)");
    } else {
        require(audio == nullptr, "forward: spec has no audio head but audio was given");
    }

    const LayerShapes ls = head_shapes(spec);
    const int k = spec.kernel_size, s = spec.stride;

    // image head
    c.image_in = image;
    c.img_pre1 = Tensor::zeros({batch, spec.conv1_filters, ls.img_h1, ls.img_w1});
    K::conv2d_forward(image.ptr(), params.at("image_conv1.w").ptr(),
                      params.at("image_conv1.b").ptr(), c.img_pre1.ptr(), batch, spec.image_c,
                      spec.image_h, spec.image_w, spec.conv1_filters, k, s);
    check_finite(c.img_pre1, "image_conv1 (forward)");
    c.img_post1 = Tensor::zeros(c.img_pre1.shape);
    K::relu_forward(c.img_pre1.ptr(), c.img_post1.ptr(), c.img_pre1.data.size());

    c.img_pre2 = Tensor::zeros({batch, spec.conv2_filters, ls.img_h2, ls.img_w2});
    K::conv2d_forward(c.img_post1.ptr(), params.at("image_conv2.w").ptr(),
                      params.at("image_conv2.b").ptr(), c.img_pre2.ptr(), batch,
                      spec.conv1_filters, ls.img_h1, ls.img_w1, spec.conv2_filters, k, s);
    check_finite(c.img_pre2, "image_conv2 (forward)");
    c.img_post2 = Tensor::zeros(c.img_pre2.shape);
    K::relu_forward(c.img_pre2.ptr(), c.img_post2.ptr(), c.img_pre2.data.size());

    // audio head
    if (spec.audio_len) {
        c.aud_in = *audio;
        c.aud_pre1 = Tensor::zeros({batch, spec.conv1_filters, ls.aud_l1});
        K::conv1d_forward(audio->ptr(), params.at("audio_conv1.w").ptr(),
                          params.at("audio_conv1.b").ptr(), c.aud_pre1.ptr(), batch, 1,
                          *spec.audio_len, spec.conv1_filters, k, s);
        check_finite(c.aud_pre1, "audio_conv1 (forward)");
        c.aud_post1 = Tensor::zeros(c.aud_pre1.shape);
        K::relu_forward(c.aud_pre1.ptr(), c.aud_post1.ptr(), c.aud_pre1.data.size());

        c.aud_pre2 = Tensor::zeros({batch, spec.conv2_filters, ls.aud_l2});
        K::conv1d_forward(c.aud_post1.ptr(), params.at("audio_conv2.w").ptr(),
                          params.at("audio_conv2.b").ptr(), c.aud_pre2.ptr(), batch,
                          spec.conv1_filters, ls.aud_l1, spec.conv2_filters, k, s);
        check_finite(c.aud_pre2, "audio_conv2 (forward)");
        c.aud_post2 = Tensor::zeros(c.aud_pre2.shape);
        K::relu_forward(c.aud_pre2.ptr(), c.aud_post2.ptr(), c.aud_pre2.data.size());
    }

    const int img_flat = spec.image_flat();
    const int aud_flat = spec.audio_flat();

    Tensor q = Tensor::zeros({batch, spec.num_actions});
    if (spec.fuse_after_hidden) {
        c.img_fc_pre = Tensor::zeros({batch, spec.fc_hidden});
        K::fc_forward(c.img_post2.ptr(), params.at("image_fc.w").ptr(),
                      params.at("image_fc.b").ptr(), c.img_fc_pre.ptr(), batch, img_flat,
                      spec.fc_hidden);
        check_finite(c.img_fc_pre, "image_fc (forward)");
        c.img_fc_post = Tensor::zeros(c.img_fc_pre.shape);
        K::relu_forward(c.img_fc_pre.ptr(), c.img_fc_post.ptr(), c.img_fc_pre.data.size());

        int fc2_in_width = spec.fc_hidden;
        if (spec.audio_len) {
            c.aud_fc_pre = Tensor::zeros({batch, spec.fc_hidden});
            K::fc_forward(c.aud_post2.ptr(), params.at("audio_fc.w").ptr(),
                          params.at("audio_fc.b").ptr(), c.aud_fc_pre.ptr(), batch, aud_flat,
                          spec.fc_hidden);
            check_finite(c.aud_fc_pre, "audio_fc (forward)");
            c.aud_fc_post = Tensor::zeros(c.aud_fc_pre.shape);
            K::relu_forward(c.aud_fc_pre.ptr(), c.aud_fc_post.ptr(), c.aud_fc_pre.data.size());
            fc2_in_width = 2 * spec.fc_hidden;
        }
        c.fc2_in = Tensor::zeros({batch, fc2_in_width});
        for (int b = 0; b < batch; ++b) {
            float* row = c.fc2_in.ptr() + static_cast<size_t>(b) * fc2_in_width;
            std::memcpy(row, c.img_fc_post.ptr() + static_cast<size_t>(b) * spec.fc_hidden,
                        sizeof(float) * spec.fc_hidden);
            if (spec.audio_len) {
                std::memcpy(row + spec.fc_hidden,
                            c.aud_fc_post.ptr() + static_cast<size_t>(b) * spec.fc_hidden,
                            sizeof(float) * spec.fc_hidden);
            }
        }
        K::fc_forward(c.fc2_in.ptr(), params.at("fc2.w").ptr(), params.at("fc2.b").ptr(), q.ptr(),
                      batch, fc2_in_width, spec.num_actions);
    } else {
        const int trunk = spec.trunk_inputs();
        c.trunk_in = Tensor::zeros({batch, trunk});
        for (int b = 0; b < batch; ++b) {
            float* row = c.trunk_in.ptr() + static_cast<size_t>(b) * trunk;
            std::memcpy(row, c.img_post2.ptr() + static_cast<size_t>(b) * img_flat,
                        sizeof(float) * img_flat);
            if (spec.audio_len) {
                std::memcpy(row + img_flat, c.aud_post2.ptr() + static_cast<size_t>(b) * aud_flat,
                            sizeof(float) * aud_flat);
            }
        }
        c.fc1_pre = Tensor::zeros({batch, spec.fc_hidden});
        K::fc_forward(c.trunk_in.ptr(), params.at("fc1.w").ptr(), params.at("fc1.b").ptr(),
                      c.fc1_pre.ptr(), batch, trunk, spec.fc_hidden);
        check_finite(c.fc1_pre, "fc1 (forward)");
        c.fc1_post = Tensor::zeros(c.fc1_pre.shape);
        K::relu_forward(c.fc1_pre.ptr(), c.fc1_post.ptr(), c.fc1_pre.data.size());
        c.fc2_in = c.fc1_post;
        K::fc_forward(c.fc2_in.ptr(), params.at("fc2.w").ptr(), params.at("fc2.b").ptr(), q.ptr(),
                      batch, spec.fc_hidden, spec.num_actions);
    }
    check_finite(q, "fc2 (forward)");
    return q;
}

Parameters backward(const Parameters& params, const NetworkSpec& spec, const ForwardCache& cache,
                    const Tensor& dq) {
    namespace K = kernels;
    const int batch = cache.batch;
    require(batch >= 1, "backward: run forward with a cache first");
    check_tensor_shape(dq, {batch, spec.num_actions}, "fc2 (output gradient)");

    // Gradients mirror the parameter list (same names, shapes, order).
    Parameters grads;
    for (const auto& [name, t] : params.tensors) {
        grads.tensors.emplace_back(name, Tensor::zeros(t.shape));
    }
    auto finite = [&](const Tensor& t, const char* layer) {
        const float* p = t.ptr();
        uint32_t bad = 0;
        for (size_t i = 0; i < t.data.size(); ++i) {
            uint32_t bits;
            std::memcpy(&bits, p + i, sizeof(bits));
            bad |= static_cast<uint32_t>((bits & 0x7f800000u) == 0x7f800000u);
        }
        if (bad) throw std::runtime_error(std::string("NaN gradient at ") + layer);
    };

    if (spec.kind == NetKind::LinearQ) {
        K::fc_backward_params(cache.fc2_in.ptr(), dq.ptr(), grads.at("fc.w").ptr(),
                              grads.at("fc.b").ptr(), batch, spec.linear_inputs,
                              spec.num_actions);
        finite(grads.at("fc.w"), "fc");
        return grads;
    }

    const LayerShapes ls = head_shapes(spec);
    const int k = spec.kernel_size, s = spec.stride;
    const int img_flat = spec.image_flat();
    const int aud_flat = spec.audio_flat();

    Tensor d_img_flat = Tensor::zeros({batch, img_flat});
    Tensor d_aud_flat = spec.audio_len ? Tensor::zeros({batch, aud_flat}) : Tensor();

    if (spec.fuse_after_hidden) {
        const int fc2_in_width = spec.fc_hidden * (spec.audio_len ? 2 : 1);
        K::fc_backward_params(cache.fc2_in.ptr(), dq.ptr(), grads.at("fc2.w").ptr(),
                              grads.at("fc2.b").ptr(), batch, fc2_in_width, spec.num_actions);
        Tensor d_fc2_in = Tensor::zeros({batch, fc2_in_width});
        K::fc_backward_input(dq.ptr(), params.at("fc2.w").ptr(), d_fc2_in.ptr(), batch,
                             fc2_in_width, spec.num_actions);

        Tensor d_img_fc_post = Tensor::zeros({batch, spec.fc_hidden});
        Tensor d_aud_fc_post = spec.audio_len ? Tensor::zeros({batch, spec.fc_hidden}) : Tensor();
        for (int b = 0; b < batch; ++b) {
            const float* row = d_fc2_in.ptr() + static_cast<size_t>(b) * fc2_in_width;
            std::memcpy(d_img_fc_post.ptr() + static_cast<size_t>(b) * spec.fc_hidden, row,
                        sizeof(float) * spec.fc_hidden);
            if (spec.audio_len) {
                std::memcpy(d_aud_fc_post.ptr() + static_cast<size_t>(b) * spec.fc_hidden,
                            row + spec.fc_hidden, sizeof(float) * spec.fc_hidden);
            }
        }

        Tensor d_img_fc_pre = Tensor::zeros({batch, spec.fc_hidden});
        K::relu_backward(cache.img_fc_pre.ptr(), d_img_fc_post.ptr(), d_img_fc_pre.ptr(),
                         d_img_fc_pre.data.size());
        K::fc_backward_params(cache.img_post2.ptr(), d_img_fc_pre.ptr(),
                              grads.at("image_fc.w").ptr(), grads.at("image_fc.b").ptr(), batch,
                              img_flat, spec.fc_hidden);
        K::fc_backward_input(d_img_fc_pre.ptr(), params.at("image_fc.w").ptr(), d_img_flat.ptr(),
                             batch, img_flat, spec.fc_hidden);

        if (spec.audio_len) {
            Tensor d_aud_fc_pre = Tensor::zeros({batch, spec.fc_hidden});
            K::relu_backward(cache.aud_fc_pre.ptr(), d_aud_fc_post.ptr(), d_aud_fc_pre.ptr(),
                             d_aud_fc_pre.data.size());
            K::fc_backward_params(cache.aud_post2.ptr(), d_aud_fc_pre.ptr(),
                                  grads.at("audio_fc.w").ptr(), grads.at("audio_fc.b").ptr(),
                                  batch, aud_flat, spec.fc_hidden);
            K::fc_backward_input(d_aud_fc_pre.ptr(), params.at("audio_fc.w").ptr(),
                                 d_aud_flat.ptr(), batch, aud_flat, spec.fc_hidden);
        }
    } else {
        const int trunk = spec.trunk_inputs();
        K::fc_backward_params(cache.fc2_in.ptr(), dq.ptr(), grads.at("fc2.w").ptr(),
                              grads.at("fc2.b").ptr(), batch, spec.fc_hidden, spec.num_actions);
        Tensor d_fc1_post = Tensor::zeros({batch, spec.fc_hidden});
        K::fc_backward_input(dq.ptr(), params.at("fc2.w").ptr(), d_fc1_post.ptr(), batch,
                             spec.fc_hidden, spec.num_actions);

        Tensor d_fc1_pre = Tensor::zeros({batch, spec.fc_hidden});
        K::relu_backward(cache.fc1_pre.ptr(), d_fc1_post.ptr(), d_fc1_pre.ptr(),
                         d_fc1_pre.data.size());
        K::fc_backward_params(cache.trunk_in.ptr(), d_fc1_pre.ptr(), grads.at("fc1.w").ptr(),
                              grads.at("fc1.b").ptr(), batch, trunk, spec.fc_hidden);
        Tensor d_trunk = Tensor::zeros({batch, trunk});
        K::fc_backward_input(d_fc1_pre.ptr(), params.at("fc1.w").ptr(), d_trunk.ptr(), batch,
                             trunk, spec.fc_hidden);

        for (int b = 0; b < batch; ++b) {
            const float* row = d_trunk.ptr() + static_cast<size_t>(b) * trunk;
            std::memcpy(d_img_flat.ptr() + static_cast<size_t>(b) * img_flat, row,
                        sizeof(float) * img_flat);
            if (spec.audio_len) {
                std::memcpy(d_aud_flat.ptr() + static_cast<size_t>(b) * aud_flat, row + img_flat,
                            sizeof(float) * aud_flat);
            }
        }
    }

    // image head
    {
        Tensor d_img_pre2 = Tensor::zeros(cache.img_pre2.shape);
        K::relu_backward(cache.img_pre2.ptr(), d_img_flat.ptr(), d_img_pre2.ptr(),
                         d_img_pre2.data.size());
        K::conv2d_backward_params(cache.img_post1.ptr(), d_img_pre2.ptr(),
                                  grads.at("image_conv2.w").ptr(), grads.at("image_conv2.b").ptr(),
                                  batch, spec.conv1_filters, ls.img_h1, ls.img_w1,
                                  spec.conv2_filters, k, s);
        Tensor d_img_post1 = Tensor::zeros(cache.img_post1.shape);
        K::conv2d_backward_input(d_img_pre2.ptr(), params.at("image_conv2.w").ptr(),
                                 d_img_post1.ptr(), batch, spec.conv1_filters, ls.img_h1,
                                 ls.img_w1, spec.conv2_filters, k, s);
        Tensor d_img_pre1 = Tensor::zeros(cache.img_pre1.shape);
        K::relu_backward(cache.img_pre1.ptr(), d_img_post1.ptr(), d_img_pre1.ptr(),
                         d_img_pre1.data.size());
        K::conv2d_backward_params(cache.image_in.ptr(), d_img_pre1.ptr(),
                                  grads.at("image_conv1.w").ptr(), grads.at("image_conv1.b").ptr(),
                                  batch, spec.image_c, spec.image_h, spec.image_w,
                                  spec.conv1_filters, k, s);
        finite(grads.at("image_conv1.w"), "image_conv1");
    }

    // audio head
    if (spec.audio_len) {
        Tensor d_aud_pre2 = Tensor::zeros(cache.aud_pre2.shape);
        K::relu_backward(cache.aud_pre2.ptr(), d_aud_flat.ptr(), d_aud_pre2.ptr(),
                         d_aud_pre2.data.size());
        K::conv1d_backward_params(cache.aud_post1.ptr(), d_aud_pre2.ptr(),
                                  grads.at("audio_conv2.w").ptr(), grads.at("audio_conv2.b").ptr(),
                                  batch, spec.conv1_filters, ls.aud_l1, spec.conv2_filters, k, s);
        Tensor d_aud_post1 = Tensor::zeros(cache.aud_post1.shape);
        K::conv1d_backward_input(d_aud_pre2.ptr(), params.at("audio_conv2.w").ptr(),
                                 d_aud_post1.ptr(), batch, spec.conv1_filters, ls.aud_l1,
                                 spec.conv2_filters, k, s);
        Tensor d_aud_pre1 = Tensor::zeros(cache.aud_pre1.shape);
        K::relu_backward(cache.aud_pre1.ptr(), d_aud_post1.ptr(), d_aud_pre1.ptr(),
                         d_aud_pre1.data.size());
        K::conv1d_backward_params(cache.aud_in.ptr(), d_aud_pre1.ptr(),
                                  grads.at("audio_conv1.w").ptr(), grads.at("audio_conv1.b").ptr(),
                                  batch, 1, *spec.audio_len, spec.conv1_filters, k, s);
        finite(grads.at("audio_conv1.w"), "audio_conv1");
    }

    for (const auto& [name, g] : grads.tensors) finite(g, name.c_str());
    return grads;
}

HuberResult huber_loss(const Tensor& pred, const Tensor& target, double delta) {
    require(pred.shape == target.shape, "huber_loss: pred/target shape mismatch");
    const size_t n = pred.data.size();
    require(n > 0, "huber_loss: empty input");

    HuberResult r;
    r.grad = Tensor::zeros(pred.shape);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(pred.data[i]) - target.data[i];
        const double a = std::abs(e);
        total += a <= delta ? 0.5 * e * e : delta * (a - 0.5 * delta);
        r.grad.data[i] = static_cast<float>(std::clamp(e, -delta, delta) / n);
    }
    r.loss = total / n;
    return r;
}

void RmsPropState::ensure_initialized(const Parameters& params) {
    if (!v.empty()) return;
    v.reserve(params.tensors.size());
    for (const auto& [name, t] : params.tensors) v.push_back(Tensor::zeros(t.shape));
}

void rmsprop_step(Parameters& params, const Parameters& grads, RmsPropState& state) {
    require(params.tensors.size() == grads.tensors.size(),
            "rmsprop_step: parameter/gradient count mismatch");
    state.ensure_initialized(params);
    for (size_t i = 0; i < params.tensors.size(); ++i) {
        Tensor& p = params.tensors[i].second;
        const Tensor& g = grads.tensors[i].second;
        if (p.shape != g.shape) {
            throw std::invalid_argument("rmsprop_step: shape mismatch for " +
                                        params.tensors[i].first);
        }
        kernels::rmsprop_update(p.ptr(), g.ptr(), state.v[i].ptr(), p.data.size(),
                                static_cast<float>(state.lr), static_cast<float>(state.rho),
                                static_cast<float>(state.epsilon));
    }
}

namespace {

void put_u16_le(std::ostream& os, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    os.write(b, 2);
}

void put_u32_le(std::ostream& os, uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

struct CheckpointReader {
    std::ifstream is;
    uint64_t offset = 0;

    explicit CheckpointReader(const std::string& path) : is(path, std::ios::binary) {
        if (!is) throw std::runtime_error("load_params: cannot open " + path);
    }

    void read(void* dst, size_t n) {
        is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(is.gcount()) != n) {
            throw std::runtime_error("load_params: truncated checkpoint at byte " +
                                     std::to_string(offset + is.gcount()));
        }
        offset += n;
    }

    uint16_t u16() {
        unsigned char b[2];
        read(b, 2);
        return static_cast<uint16_t>(b[0] | (b[1] << 8));
    }
    uint32_t u32() {
        unsigned char b[4];
        read(b, 4);
        return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
    }
};

}  // namespace

void save_params(const Parameters& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_params: cannot open " + path);

    os.write("MMDQ", 4);
    put_u32_le(os, 1);  // format version
    put_u32_le(os, static_cast<uint32_t>(params.tensors.size()));
    for (const auto& [name, t] : params.tensors) {
        put_u16_le(os, static_cast<uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(t.shape.size()));
        for (int dim : t.shape) put_u32_le(os, static_cast<uint32_t>(dim));
        for (float v : t.data) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32_le(os, bits);
        }
    }
    if (!os) throw std::runtime_error("save_params: write failed for " + path);
}

Parameters load_params(const std::string& path) {
    CheckpointReader r(path);

    char magic[4];
    r.read(magic, 4);
    if (std::memcmp(magic, "MMDQ", 4) != 0) {
        throw std::runtime_error("load_params: bad magic in " + path);
    }
    const uint32_t version = r.u32();
    if (version != 1) {
        throw std::runtime_error("load_params: unsupported checkpoint version " +
                                 std::to_string(version) + " (expected 1)");
    }
    const uint32_t count = r.u32();
    Parameters params;
    params.tensors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t name_len = r.u16();
        std::string name(name_len, '\0');
        r.read(name.data(), name_len);
        unsigned char rank;
        r.read(&rank, 1);
        std::vector<int> shape(rank);
        int64_t n = 1;
        for (int d = 0; d < rank; ++d) {
            shape[d] = static_cast<int>(r.u32());
            n *= shape[d];
        }
        Tensor t = Tensor::zeros(shape);
        for (int64_t j = 0; j < n; ++j) {
            uint32_t bits = r.u32();
            std::memcpy(&t.data[static_cast<size_t>(j)], &bits, 4);
        }
        params.tensors.emplace_back(std::move(name), std::move(t));
    }
    return params;
}

}  // namespace mmdqn
