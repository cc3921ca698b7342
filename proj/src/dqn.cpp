#include "mmdqn/dqn.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace mmdqn {

ReplayMemory::ReplayMemory(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
    buffer_.reserve(capacity);
}

void ReplayMemory::push(Transition t) {
    if (size_ < capacity_) {
        buffer_.push_back(std::move(t));
        ++size_;
    } else {
        buffer_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayMemory::sample(size_t count, Rng& rng) const {
    if (count > size_) {
        throw std::invalid_argument("ReplayMemory::sample: batch larger than stored transitions");
    }
    // Floyd's algorithm: `count` distinct indices in [0, size).
    std::vector<size_t> picked;
    picked.reserve(count);
    for (size_t j = size_ - count; j < size_; ++j) {
        size_t t = rng.next_below(static_cast<uint32_t>(j + 1));
        if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
            picked.push_back(t);
        } else {
            picked.push_back(j);
        }
    }
    std::vector<const Transition*> out;
    out.reserve(count);
    for (size_t idx : picked) out.push_back(&buffer_[idx]);
    return out;
}

double epsilon_at(const EpsilonSchedule& schedule, long step) {
    if (step < 0) throw std::invalid_argument("epsilon_at: negative step");
    if (schedule.anneal_steps <= 0 || step >= schedule.anneal_steps) return schedule.eps_end;
    double frac = static_cast<double>(step) / schedule.anneal_steps;
    return schedule.eps_start + (schedule.eps_end - schedule.eps_start) * frac;
}

namespace {

Tensor observation_image_batch(const Observation& obs) {
    Tensor t = obs.image;
    t.shape.insert(t.shape.begin(), 1);
    return t;
}

Tensor observation_audio_batch(const Observation& obs) {
    Tensor t;
    t.shape = {1, 1, static_cast<int>(obs.audio.size())};
    t.data = obs.audio;
    return t;
}

}  // namespace

int select_action(const Parameters& params, const NetworkSpec& spec, const Observation& obs,
                  double eps, Rng& rng) {
    if (rng.next_double() < eps) {
        return static_cast<int>(rng.next_below(static_cast<uint32_t>(spec.num_actions)));
    }
    Tensor image = observation_image_batch(obs);
    Tensor q;
    if (spec.audio_len) {
        Tensor audio = observation_audio_batch(obs);
        q = forward(params, spec, image, &audio);
    } else {
        q = forward(params, spec, image);
    }
    int best = 0;
    for (int a = 1; a < spec.num_actions; ++a) {
        if (q.data[a] > q.data[best]) best = a;  // ties keep the lowest index
    }
    return best;
}

BatchInput stack_observations(std::span<const Transition* const> batch, bool next,
                              const NetworkSpec& spec) {
    const int b = static_cast<int>(batch.size());
    BatchInput in;
    in.image = spec.kind == NetKind::LinearQ
                   ? Tensor::zeros({b, spec.linear_inputs})
                   : Tensor::zeros({b, spec.image_c, spec.image_h, spec.image_w});
    const size_t img_stride = in.image.data.size() / b;
    if (spec.audio_len) {
        in.has_audio = true;
        in.audio = Tensor::zeros({b, 1, *spec.audio_len});
    }
    for (int i = 0; i < b; ++i) {
        const Observation& obs = next ? batch[i]->s_next : batch[i]->s;
        if (obs.image.data.size() != img_stride) {
            throw std::invalid_argument("stack_observations: image size mismatch");
        }
        std::memcpy(in.image.ptr() + static_cast<size_t>(i) * img_stride, obs.image.ptr(),
                    img_stride * sizeof(float));
        if (spec.audio_len) {
            if (static_cast<int>(obs.audio.size()) != *spec.audio_len) {
                throw std::invalid_argument("stack_observations: audio length mismatch");
            }
            std::memcpy(in.audio.ptr() + static_cast<size_t>(i) * *spec.audio_len,
                        obs.audio.data(), obs.audio.size() * sizeof(float));
        }
    }
    return in;
}

std::vector<float> compute_targets(std::span<const Transition* const> batch,
                                   const Parameters& target_params, const NetworkSpec& spec,
                                   double gamma) {
    BatchInput next = stack_observations(batch, true, spec);
    Tensor q = forward(target_params, spec, next.image, next.has_audio ? &next.audio : nullptr);

    const int b = static_cast<int>(batch.size());
    std::vector<float> targets(b);
    for (int i = 0; i < b; ++i) {
        const float* row = q.ptr() + static_cast<size_t>(i) * spec.num_actions;
        float best = row[0];
        for (int a = 1; a < spec.num_actions; ++a) best = std::max(best, row[a]);
        const Transition& t = *batch[i];
        targets[i] = t.reward + (t.done ? 0.0f : static_cast<float>(gamma) * best);
    }
    return targets;
}

double episode_return(std::span<const double> rewards, double gamma) {
    double acc = 0.0;
    double factor = 1.0;
    for (double r : rewards) {
        acc += factor * r;
        factor *= gamma;
    }
    return acc;
}

DqnTrainer::DqnTrainer(NetworkSpec spec, DqnConfig cfg, Rng& init_rng)
    : spec_(spec), cfg_(cfg), memory_(cfg.replay_capacity) {
    if (cfg_.batch_size > cfg_.warmup) {
        throw std::invalid_argument("DqnTrainer: batch_size must not exceed warmup");
    }
    if (cfg_.gamma <= 0.0 || cfg_.gamma > 1.0) {
        throw std::invalid_argument("DqnTrainer: gamma must be in (0, 1]");
    }
    params_ = init_params(spec_, init_rng);
    target_ = copy_params(params_);
    opt_.lr = cfg_.lr;
    opt_.rho = cfg_.rmsprop_rho;
    opt_.epsilon = cfg_.rmsprop_eps;
}

void DqnTrainer::sync_target() { target_ = copy_params(params_); }

double DqnTrainer::train_step(Rng& rng) {
    if (static_cast<long>(memory_.size()) < cfg_.warmup) {
        throw std::logic_error("train_step: called before warmup transitions were stored");
    }

    std::vector<const Transition*> batch =
        memory_.sample(static_cast<size_t>(cfg_.batch_size), rng);
    std::vector<float> targets = compute_targets(batch, target_, spec_, cfg_.gamma);

    BatchInput in = stack_observations(batch, false, spec_);
    ForwardCache cache;
    Tensor q = forward(params_, spec_, in.image, in.has_audio ? &in.audio : nullptr, &cache);

    const int b = cfg_.batch_size;
    Tensor pred = Tensor::zeros({b});
    for (int i = 0; i < b; ++i) {
        pred.data[i] = q.data[static_cast<size_t>(i) * spec_.num_actions + batch[i]->action];
    }
    Tensor target_tensor({b}, std::move(targets));
    HuberResult loss = huber_loss(pred, target_tensor);

    // Only the taken action's Q participates in the loss.
    Tensor dq = Tensor::zeros(q.shape);
    for (int i = 0; i < b; ++i) {
        dq.data[static_cast<size_t>(i) * spec_.num_actions + batch[i]->action] =
            loss.grad.data[i];
    }

    Parameters grads = backward(params_, spec_, cache, dq);
    rmsprop_step(params_, grads, opt_);

    ++updates_;
    if (cfg_.target_sync_period > 0 && updates_ % cfg_.target_sync_period == 0) sync_target();
    return loss.loss;
}

}  // namespace mmdqn
