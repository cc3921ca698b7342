#pragma once

#include <span>
#include <vector>

#include "mmdqn/net.hpp"
#include "mmdqn/rng.hpp"

namespace mmdqn {

// Network input for one step: rendered frame plus the optional audio
// feature vector. Absent audio is an all-zero vector with the presence
// flag cleared, so the network input shape never changes.
struct Observation {
    Tensor image;              // [C, H, W]
    std::vector<float> audio;  // empty when the modality has no audio head
    bool audio_present = false;
};

struct Transition {
    Observation s;
    int action = 0;
    float reward = 0.0f;
    Observation s_next;
    bool done = false;
};

// Fixed-capacity FIFO ring of transitions.
class ReplayMemory {
public:
    explicit ReplayMemory(size_t capacity = 10000);

    void push(Transition t);
    size_t size() const { return size_; }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return buffer_[i]; }

    // `count` distinct uniformly drawn transitions.
    std::vector<const Transition*> sample(size_t count, Rng& rng) const;

private:
    size_t capacity_;
    size_t cursor_ = 0;
    size_t size_ = 0;
    std::vector<Transition> buffer_;
};

// Linear anneal from eps_start to eps_end over anneal_steps, constant after.
struct EpsilonSchedule {
    double eps_start = 1.0;
    double eps_end = 0.1;
    long anneal_steps = 100000;
    double eps_eval = 0.05;
};

double epsilon_at(const EpsilonSchedule& schedule, long step);

struct DqnConfig {
    double gamma = 0.99;
    int batch_size = 64;
    double lr = 0.00025;
    double rmsprop_rho = 0.95;
    double rmsprop_eps = 1e-6;
    long target_sync_period = 1000;  // training steps between target syncs
    long warmup = 1000;              // transitions stored before learning starts
    long total_steps = 50000;        // desk-scale default; the full-scale run uses 600000
    size_t replay_capacity = 10000;
    EpsilonSchedule schedule;
};

// Epsilon-greedy action choice; greedy ties break toward the lowest index.
int select_action(const Parameters& params, const NetworkSpec& spec, const Observation& obs,
                  double eps, Rng& rng);

// Bellman targets y_i = r_i + gamma * max_a Q_target(s'_i, a) * (1 - done_i).
std::vector<float> compute_targets(std::span<const Transition* const> batch,
                                   const Parameters& target_params, const NetworkSpec& spec,
                                   double gamma);

// Discounted return of a reward sequence.
double episode_return(std::span<const double> rewards, double gamma);

// Owns the online network, target network, optimizer state, and replay
// memory; runs one gradient step per call.
class DqnTrainer {
public:
    DqnTrainer(NetworkSpec spec, DqnConfig cfg, Rng& init_rng);

    // Samples a minibatch, regresses the taken-action Q-values onto the
    // Bellman targets with Huber loss, applies one RMSProp step, and syncs
    // the target network every target_sync_period updates. Throws
    // std::logic_error before warmup transitions are stored.
    double train_step(Rng& rng);

    ReplayMemory& memory() { return memory_; }
    const Parameters& params() const { return params_; }
    const Parameters& target_params() const { return target_; }
    const NetworkSpec& spec() const { return spec_; }
    const DqnConfig& config() const { return cfg_; }
    long updates_done() const { return updates_; }

    void sync_target();

private:
    NetworkSpec spec_;
    DqnConfig cfg_;
    Parameters params_;
    Parameters target_;
    RmsPropState opt_;
    ReplayMemory memory_;
    long updates_ = 0;
};

// Stacks observations into network input tensors ([B,C,H,W] and [B,1,L]).
struct BatchInput {
    Tensor image;
    Tensor audio;
    bool has_audio = false;
};
BatchInput stack_observations(std::span<const Transition* const> batch, bool next,
                              const NetworkSpec& spec);

}  // namespace mmdqn
