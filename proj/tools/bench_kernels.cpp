// Times the serial reference kernels against the OpenMP variants on the
// shapes the training loop actually uses, and a full train_step for scale.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "mmdqn/audio.hpp"
#include "mmdqn/dqn.hpp"
#include "mmdqn/kernels.hpp"
#include "mmdqn/rng.hpp"

using namespace mmdqn;
namespace K = mmdqn::kernels;

namespace {

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

std::vector<float> random_vec(size_t n, Rng& rng) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(rng.next_range(-1.0, 1.0));
    return v;
}

template <typename F>
double time_ms(F&& fn, int iters) {
    fn();  // warm up
    double t0 = now_ms();
    for (int i = 0; i < iters; ++i) fn();
    return (now_ms() - t0) / iters;
}

void report(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-28s serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", name, serial_ms,
                omp_ms, serial_ms / omp_ms);
}

}  // namespace

int main() {
    Rng rng(1);

    {
        const int B = 64, in = 688, out = 128;
        auto x = random_vec(static_cast<size_t>(B) * in, rng);
        auto w = random_vec(static_cast<size_t>(out) * in, rng);
        auto b = random_vec(out, rng);
        std::vector<float> y(static_cast<size_t>(B) * out);
        auto run = [&] { K::fc_forward(x.data(), w.data(), b.data(), y.data(), B, in, out); };
        K::set_mode(K::Mode::Serial);
        double s = time_ms(run, 200);
        K::set_mode(K::Mode::OpenMP);
        double p = time_ms(run, 200);
        report("fc_forward 64x688->128", s, p);
    }
    {
        const int B = 64, C = 3, H = 40, W = 40, OC = 8, k = 3, s2 = 2;
        const int OH = K::conv_out_size(H, k, s2), OW = K::conv_out_size(W, k, s2);
        auto x = random_vec(static_cast<size_t>(B) * C * H * W, rng);
        auto w = random_vec(static_cast<size_t>(OC) * C * k * k, rng);
        auto b = random_vec(OC, rng);
        std::vector<float> y(static_cast<size_t>(B) * OC * OH * OW);
        auto run = [&] {
            K::conv2d_forward(x.data(), w.data(), b.data(), y.data(), B, C, H, W, OC, k, s2);
        };
        K::set_mode(K::Mode::Serial);
        double s = time_ms(run, 100);
        K::set_mode(K::Mode::OpenMP);
        double p = time_ms(run, 100);
        report("conv2d_forward 64x3x40x40", s, p);
    }
    {
        AudioConfig cfg;
        AudioClip clip = synthesize_clip(250.0, cfg);
        auto run = [&] { extract_pitch(clip); };
        // extract_pitch parallelizes over frames internally; compare via
        // thread limit rather than the kernel switch.
        double s, p;
        {
            omp_set_num_threads(1);
            s = time_ms(run, 10);
            omp_set_num_threads(omp_get_num_procs());
            p = time_ms(run, 10);
        }
        report("extract_pitch 1.16s clip", s, p);
    }
    {
        // One full gradient step on the pitch-modality network at the
        // acceptance-scale 20x20 resolution.
        NetworkSpec spec;
        spec.image_h = spec.image_w = 20;
        spec.audio_len = kPitchVectorLength;
        DqnConfig cfg;
        cfg.warmup = 64;
        cfg.replay_capacity = 256;
        Rng init(7);
        DqnTrainer trainer(spec, cfg, init);
        Rng fill(8);
        for (int i = 0; i < 128; ++i) {
            Transition t;
            t.s.image = Tensor::zeros({3, 20, 20});
            for (float& v : t.s.image.data) v = static_cast<float>(fill.next_double());
            t.s.audio = random_vec(kPitchVectorLength, fill);
            t.s_next = t.s;
            t.action = static_cast<int>(fill.next_below(4));
            t.reward = -10.0f;
            trainer.memory().push(std::move(t));
        }
        Rng sample(9);
        auto run = [&] { trainer.train_step(sample); };
        K::set_mode(K::Mode::Serial);
        double s = time_ms(run, 30);
        K::set_mode(K::Mode::OpenMP);
        double p = time_ms(run, 30);
        report("train_step pitch 20x20", s, p);
    }
    return 0;
}
