// Acceptance suite: runs each acceptance criterion end to end and prints
// one [PASS]/[FAIL] line per criterion (criterion 5 is a soft ordering
// check and prints [FLAG] instead of failing). Exit code is the number of
// failed hard criteria.
//
// The scaled experiments (3-5) train real agents and take the bulk of the
// time; their artifacts land in acceptance_runs/ for inspection. Use
// --only N to run a subset and --workers N to change run parallelism.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers/fd_reference.hpp"
#include "helpers/toy_mdp.hpp"
#include "mmdqn/harness.hpp"
#include "mmdqn/kernels.hpp"

using namespace mmdqn;
namespace fs = std::filesystem;

namespace {

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

struct CheckLog {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << "    FAILED: " << what << "\n";
        }
    }
};

// ---------------------------------------------------------------------------
// criterion 1: unit/property suite, must finish inside 2 minutes
// ---------------------------------------------------------------------------

AudioClip pure_sine(double f0, int rate, double duration) {
    AudioClip clip;
    clip.sample_rate = rate;
    int n = static_cast<int>(std::lround(rate * duration));
    clip.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        clip.samples[i] = static_cast<float>(0.8 * std::sin(2.0 * kPi * f0 * i / rate));
    }
    return clip;
}

double median_of(std::vector<float> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool criterion_unit_suite(std::string& detail) {
    const double t0 = now_s();
    CheckLog log;

    // gradient finite differences, 10 seeds
    for (uint64_t seed = 0; seed < 10; ++seed) {
        fd_oracle::FdResult r = fd_oracle::fd_gradient_check(seed);
        log.expect(r.failed == 0, "gradient FD seed " + std::to_string(seed) + ": " +
                                      std::to_string(r.failed) + " of " +
                                      std::to_string(r.checked) + " params above 1e-3");
    }

    // pitch extraction on 50 random tones, +-3%
    {
        Rng rng(77);
        for (int i = 0; i < 50; ++i) {
            double f0 = rng.next_range(100.0, 400.0);
            double est = median_of(extract_pitch(pure_sine(f0, 16000, 1.16)));
            log.expect(std::abs(est - f0) / f0 < 0.03,
                       "pitch error " + std::to_string(est) + " vs " + std::to_string(f0));
        }
    }

    // distance -> pitch -> distance round trip within 0.8 m
    {
        AudioConfig cfg;
        for (int d = 0; d <= 24; d += 2) {
            double f_est = median_of(extract_pitch(synthesize_clip(distance_to_f0(d, cfg), cfg)));
            double d_est = (1.0 - (f_est - cfg.f_min) / (cfg.f_max - cfg.f_min)) * cfg.d_max;
            log.expect(std::abs(d_est - d) <= 0.8,
                       "round trip d=" + std::to_string(d) + " -> " + std::to_string(d_est));
        }
    }

    // replay FIFO + uniform-sampling chi^2
    {
        ReplayMemory mem(50);
        auto tagged = [](int tag) {
            Transition t;
            t.s.image = Tensor::zeros({1});
            t.s_next.image = Tensor::zeros({1});
            t.action = tag;
            return t;
        };
        for (int i = 0; i < 64; ++i) mem.push(tagged(i));
        std::set<int> tags;
        for (size_t i = 0; i < mem.size(); ++i) tags.insert(mem.at(i).action);
        bool fifo_ok = mem.size() == 50;
        for (int i = 0; i < 14; ++i) fifo_ok = fifo_ok && tags.count(i) == 0;
        for (int i = 14; i < 64; ++i) fifo_ok = fifo_ok && tags.count(i) == 1;
        log.expect(fifo_ok, "replay FIFO overwrite order");

        ReplayMemory uni(100);
        for (int i = 0; i < 100; ++i) uni.push(tagged(i));
        Rng rng(17);
        std::vector<double> counts(100, 0.0);
        const int draws = 100000;
        for (int i = 0; i < draws / 10; ++i) {
            for (const Transition* t : uni.sample(10, rng)) counts[t->action] += 1.0;
        }
        const double expect = draws / 100.0;
        double chi2 = 0.0;
        for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
        // 99.9th percentile of chi^2 with 99 dof is ~148.2
        log.expect(chi2 < 148.2, "uniform sampling chi2 = " + std::to_string(chi2));
    }

    // checkpoint bit-exact round trip
    {
        NetworkSpec spec = fd_oracle::tiny_spec();
        Rng rng(5);
        Parameters params = init_params(spec, rng);
        save_params(params, "acceptance_ckpt.mmdq");
        Parameters loaded = load_params("acceptance_ckpt.mmdq");
        bool same = loaded.tensors.size() == params.tensors.size();
        for (size_t i = 0; same && i < params.tensors.size(); ++i) {
            same = loaded.tensors[i].first == params.tensors[i].first &&
                   loaded.tensors[i].second.shape == params.tensors[i].second.shape &&
                   loaded.tensors[i].second.data == params.tensors[i].second.data;
        }
        log.expect(same, "checkpoint round trip not bit-exact");
        fs::remove("acceptance_ckpt.mmdq");
    }

    // raycast red-pixel presence/absence
    {
        RoomMap map = build_five_room_map();
        RenderConfig rc;
        auto count_red = [&](const Image& img) {
            int n = 0;
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    if (img.at(y, x, 0) > 0.9f && img.at(y, x, 1) < 0.1f) ++n;
            return n;
        };
        EpisodeState visible;
        visible.pose = {{0.0, 0.0}, 0.0};
        visible.goal = {2.0, 0.0};
        log.expect(count_red(render(visible, map, rc)) > 0, "goal ahead renders no red pixels");

        EpisodeState hidden;
        hidden.pose = {{0.0, 0.0}, 0.0};
        hidden.goal = {8.0, 3.2};  // behind the east room's side wall
        log.expect(count_red(render(hidden, map, rc)) == 0, "occluded goal leaks red pixels");
    }

    // epsilon schedule endpoints
    {
        EpsilonSchedule s;
        log.expect(epsilon_at(s, 0) == 1.0, "epsilon at step 0");
        log.expect(epsilon_at(s, s.anneal_steps) == s.eps_end, "epsilon at anneal end");
        log.expect(epsilon_at(s, s.anneal_steps * 10) == s.eps_end, "epsilon stays at eps_end");
        log.expect(std::abs(epsilon_at(s, s.anneal_steps / 2) - 0.55) < 1e-12,
                   "epsilon midpoint");
    }

    // Bellman target arithmetic
    {
        NetworkSpec spec;
        spec.kind = NetKind::LinearQ;
        spec.linear_inputs = 2;
        spec.num_actions = 2;
        Parameters p;
        p.tensors.emplace_back("fc.w", Tensor({2, 2}, {0.0f, 0.0f, 0.0f, 0.0f}));
        p.tensors.emplace_back("fc.b", Tensor({2}, {2.0f, -1.0f}));
        Transition t;
        t.s.image = Tensor({2}, {1.0f, 0.0f});
        t.s_next.image = Tensor({2}, {0.0f, 1.0f});
        t.action = 0;

        t.reward = 1.0f;
        t.done = true;
        const Transition* one[] = {&t};
        log.expect(std::abs(compute_targets(one, p, spec, 0.99)[0] - 1.0) < 1e-6,
                   "terminal Bellman target");

        t.reward = -10.0f;
        t.done = false;
        log.expect(std::abs(compute_targets(one, p, spec, 0.99)[0] - (-8.02)) < 1e-5,
                   "nonterminal Bellman target");
    }

    const double elapsed = now_s() - t0;
    log.expect(elapsed < 120.0, "suite exceeded 2 minutes: " + std::to_string(elapsed) + " s");

    std::ostringstream os;
    os << "gradient FD, pitch tolerance, beacon round trip, replay, checkpoint, raycast, "
          "epsilon, Bellman ("
       << static_cast<int>(elapsed) << " s)";
    detail = os.str() + (log.ok ? "" : "\n" + log.detail.str());
    return log.ok;
}

// ---------------------------------------------------------------------------
// criterion 2: toy-MDP value-iteration oracle, 3 seeds, under 5 minutes
// ---------------------------------------------------------------------------

bool criterion_toy_mdp(std::string& detail) {
    const double t0 = now_s();
    CheckLog log;
    std::ostringstream os;
    os << "L-inf vs value iteration:";
    for (uint64_t seed : {1, 2, 3}) {
        double err = toy::toy_mdp_error(seed, 20000);
        os << " seed" << seed << "=" << err;
        log.expect(err < 1e-2, "toy MDP seed " + std::to_string(seed) + " error " +
                                   std::to_string(err) + " >= 1e-2");
    }
    const double elapsed = now_s() - t0;
    log.expect(elapsed < 300.0, "toy MDP exceeded 5 minutes");
    os << " (" << static_cast<int>(elapsed) << " s)";
    detail = os.str() + (log.ok ? "" : "\n" + log.detail.str());
    return log.ok;
}

// ---------------------------------------------------------------------------
// scaled experiments (criteria 3-5)
// ---------------------------------------------------------------------------

struct ExpOutcome {
    std::vector<CurveRow> rows;
    RunStats eval;
};

ExperimentConfig experiment_config(Scenario sc, Modality m, double p, long steps) {
    ExperimentConfig cfg;
    cfg.scenario = sc;
    cfg.modality = m;
    cfg.audio_probability = p;
    cfg.render_resolution = 20;  // reduced-resolution option for desk-scale runtime
    cfg.dqn.total_steps = steps;
    cfg.seeds = {0, 1, 2};
    std::ostringstream dir;
    dir << "acceptance_runs/" << to_string(sc) << "_" << to_string(m);
    if (m != Modality::VisualOnly && p < 1.0) dir << "_p" << static_cast<int>(p * 100);
    cfg.out_dir = dir.str();
    return cfg;
}

// (config label, seed) -> outcome, filled by the worker pool
std::map<std::string, std::map<unsigned, ExpOutcome>> g_results;
std::mutex g_results_mutex;

std::string config_label(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << to_string(cfg.scenario) << "/" << to_string(cfg.modality);
    if (cfg.modality != Modality::VisualOnly) os << "/p" << cfg.audio_probability;
    return os.str();
}

void run_one(const ExperimentConfig& cfg, unsigned seed, bool do_eval) {
    const std::string label = config_label(cfg);
    {
        std::lock_guard<std::mutex> lock(g_results_mutex);
        if (g_results[label].count(seed)) return;  // already done (shared across criteria)
        std::printf("  [run] %s seed %u: %ld steps...\n", label.c_str(), seed,
                    cfg.dqn.total_steps);
        std::fflush(stdout);
    }
    const double t0 = now_s();
    TrainResult train = run_training(cfg, seed);
    ExpOutcome out;
    out.rows = train.rows;
    if (do_eval) out.eval = run_eval(train.params, cfg, seed);
    const double elapsed = now_s() - t0;
    {
        std::lock_guard<std::mutex> lock(g_results_mutex);
        std::printf("  [run] %s seed %u done in %.0f s (final window %.1f, success %.0f%%)\n",
                    label.c_str(), seed, elapsed,
                    out.rows.empty() ? 0.0 : out.rows.back().mean_return,
                    do_eval ? out.eval.success_rate : -1.0);
        std::fflush(stdout);
        g_results[label][seed] = std::move(out);
    }
}

int g_workers = 2;

void run_pool(const std::vector<std::pair<ExperimentConfig, unsigned>>& jobs, bool do_eval) {
    const int workers = std::max(1, g_workers);
    // With several single-threaded runs in flight the serial kernels avoid
    // oversubscribing the cores; a single worker keeps the OpenMP kernels.
    kernels::set_mode(workers > 1 ? kernels::Mode::Serial : kernels::Mode::OpenMP);
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                run_one(jobs[i].first, jobs[i].second, do_eval);
            }
        });
    }
    for (auto& t : pool) t.join();
    kernels::set_mode(kernels::Mode::OpenMP);
}

const std::map<unsigned, ExpOutcome>& results_for(const ExperimentConfig& cfg) {
    return g_results.at(config_label(cfg));
}

double final_quarter_mean(const std::vector<CurvePoint>& curve) {
    if (curve.empty()) return 0.0;
    size_t start = curve.size() - std::max<size_t>(1, curve.size() / 4);
    double acc = 0.0;
    for (size_t i = start; i < curve.size(); ++i) acc += curve[i].mean_return;
    return acc / static_cast<double>(curve.size() - start);
}

std::vector<CurvePoint> aggregate_of(const std::map<unsigned, ExpOutcome>& runs) {
    std::vector<std::vector<CurveRow>> rows;
    for (const auto& [seed, out] : runs) rows.push_back(out.rows);
    return aggregate_curves(rows);
}

bool criterion_big_room(std::string& detail) {
    ExperimentConfig visual = experiment_config(Scenario::BigRandom, Modality::VisualOnly, 1.0, 50000);
    ExperimentConfig pitch =
        experiment_config(Scenario::BigRandom, Modality::VisualPlusPitch, 1.0, 50000);

    std::vector<std::pair<ExperimentConfig, unsigned>> jobs;
    for (unsigned seed : {0u, 1u, 2u}) {
        jobs.push_back({visual, seed});
        jobs.push_back({pitch, seed});
    }
    run_pool(jobs, true);

    std::vector<RunStats> visual_stats, pitch_stats;
    for (const auto& [seed, out] : results_for(visual)) visual_stats.push_back(out.eval);
    for (const auto& [seed, out] : results_for(pitch)) pitch_stats.push_back(out.eval);
    AggregateStats va = aggregate_stats(visual_stats);
    AggregateStats pa = aggregate_stats(pitch_stats);

    CheckLog log;
    log.expect(pa.success_rate >= 90.0, "pitch success rate below 90%");
    log.expect(pa.mean_ticks < va.mean_ticks, "pitch mean ticks not below visual-only");

    std::ostringstream os;
    os << "pitch " << pa.success_rate << "%/" << pa.mean_ticks << " ticks vs visual "
       << va.success_rate << "%/" << va.mean_ticks << " ticks";
    detail = os.str() + (log.ok ? "" : "\n" + log.detail.str());
    return log.ok;
}

bool criterion_all_rooms(std::string& detail) {
    ExperimentConfig visual =
        experiment_config(Scenario::AllRooms, Modality::VisualOnly, 1.0, 100000);
    ExperimentConfig pitch =
        experiment_config(Scenario::AllRooms, Modality::VisualPlusPitch, 1.0, 100000);

    std::vector<std::pair<ExperimentConfig, unsigned>> jobs;
    for (unsigned seed : {0u, 1u, 2u}) {
        jobs.push_back({visual, seed});
        jobs.push_back({pitch, seed});
    }
    run_pool(jobs, true);

    const auto& vres = results_for(visual);
    const auto& pres = results_for(pitch);

    int seeds_with_gap = 0;
    std::ostringstream os;
    os << "success per seed:";
    for (unsigned seed : {0u, 1u, 2u}) {
        double vs = vres.at(seed).eval.success_rate;
        double ps = pres.at(seed).eval.success_rate;
        os << " s" << seed << " " << ps << "% vs " << vs << "%";
        if (ps - vs >= 15.0) ++seeds_with_gap;
    }

    double visual_final = final_quarter_mean(aggregate_of(vres));
    double pitch_final = final_quarter_mean(aggregate_of(pres));
    os << "; final-quarter mean return pitch " << pitch_final << " vs visual " << visual_final;

    CheckLog log;
    log.expect(seeds_with_gap >= 2, ">= 15-point success gap held in only " +
                                        std::to_string(seeds_with_gap) + " of 3 seeds");
    log.expect(pitch_final > visual_final,
               "aggregate pitch curve not above visual-only in the final quarter");
    detail = os.str() + (log.ok ? "" : "\n" + log.detail.str());
    return log.ok;
}

bool criterion_occasional_audio(std::string& detail) {
    // p = 1.0 and visual-only reuse the all-rooms runs from criterion 4.
    ExperimentConfig visual =
        experiment_config(Scenario::AllRooms, Modality::VisualOnly, 1.0, 100000);
    ExperimentConfig p100 =
        experiment_config(Scenario::AllRooms, Modality::VisualPlusPitch, 1.0, 100000);
    ExperimentConfig p50 =
        experiment_config(Scenario::AllRooms, Modality::VisualPlusPitch, 0.5, 100000);
    ExperimentConfig p20 =
        experiment_config(Scenario::AllRooms, Modality::VisualPlusPitch, 0.2, 100000);

    std::vector<std::pair<ExperimentConfig, unsigned>> jobs;
    for (unsigned seed : {0u, 1u, 2u}) {
        jobs.push_back({visual, seed});
        jobs.push_back({p100, seed});
        jobs.push_back({p50, seed});
        jobs.push_back({p20, seed});
    }
    run_pool(jobs, true);

    const double m_visual = final_quarter_mean(aggregate_of(results_for(visual)));
    const double m100 = final_quarter_mean(aggregate_of(results_for(p100)));
    const double m50 = final_quarter_mean(aggregate_of(results_for(p50)));
    const double m20 = final_quarter_mean(aggregate_of(results_for(p20)));

    std::ostringstream os;
    os << "final-quarter mean return: p1.0 " << m100 << " >= p0.5 " << m50 << " >= p0.2 " << m20
       << " >= visual " << m_visual;
    detail = os.str();

    // Also leave a combined learning-curve plot with the artifacts.
    std::vector<NamedCurve> curves = {
        {"visual", aggregate_of(results_for(visual))},
        {"pitch p=1.0", aggregate_of(results_for(p100))},
        {"pitch p=0.5", aggregate_of(results_for(p50))},
        {"pitch p=0.2", aggregate_of(results_for(p20))},
    };
    emit_plot(curves, "acceptance_runs/all_rooms_curves.svg");

    return m100 >= m50 && m50 >= m20 && m20 >= m_visual;
}

// ---------------------------------------------------------------------------
// criterion 6: byte-level determinism of a repeated experiment
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool criterion_determinism(std::string& detail) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::BigFixed;
    cfg.modality = Modality::VisualPlusRaw;
    cfg.render_resolution = 10;
    cfg.dqn.total_steps = 3000;
    cfg.dqn.warmup = 300;
    cfg.report_window = 1000;
    cfg.seeds = {5};

    kernels::set_mode(kernels::Mode::OpenMP);
    cfg.out_dir = "acceptance_runs/determinism_a";
    TrainResult first = run_training(cfg, 5);
    RunStats eval_first = run_eval(first.params, cfg, 5);

    // Second pass under the serial kernels: the bytes must not depend on
    // the kernel dispatch mode or thread count either.
    kernels::set_mode(kernels::Mode::Serial);
    cfg.out_dir = "acceptance_runs/determinism_b";
    TrainResult second = run_training(cfg, 5);
    RunStats eval_second = run_eval(second.params, cfg, 5);
    kernels::set_mode(kernels::Mode::OpenMP);

    CheckLog log;
    log.expect(slurp("acceptance_runs/determinism_a/train_s5.csv") ==
                   slurp("acceptance_runs/determinism_b/train_s5.csv"),
               "training CSV bytes differ between repeated runs");
    log.expect(slurp("acceptance_runs/determinism_a/model_s5.mmdq") ==
                   slurp("acceptance_runs/determinism_b/model_s5.mmdq"),
               "checkpoint bytes differ between repeated runs");
    log.expect(slurp("acceptance_runs/determinism_a/eval_s5.csv") ==
                   slurp("acceptance_runs/determinism_b/eval_s5.csv"),
               "eval CSV bytes differ between repeated runs");
    log.expect(eval_first.success_rate == eval_second.success_rate,
               "eval success rates differ");

    detail = "train CSV + checkpoint + eval CSV byte-identical across repeats and kernel modes";
    if (!log.ok) detail += "\n" + log.detail.str();
    return log.ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) {
            g_workers = std::atoi(argv[++i]);
        }
    }

    struct Criterion {
        int id;
        const char* name;
        bool soft;
        std::function<bool(std::string&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "unit/property suite (< 2 min)", false, criterion_unit_suite},
        {2, "toy-MDP value-iteration oracle (< 5 min)", false, criterion_toy_mdp},
        {3, "scaled big-room experiment (pitch >= 90%, fewer ticks than visual)", false,
         criterion_big_room},
        {4, "all-rooms directional check (>= 15-point gap, pitch curve above visual)", false,
         criterion_all_rooms},
        {5, "occasional-audio ordering p1.0 >= p0.5 >= p0.2 >= visual (soft)", true,
         criterion_occasional_audio},
        {6, "determinism: repeated runs byte-identical", false, criterion_determinism},
    };

    fs::create_directories("acceptance_runs");

    int hard_failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        std::printf("criterion %d: %s\n", c.id, c.name);
        std::fflush(stdout);
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const char* verdict = ok ? "[PASS]" : (c.soft ? "[FLAG]" : "[FAIL]");
        if (!ok && !c.soft) ++hard_failures;
        std::printf("%s criterion %d: %s\n    %s\n", verdict, c.id, c.name, detail.c_str());
        std::fflush(stdout);
    }
    return hard_failures;
}
