#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmdqn/audio.hpp"
#include "mmdqn/dqn.hpp"
#include "mmdqn/renderer.hpp"
#include "mmdqn/world.hpp"

namespace mmdqn {

enum class Modality { VisualOnly, VisualPlusRaw, VisualPlusPitch };

enum class Scenario { BigRandom, BigFixed, AllRooms };

std::string to_string(Modality m);
std::string to_string(Scenario s);
Modality modality_from_string(const std::string& s);  // visual | raw | pitch
Scenario scenario_from_string(const std::string& s);  // big-random | big-fixed | all-rooms

struct ExperimentConfig {
    Scenario scenario = Scenario::BigRandom;
    Modality modality = Modality::VisualOnly;
    double audio_probability = 1.0;
    std::vector<unsigned> seeds{0, 1, 2, 3, 4};
    int eval_episodes = 100;
    long report_window = 2000;  // agent steps per learning-curve point
    int render_resolution = 40;
    int timeout = 0;  // 0 = scenario default (1000 big room, 2100 all rooms)
    int frame_skip = 10;
    double goal_clearance = 1.0;

    DynamicsConfig dynamics;
    RenderConfig render;
    AudioConfig audio;
    DqnConfig dqn;

    std::string out_dir;  // empty = keep results in memory only

    int effective_timeout() const;
    SpawnConfig spawn_config() const;
    NetworkSpec network_spec() const;
    // anneal_steps <= 0 means auto: total_steps / 6 (the 100k/600k ratio).
    EpsilonSchedule effective_schedule() const;
    void validate() const;
};

// INI-style config file: [section] headers, key = value lines, # or ;
// comments. Unknown sections or keys are errors.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void apply_config_text(ExperimentConfig& cfg, const std::string& text,
                       const std::string& origin);

// Renders the frame and attaches audio features with probability
// audio_probability (always for p = 1). Withheld audio is a zero vector
// with audio_present = false. Audio features come from the cache's 0.1 m
// distance grid. Exactly one rng draw per call when the modality has audio.
Observation make_observation(const EpisodeState& state, const RoomMap& map,
                             const ExperimentConfig& cfg, const FeatureCache* cache, Rng& rng);

struct CurveRow {
    unsigned seed = 0;
    long step = 0;
    double mean_return = 0.0;
    double mean_ticks = 0.0;
    double epsilon = 0.0;
};

struct EpisodeStat {
    double ret = 0.0;
    long ticks = 0;
    bool success = false;
};

struct RunStats {
    std::vector<EpisodeStat> episodes;
    double success_rate = 0.0;  // percent
    double mean_ticks = 0.0;
    double mean_return = 0.0;
};

struct TrainResult {
    Parameters params;
    std::vector<CurveRow> rows;
    std::string csv_path;         // written files when out_dir is set
    std::string checkpoint_path;
};

// Full DQN training run for one seed. When out_dir is set, writes
// train_s<seed>.csv and model_s<seed>.mmdq there.
TrainResult run_training(const ExperimentConfig& cfg, unsigned seed);

// 100-episode greedy evaluation (eps = eps_eval). When out_dir is set,
// writes eval_s<seed>.csv.
RunStats run_eval(const Parameters& params, const ExperimentConfig& cfg, unsigned seed);

struct CurvePoint {
    long step = 0;
    double mean_return = 0.0;
    double mean_ticks = 0.0;
};

// Element-wise mean across runs (truncated to the shortest run).
std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<CurveRow>>& runs);

struct AggregateStats {
    double success_rate = 0.0;
    double mean_ticks = 0.0;
    double mean_return = 0.0;
};
AggregateStats aggregate_stats(const std::vector<RunStats>& runs);

struct NamedCurve {
    std::string label;
    std::vector<CurvePoint> points;
};

// Learning-curve plot: one polyline per curve, axes, legend; SVG 1.1.
void emit_plot(const std::vector<NamedCurve>& curves, const std::string& path);

// CSV helpers (schemas: "seed,step,mean_return,mean_ticks,epsilon" and
// "seed,episode,return,ticks,success").
void write_train_csv(const std::string& path, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_train_csv(const std::string& path);
void write_eval_csv(const std::string& path, unsigned seed,
                    const std::vector<EpisodeStat>& episodes);
std::vector<EpisodeStat> read_eval_csv(const std::string& path);

// One NamedCurve per subdirectory of `dir` containing train_*.csv files
// (seeds aggregated); when `dir` itself holds the CSVs, a single curve.
std::vector<NamedCurve> collect_curves(const std::string& dir);

}  // namespace mmdqn
