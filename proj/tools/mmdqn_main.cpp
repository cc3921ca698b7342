// Command-line front end: train / eval / report plus small inspection
// subcommands for the map, rendered frames, and the audio beacon.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "mmdqn/harness.hpp"

using namespace mmdqn;

namespace {

struct CommonFlags {
    std::string config_file;
    std::string scenario;
    std::string modality;
    double audio_prob = -1.0;
    long steps = -1;
    std::string out_dir;
};

ExperimentConfig build_config(const CommonFlags& f) {
    ExperimentConfig cfg;
    if (!f.config_file.empty()) cfg = load_config(f.config_file, cfg);
    // CLI flags override file values.
    if (!f.scenario.empty()) cfg.scenario = scenario_from_string(f.scenario);
    if (!f.modality.empty()) cfg.modality = modality_from_string(f.modality);
    if (f.audio_prob >= 0.0) cfg.audio_probability = f.audio_prob;
    if (f.steps >= 0) cfg.dqn.total_steps = f.steps;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmdqn: audio-augmented deep Q-learning navigation"};
    app.require_subcommand(1);

    CommonFlags flags;
    unsigned seed = 0;
    int episodes = 100;
    std::string checkpoint, in_dir, out_path;

    CLI::App* train = app.add_subcommand("train", "train one seed and write CSV + checkpoint");
    train->add_option("--config", flags.config_file, "INI config file");
    train->add_option("--scenario", flags.scenario, "big-random|big-fixed|all-rooms");
    train->add_option("--modality", flags.modality, "visual|raw|pitch");
    train->add_option("--audio-prob", flags.audio_prob, "audio presence probability (0,1]");
    train->add_option("--seed", seed, "run seed");
    train->add_option("--steps", flags.steps, "total training steps");
    train->add_option("--out", flags.out_dir, "output directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint over episodes");
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--config", flags.config_file, "INI config file");
    eval->add_option("--scenario", flags.scenario, "big-random|big-fixed|all-rooms");
    eval->add_option("--modality", flags.modality, "visual|raw|pitch");
    eval->add_option("--audio-prob", flags.audio_prob, "audio presence probability (0,1]");
    eval->add_option("--episodes", episodes, "evaluation episodes");
    eval->add_option("--seed", seed, "evaluation seed");
    eval->add_option("--out", flags.out_dir, "output directory");

    CLI::App* report = app.add_subcommand("report", "aggregate training CSVs into an SVG plot");
    report->add_option("--in", in_dir, "directory of runs (one subdirectory per curve)")
        ->required();
    report->add_option("--out", out_path, "output SVG path")->required();

    CLI::App* dump_map = app.add_subcommand("dump-map", "write the room rectangles as text");
    std::string map_out = "-";
    dump_map->add_option("--out", map_out, "output file, or - for stdout");

    CLI::App* render_frame = app.add_subcommand("render-frame", "write one frame as a PPM image");
    double fx = 0.0, fy = 0.0, fheading = 0.0, gx = 3.5, gy = 3.5;
    int fres = 40;
    render_frame->add_option("--x", fx, "agent x (m)");
    render_frame->add_option("--y", fy, "agent y (m)");
    render_frame->add_option("--heading-deg", fheading, "agent heading (degrees)");
    render_frame->add_option("--goal-x", gx, "goal x (m)");
    render_frame->add_option("--goal-y", gy, "goal y (m)");
    render_frame->add_option("--resolution", fres, "frame resolution");
    render_frame->add_option("--out", out_path, "output PPM path")->required();

    CLI::App* synth = app.add_subcommand("synth-beacon", "write the beacon clip as a WAV file");
    double beacon_distance = 0.0;
    synth->add_option("--distance", beacon_distance, "distance to encode (m)")->required();
    synth->add_option("--out", out_path, "output WAV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            ExperimentConfig cfg = build_config(flags);
            cfg.seeds = {seed};
            cfg.validate();
            TrainResult result = run_training(cfg, seed);
            std::cout << "trained " << to_string(cfg.modality) << " on " << to_string(cfg.scenario)
                      << " seed " << seed << " for " << cfg.dqn.total_steps << " steps\n"
                      << "curve: " << result.csv_path << "\n"
                      << "checkpoint: " << result.checkpoint_path << "\n";
        } else if (eval->parsed()) {
            ExperimentConfig cfg = build_config(flags);
            cfg.eval_episodes = episodes;
            cfg.validate();
            Parameters params = load_params(checkpoint);
            RunStats stats = run_eval(params, cfg, seed);
            std::cout << "episodes: " << cfg.eval_episodes << "\n"
                      << "success_rate: " << stats.success_rate << "\n"
                      << "mean_ticks: " << stats.mean_ticks << "\n"
                      << "mean_return: " << stats.mean_return << "\n";
        } else if (report->parsed()) {
            std::vector<NamedCurve> curves = collect_curves(in_dir);
            emit_plot(curves, out_path);
            std::cout << "wrote " << out_path << " (" << curves.size() << " curves)\n";
        } else if (dump_map->parsed()) {
            RoomMap map = build_five_room_map();
            if (map_out == "-") {
                map.dump(std::cout);
            } else {
                std::ofstream os(map_out);
                if (!os) throw std::runtime_error("cannot open " + map_out);
                map.dump(os);
            }
        } else if (render_frame->parsed()) {
            RoomMap map = build_five_room_map();
            EpisodeState state;
            state.pose = {{fx, fy}, wrap_angle(fheading * kPi / 180.0)};
            state.goal = {gx, gy};
            state.timeout = 1;
            RenderConfig rc;
            rc.resolution = fres;
            write_ppm(render(state, map, rc), out_path);
            std::cout << "wrote " << out_path << "\n";
        } else if (synth->parsed()) {
            AudioConfig cfg;
            write_wav(synthesize_clip(distance_to_f0(beacon_distance, cfg), cfg), out_path);
            std::cout << "wrote " << out_path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
