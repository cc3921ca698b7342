#include "mmdqn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace mmdqn {

std::string to_string(Modality m) {
    switch (m) {
        case Modality::VisualOnly: return "visual";
        case Modality::VisualPlusRaw: return "raw";
        case Modality::VisualPlusPitch: return "pitch";
    }
    return "?";
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::BigRandom: return "big-random";
        case Scenario::BigFixed: return "big-fixed";
        case Scenario::AllRooms: return "all-rooms";
    }
    return "?";
}

Modality modality_from_string(const std::string& s) {
    if (s == "visual") return Modality::VisualOnly;
    if (s == "raw") return Modality::VisualPlusRaw;
    if (s == "pitch") return Modality::VisualPlusPitch;
    throw std::invalid_argument("unknown modality '" + s + "' (visual|raw|pitch)");
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "big-random") return Scenario::BigRandom;
    if (s == "big-fixed") return Scenario::BigFixed;
    if (s == "all-rooms") return Scenario::AllRooms;
    throw std::invalid_argument("unknown scenario '" + s + "' (big-random|big-fixed|all-rooms)");
}

int ExperimentConfig::effective_timeout() const {
    if (timeout > 0) return timeout;
    return scenario == Scenario::AllRooms ? 2100 : 1000;
}

SpawnConfig ExperimentConfig::spawn_config() const {
    SpawnConfig s;
    s.goal_clearance = goal_clearance;
    switch (scenario) {
        case Scenario::BigRandom: s.mode = SpawnMode::BigRoomRandom; break;
        case Scenario::BigFixed: s.mode = SpawnMode::BigRoomFixed; break;
        case Scenario::AllRooms: s.mode = SpawnMode::AllRoomsRandom; break;
    }
    return s;
}

NetworkSpec ExperimentConfig::network_spec() const {
    NetworkSpec spec;
    spec.image_h = render_resolution;
    spec.image_w = render_resolution;
    spec.image_c = 3;
    if (modality == Modality::VisualPlusRaw) spec.audio_len = kRawVectorLength;
    if (modality == Modality::VisualPlusPitch) spec.audio_len = kPitchVectorLength;
    return spec;
}

EpsilonSchedule ExperimentConfig::effective_schedule() const {
    EpsilonSchedule s = dqn.schedule;
    if (s.anneal_steps <= 0) s.anneal_steps = std::max<long>(1, dqn.total_steps / 6);
    return s;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (modality != Modality::VisualOnly &&
        (audio_probability <= 0.0 || audio_probability > 1.0)) {
        throw std::invalid_argument("config: audio_prob must be in (0, 1]");
    }
    if (eval_episodes <= 0) throw std::invalid_argument("config: eval_episodes must be positive");
    if (report_window <= 0) throw std::invalid_argument("config: report_window must be positive");
    if (render_resolution < 7) {
        throw std::invalid_argument("config: render resolution must be >= 7");
    }
    if (frame_skip < 1) throw std::invalid_argument("config: frame_skip must be >= 1");
    if (dqn.batch_size > dqn.warmup) {
        throw std::invalid_argument("config: batch_size must not exceed warmup");
    }
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
    }
}

long parse_long(const std::string& v, const std::string& where) {
    try {
        size_t pos = 0;
        long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected an integer, got '" + v + "'");
    }
}

std::vector<unsigned> parse_seed_list(const std::string& v, const std::string& where) {
    std::vector<unsigned> seeds;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        seeds.push_back(static_cast<unsigned>(parse_long(item, where)));
    }
    if (seeds.empty()) throw std::invalid_argument(where + ": empty seed list");
    return seeds;
}

}  // namespace

void apply_config_text(ExperimentConfig& cfg, const std::string& text,
                       const std::string& origin) {
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') throw std::invalid_argument(where + ": malformed section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(where + ": expected 'key = value'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (section == "world") {
            if (key == "timeout") cfg.timeout = static_cast<int>(parse_long(value, where));
            else if (key == "goal_clearance") cfg.goal_clearance = parse_double(value, where);
            else if (key == "frame_skip") cfg.frame_skip = static_cast<int>(parse_long(value, where));
            else if (key == "move_step") cfg.dynamics.move_step = parse_double(value, where);
            else if (key == "turn_step_deg") cfg.dynamics.turn_step_deg = parse_double(value, where);
            else if (key == "goal_radius") cfg.dynamics.goal_radius = parse_double(value, where);
            else throw std::invalid_argument(where + ": unknown key '" + key + "' in [world]");
        } else if (section == "render") {
            if (key == "resolution") cfg.render_resolution = static_cast<int>(parse_long(value, where));
            else if (key == "fov_deg") cfg.render.fov = parse_double(value, where) * kPi / 180.0;
            else if (key == "max_depth") cfg.render.max_depth = parse_double(value, where);
            else throw std::invalid_argument(where + ": unknown key '" + key + "' in [render]");
        } else if (section == "audio") {
            if (key == "f_min") cfg.audio.f_min = parse_double(value, where);
            else if (key == "f_max") cfg.audio.f_max = parse_double(value, where);
            else if (key == "d_max") cfg.audio.d_max = parse_double(value, where);
            else if (key == "sample_rate") cfg.audio.sample_rate = static_cast<int>(parse_long(value, where));
            else if (key == "duration") cfg.audio.duration = parse_double(value, where);
            else throw std::invalid_argument(where + ": unknown key '" + key + "' in [audio]");
        } else if (section == "dqn") {
            if (key == "gamma") cfg.dqn.gamma = parse_double(value, where);
            else if (key == "batch_size") cfg.dqn.batch_size = static_cast<int>(parse_long(value, where));
            else if (key == "lr") cfg.dqn.lr = parse_double(value, where);
            else if (key == "rmsprop_rho") cfg.dqn.rmsprop_rho = parse_double(value, where);
            else if (key == "rmsprop_eps") cfg.dqn.rmsprop_eps = parse_double(value, where);
            else if (key == "target_sync_period") cfg.dqn.target_sync_period = parse_long(value, where);
            else if (key == "warmup") cfg.dqn.warmup = parse_long(value, where);
            else if (key == "total_steps") cfg.dqn.total_steps = parse_long(value, where);
            else if (key == "replay_capacity") cfg.dqn.replay_capacity = static_cast<size_t>(parse_long(value, where));
            else if (key == "eps_start") cfg.dqn.schedule.eps_start = parse_double(value, where);
            else if (key == "eps_end") cfg.dqn.schedule.eps_end = parse_double(value, where);
            else if (key == "anneal_steps") cfg.dqn.schedule.anneal_steps = parse_long(value, where);
            else if (key == "eps_eval") cfg.dqn.schedule.eps_eval = parse_double(value, where);
            else throw std::invalid_argument(where + ": unknown key '" + key + "' in [dqn]");
        } else if (section == "experiment") {
            if (key == "scenario") cfg.scenario = scenario_from_string(value);
            else if (key == "modality") cfg.modality = modality_from_string(value);
            else if (key == "audio_prob") cfg.audio_probability = parse_double(value, where);
            else if (key == "seeds") cfg.seeds = parse_seed_list(value, where);
            else if (key == "eval_episodes") cfg.eval_episodes = static_cast<int>(parse_long(value, where));
            else if (key == "report_window") cfg.report_window = parse_long(value, where);
            else if (key == "out_dir") cfg.out_dir = value;
            else throw std::invalid_argument(where + ": unknown key '" + key + "' in [experiment]");
        } else {
            throw std::invalid_argument(where + ": unknown section [" + section + "]");
        }
    }
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    apply_config_text(base, buffer.str(), path);
    return base;
}

Observation make_observation(const EpisodeState& state, const RoomMap& map,
                             const ExperimentConfig& cfg, const FeatureCache* cache, Rng& rng) {
    Observation obs;
    RenderConfig rc = cfg.render;
    rc.resolution = cfg.render_resolution;
    Image img = render(state, map, rc);

    const int res = rc.resolution;
    obs.image = Tensor::zeros({3, res, res});
    float* out = obs.image.ptr();
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < res; ++y) {
            for (int x = 0; x < res; ++x) {
                out[(static_cast<size_t>(c) * res + y) * res + x] = img.at(y, x, c);
            }
        }
    }

    if (cfg.modality == Modality::VisualOnly) return obs;

    if (cache == nullptr) {
        throw std::invalid_argument("make_observation: audio modality needs a feature cache");
    }
    const int len = feature_length(cache->kind());
    const double u = rng.next_double();
    if (u < cfg.audio_probability) {
        obs.audio = cache->lookup(distance_to_goal(state));
        obs.audio_present = true;
    } else {
        obs.audio.assign(static_cast<size_t>(len), 0.0f);
        obs.audio_present = false;
    }
    return obs;
}

namespace {

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

AudioFeatureKind feature_kind(Modality m) {
    return m == Modality::VisualPlusRaw ? AudioFeatureKind::Raw : AudioFeatureKind::Pitch;
}

}  // namespace

TrainResult run_training(const ExperimentConfig& cfg, unsigned seed) {
    cfg.validate();

    const RoomMap map = build_five_room_map();
    const NetworkSpec spec = cfg.network_spec();
    DqnConfig dqn = cfg.dqn;
    dqn.schedule = cfg.effective_schedule();

    Rng init_rng(derive_seed(seed, 0));
    Rng env_rng(derive_seed(seed, 1));
    Rng obs_rng(derive_seed(seed, 2));
    Rng agent_rng(derive_seed(seed, 3));
    Rng sample_rng(derive_seed(seed, 4));

    std::unique_ptr<FeatureCache> cache;
    if (cfg.modality != Modality::VisualOnly) {
        cache = std::make_unique<FeatureCache>(feature_kind(cfg.modality), cfg.audio);
    }

    DqnTrainer trainer(spec, dqn, init_rng);
    const SpawnConfig spawn = cfg.spawn_config();
    const int timeout = cfg.effective_timeout();

    EpisodeState state = reset(map, spawn, timeout, env_rng);
    Observation obs = make_observation(state, map, cfg, cache.get(), obs_rng);

    TrainResult result;
    double ep_return = 0.0;
    long ep_ticks = 0;
    std::vector<double> window_returns;
    std::vector<double> window_ticks;

    for (long step = 0; step < dqn.total_steps; ++step) {
        const double eps = epsilon_at(dqn.schedule, step);
        const int action = select_action(trainer.params(), spec, obs, eps, agent_rng);
        auto [next_state, outcome] =
            agent_step(state, static_cast<Action>(action), map, cfg.dynamics, cfg.frame_skip);
        Observation next_obs = make_observation(next_state, map, cfg, cache.get(), obs_rng);

        trainer.memory().push(
            {obs, action, static_cast<float>(outcome.reward), next_obs, outcome.done});
        if (static_cast<long>(trainer.memory().size()) >= dqn.warmup) {
            trainer.train_step(sample_rng);
        }

        ep_return += outcome.reward;
        ep_ticks += outcome.ticks_elapsed;
        if (outcome.done) {
            window_returns.push_back(ep_return);
            window_ticks.push_back(static_cast<double>(ep_ticks));
            ep_return = 0.0;
            ep_ticks = 0;
            state = reset(map, spawn, timeout, env_rng);
            obs = make_observation(state, map, cfg, cache.get(), obs_rng);
        } else {
            state = next_state;
            obs = std::move(next_obs);
        }

        if ((step + 1) % cfg.report_window == 0) {
            CurveRow row;
            row.seed = seed;
            row.step = step + 1;
            if (window_returns.empty()) {
                // No episode finished inside this window; report the
                // in-progress episode so every row is defined.
                row.mean_return = ep_return;
                row.mean_ticks = static_cast<double>(ep_ticks);
            } else {
                row.mean_return = mean_of(window_returns);
                row.mean_ticks = mean_of(window_ticks);
            }
            row.epsilon = epsilon_at(dqn.schedule, step + 1);
            result.rows.push_back(row);
            window_returns.clear();
            window_ticks.clear();
        }
    }

    result.params = copy_params(trainer.params());
    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        result.csv_path = cfg.out_dir + "/train_s" + std::to_string(seed) + ".csv";
        result.checkpoint_path = cfg.out_dir + "/model_s" + std::to_string(seed) + ".mmdq";
        write_train_csv(result.csv_path, result.rows);
        save_params(result.params, result.checkpoint_path);
    }
    return result;
}

RunStats run_eval(const Parameters& params, const ExperimentConfig& cfg, unsigned seed) {
    cfg.validate();

    const RoomMap map = build_five_room_map();
    const NetworkSpec spec = cfg.network_spec();
    const SpawnConfig spawn = cfg.spawn_config();
    const int timeout = cfg.effective_timeout();
    const double eps = cfg.dqn.schedule.eps_eval;

    Rng env_rng(derive_seed(seed, 11));
    Rng obs_rng(derive_seed(seed, 12));
    Rng agent_rng(derive_seed(seed, 13));

    std::unique_ptr<FeatureCache> cache;
    if (cfg.modality != Modality::VisualOnly) {
        cache = std::make_unique<FeatureCache>(feature_kind(cfg.modality), cfg.audio);
    }

    RunStats stats;
    int successes = 0;
    double ticks_total = 0.0;
    double return_total = 0.0;
    for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
        EpisodeState state = reset(map, spawn, timeout, env_rng);
        Observation obs = make_observation(state, map, cfg, cache.get(), obs_rng);
        EpisodeStat stat;
        while (!state.done) {
            int action = select_action(params, spec, obs, eps, agent_rng);
            auto [next_state, outcome] =
                agent_step(state, static_cast<Action>(action), map, cfg.dynamics, cfg.frame_skip);
            stat.ret += outcome.reward;
            stat.ticks += outcome.ticks_elapsed;
            state = next_state;
            if (!state.done) obs = make_observation(state, map, cfg, cache.get(), obs_rng);
        }
        stat.success = goal_reached(state, cfg.dynamics);
        successes += stat.success ? 1 : 0;
        ticks_total += static_cast<double>(stat.ticks);
        return_total += stat.ret;
        stats.episodes.push_back(stat);
    }

    stats.success_rate = 100.0 * successes / cfg.eval_episodes;
    stats.mean_ticks = ticks_total / cfg.eval_episodes;
    stats.mean_return = return_total / cfg.eval_episodes;

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        write_eval_csv(cfg.out_dir + "/eval_s" + std::to_string(seed) + ".csv", seed,
                       stats.episodes);
    }
    return stats;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<CurveRow>>& runs) {
    std::vector<CurvePoint> out;
    if (runs.empty()) return out;
    size_t len = runs.front().size();
    for (const auto& r : runs) len = std::min(len, r.size());
    for (size_t i = 0; i < len; ++i) {
        CurvePoint p;
        p.step = runs.front()[i].step;
        for (const auto& r : runs) {
            p.mean_return += r[i].mean_return;
            p.mean_ticks += r[i].mean_ticks;
        }
        p.mean_return /= static_cast<double>(runs.size());
        p.mean_ticks /= static_cast<double>(runs.size());
        out.push_back(p);
    }
    return out;
}

AggregateStats aggregate_stats(const std::vector<RunStats>& runs) {
    AggregateStats agg;
    if (runs.empty()) return agg;
    for (const RunStats& r : runs) {
        agg.success_rate += r.success_rate;
        agg.mean_ticks += r.mean_ticks;
        agg.mean_return += r.mean_return;
    }
    agg.success_rate /= static_cast<double>(runs.size());
    agg.mean_ticks /= static_cast<double>(runs.size());
    agg.mean_return /= static_cast<double>(runs.size());
    return agg;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void emit_plot(const std::vector<NamedCurve>& curves, const std::string& path) {
    const double width = 860, height = 520;
    const double ml = 80, mr = 190, mt = 30, mb = 60;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;

    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool any = false;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            if (!any) {
                x_min = x_max = static_cast<double>(p.step);
                y_min = y_max = p.mean_return;
                any = true;
            }
            x_min = std::min(x_min, static_cast<double>(p.step));
            x_max = std::max(x_max, static_cast<double>(p.step));
            y_min = std::min(y_min, p.mean_return);
            y_max = std::max(y_max, p.mean_return);
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) { return mt + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_plot: cannot open " + path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";

    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w
       << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + plot_h
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = x_min + (x_max - x_min) * i / 5.0;
        double fy = y_min + (y_max - y_min) * i / 5.0;
        os << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt + plot_h << "\" x2=\"" << sx(fx)
           << "\" y2=\"" << mt + plot_h + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << sx(fx) << "\" y=\"" << mt + plot_h + 20
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_num(fx) << "</text>\n";
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml << "\" y2=\""
           << sy(fy) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_num(fy) << "</text>\n";
    }
    os << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 15
       << "\" font-size=\"13\" text-anchor=\"middle\">training step</text>\n";
    os << "<text x=\"18\" y=\"" << mt + plot_h / 2
       << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << mt + plot_h / 2 << ")\">mean episode reward</text>\n";

    for (size_t ci = 0; ci < curves.size(); ++ci) {
        const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (!curves[ci].points.empty()) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& p : curves[ci].points) {
                os << sx(static_cast<double>(p.step)) << "," << sy(p.mean_return) << " ";
            }
            os << "\"/>\n";
        }
        const double ly = mt + 16 + 20 * static_cast<double>(ci);
        os << "<line x1=\"" << ml + plot_w + 14 << "\" y1=\"" << ly << "\" x2=\""
           << ml + plot_w + 40 << "\" y2=\"" << ly << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << ml + plot_w + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
           << xml_escape(curves[ci].label) << "</text>\n";
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("emit_plot: write failed for " + path);
}

void write_train_csv(const std::string& path, const std::vector<CurveRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "seed,step,mean_return,mean_ticks,epsilon\n";
    for (const CurveRow& r : rows) {
        os << r.seed << "," << r.step << "," << fmt_num(r.mean_return) << ","
           << fmt_num(r.mean_ticks) << "," << fmt_num(r.epsilon) << "\n";
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

std::vector<CurveRow> read_train_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "seed,step,mean_return,mean_ticks,epsilon") {
        throw std::runtime_error(path + ": not a training CSV (bad header)");
    }
    std::vector<CurveRow> rows;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        CurveRow r;
        char comma;
        std::istringstream ls(line);
        if (!(ls >> r.seed >> comma >> r.step >> comma >> r.mean_return >> comma >>
              r.mean_ticks >> comma >> r.epsilon)) {
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        }
        rows.push_back(r);
    }
    return rows;
}

void write_eval_csv(const std::string& path, unsigned seed,
                    const std::vector<EpisodeStat>& episodes) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "seed,episode,return,ticks,success\n";
    for (size_t i = 0; i < episodes.size(); ++i) {
        os << seed << "," << i << "," << fmt_num(episodes[i].ret) << "," << episodes[i].ticks
           << "," << (episodes[i].success ? 1 : 0) << "\n";
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

std::vector<EpisodeStat> read_eval_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "seed,episode,return,ticks,success") {
        throw std::runtime_error(path + ": not an eval CSV (bad header)");
    }
    std::vector<EpisodeStat> eps;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        unsigned seed, episode;
        int success;
        EpisodeStat e;
        char comma;
        if (!(ls >> seed >> comma >> episode >> comma >> e.ret >> comma >> e.ticks >> comma >>
              success)) {
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        }
        e.success = success != 0;
        eps.push_back(e);
    }
    return eps;
}

std::vector<NamedCurve> collect_curves(const std::string& dir) {
    auto read_dir_runs = [](const fs::path& p) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(p)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.starts_with("train_") && name.ends_with(".csv")) {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        std::vector<std::vector<CurveRow>> runs;
        for (const std::string& f : files) runs.push_back(read_train_csv(f));
        return runs;
    };

    if (!fs::is_directory(dir)) throw std::runtime_error(dir + " is not a directory");

    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) subdirs.push_back(entry.path());
    }
    std::sort(subdirs.begin(), subdirs.end());

    std::vector<NamedCurve> curves;
    for (const fs::path& sub : subdirs) {
        auto runs = read_dir_runs(sub);
        if (runs.empty()) continue;
        curves.push_back({sub.filename().string(), aggregate_curves(runs)});
    }
    if (curves.empty()) {
        auto runs = read_dir_runs(dir);
        if (!runs.empty()) {
            curves.push_back({fs::path(dir).filename().string(), aggregate_curves(runs)});
        }
    }
    return curves;
}

}  // namespace mmdqn
