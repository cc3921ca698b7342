#include "mmdqn/world.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mmdqn {

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
    int o1 = orientation(s.a, s.b, t.a);
    int o2 = orientation(s.a, s.b, t.b);
    int o3 = orientation(t.a, t.b, s.a);
    int o4 = orientation(t.a, t.b, s.b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
    if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
    if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
    if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
    return false;
}

double point_segment_distance(Vec2 p, const Segment& s) {
    Vec2 d = s.b - s.a;
    double len2 = dot(d, d);
    if (len2 == 0.0) return distance(p, s.a);
    double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(p, s.a + t * d);
}

double ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s) {
    // Solve origin + t*dir = s.a + u*(s.b - s.a), t >= 0, u in [0, 1].
    Vec2 e = s.b - s.a;
    double denom = cross(dir, e);
    if (std::abs(denom) < 1e-12) return -1.0;  // parallel
    Vec2 ao = s.a - origin;
    double t = cross(ao, e) / denom;
    double u = cross(ao, dir) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0) return -1.0;
    return t;
}

double ray_circle_hit(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
    Vec2 oc = origin - center;
    double b = dot(oc, dir);
    double c = dot(oc, oc) - radius * radius;
    double disc = b * b - c;
    if (disc < 0.0) return -1.0;
    double sq = std::sqrt(disc);
    double t0 = -b - sq;
    if (t0 >= 0.0) return t0;
    double t1 = -b + sq;
    if (t1 >= 0.0) return t1;
    return -1.0;
}

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a;
}

bool RoomMap::walkable(Vec2 p) const {
    for (const Rect& r : rooms) {
        if (r.contains(p)) return true;
    }
    return false;
}

double RoomMap::wall_clearance(Vec2 p) const {
    double best = std::numeric_limits<double>::max();
    for (const Segment& w : walls) {
        best = std::min(best, point_segment_distance(p, w));
    }
    return best;
}

Rect RoomMap::bounding_box() const {
    Rect box = rooms.at(0);
    for (const Rect& r : rooms) {
        box.x_min = std::min(box.x_min, r.x_min);
        box.y_min = std::min(box.y_min, r.y_min);
        box.x_max = std::max(box.x_max, r.x_max);
        box.y_max = std::max(box.y_max, r.y_max);
    }
    return box;
}

void RoomMap::dump(std::ostream& os) const {
    for (const Rect& r : rooms) {
        os << r.x_min << " " << r.y_min << " " << r.x_max << " " << r.y_max << "\n";
    }
}

RoomMap build_five_room_map() {
    constexpr double kBig = 5.0;    // big-room half side
    constexpr double kSide = 6.0;   // satellite room side
    constexpr double kHalf = 3.0;   // satellite half side
    constexpr double kGap = 0.75;   // doorway half width

    RoomMap map;
    map.rooms = {
        {-kBig, -kBig, kBig, kBig},               // big room
        {-kHalf, kBig, kHalf, kBig + kSide},      // north
        {kBig, -kHalf, kBig + kSide, kHalf},      // east
        {-kHalf, -kBig - kSide, kHalf, -kBig},    // south
        {-kBig - kSide, -kHalf, -kBig, kHalf},    // west
    };

    map.doorways = {
        {{-kGap, kBig}, {kGap, kBig}},    // north wall
        {{kBig, -kGap}, {kBig, kGap}},    // east wall
        {{-kGap, -kBig}, {kGap, -kBig}},  // south wall
        {{-kBig, -kGap}, {-kBig, kGap}},  // west wall
    };

    // Big-room boundary, split around each doorway gap.
    map.walls = {
        {{-kBig, kBig}, {-kGap, kBig}},   {{kGap, kBig}, {kBig, kBig}},      // y = +5
        {{-kBig, -kBig}, {-kGap, -kBig}}, {{kGap, -kBig}, {kBig, -kBig}},    // y = -5
        {{kBig, -kBig}, {kBig, -kGap}},   {{kBig, kGap}, {kBig, kBig}},      // x = +5
        {{-kBig, -kBig}, {-kBig, -kGap}}, {{-kBig, kGap}, {-kBig, kBig}},    // x = -5
    };
    // Satellite room outer walls (the shared-wall sides are covered above).
    const double kFar = kBig + kSide;
    // north
    map.walls.push_back({{-kHalf, kBig}, {-kHalf, kFar}});
    map.walls.push_back({{kHalf, kBig}, {kHalf, kFar}});
    map.walls.push_back({{-kHalf, kFar}, {kHalf, kFar}});
    // east
    map.walls.push_back({{kBig, -kHalf}, {kFar, -kHalf}});
    map.walls.push_back({{kBig, kHalf}, {kFar, kHalf}});
    map.walls.push_back({{kFar, -kHalf}, {kFar, kHalf}});
    // south
    map.walls.push_back({{-kHalf, -kBig}, {-kHalf, -kFar}});
    map.walls.push_back({{kHalf, -kBig}, {kHalf, -kFar}});
    map.walls.push_back({{-kHalf, -kFar}, {kHalf, -kFar}});
    // west
    map.walls.push_back({{-kBig, -kHalf}, {-kFar, -kHalf}});
    map.walls.push_back({{-kBig, kHalf}, {-kFar, kHalf}});
    map.walls.push_back({{-kFar, -kHalf}, {-kFar, kHalf}});

    return map;
}

namespace {

Vec2 sample_goal(const RoomMap& map, const SpawnConfig& spawn, Rng& rng) {
    if (spawn.mode == SpawnMode::BigRoomFixed) return kFixedGoal;

    const Rect region = spawn.mode == SpawnMode::BigRoomRandom
                            ? map.rooms.at(0).shrunk(spawn.goal_clearance)
                            : map.bounding_box();
    if (region.empty()) {
        throw std::runtime_error("goal spawn: clearance leaves no candidate area");
    }
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Vec2 p{rng.next_range(region.x_min, region.x_max),
               rng.next_range(region.y_min, region.y_max)};
        if (!map.walkable(p)) continue;
        if (map.wall_clearance(p) < spawn.goal_clearance) continue;
        return p;
    }
    throw std::runtime_error("goal spawn: rejection sampling exceeded 1000 attempts");
}

}  // namespace

EpisodeState reset(const RoomMap& map, const SpawnConfig& spawn, int timeout, Rng& rng) {
    if (timeout <= 0) throw std::invalid_argument("reset: timeout must be positive");
    EpisodeState state;
    const Rect& big = map.rooms.at(0);
    state.pose.position = {0.5 * (big.x_min + big.x_max), 0.5 * (big.y_min + big.y_max)};
    state.pose.heading = rng.next_range(0.0, 2.0 * kPi);
    state.goal = sample_goal(map, spawn, rng);
    state.tick = 0;
    state.done = false;
    state.timeout = timeout;
    return state;
}

EpisodeState tick(const EpisodeState& state, Action action, const RoomMap& map,
                  const DynamicsConfig& dyn) {
    if (state.done) throw std::logic_error("tick: episode already finished");

    EpisodeState next = state;
    const double turn = dyn.turn_step_deg * kPi / 180.0;
    switch (action) {
        case Action::TurnLeft:
            next.pose.heading = wrap_angle(state.pose.heading + turn);
            break;
        case Action::TurnRight:
            next.pose.heading = wrap_angle(state.pose.heading - turn);
            break;
        case Action::MoveForward:
        case Action::MoveBackward: {
            double sign = action == Action::MoveForward ? 1.0 : -1.0;
            Vec2 delta{sign * dyn.move_step * std::cos(state.pose.heading),
                       sign * dyn.move_step * std::sin(state.pose.heading)};
            Vec2 target = state.pose.position + delta;
            Segment sweep{state.pose.position, target};
            bool blocked = !map.walkable(target);
            if (!blocked) {
                for (const Segment& w : map.walls) {
                    if (segments_intersect(sweep, w)) {
                        blocked = true;
                        break;
                    }
                }
            }
            if (!blocked) next.pose.position = target;
            break;
        }
    }

    next.tick = state.tick + 1;
    if (goal_reached(next, dyn) || next.tick >= next.timeout) next.done = true;
    return next;
}

std::pair<EpisodeState, StepOutcome> agent_step(const EpisodeState& state, Action action,
                                                const RoomMap& map, const DynamicsConfig& dyn,
                                                int frame_skip) {
    if (state.done) throw std::logic_error("agent_step: episode already finished");
    if (frame_skip < 1) throw std::invalid_argument("agent_step: frame_skip must be >= 1");

    EpisodeState s = state;
    int ticks = 0;
    for (int i = 0; i < frame_skip; ++i) {
        s = tick(s, action, map, dyn);
        ++ticks;
        if (s.done) break;
    }
    StepOutcome out;
    out.ticks_elapsed = ticks;
    out.done = s.done;
    out.reward = -static_cast<double>(ticks) + (goal_reached(s, dyn) ? 1.0 : 0.0);
    return {s, out};
}

double distance_to_goal(const EpisodeState& state) {
    return distance(state.pose.position, state.goal);
}

bool goal_reached(const EpisodeState& state, const DynamicsConfig& dyn) {
    return distance_to_goal(state) <= dyn.goal_radius;
}

}  // namespace mmdqn
