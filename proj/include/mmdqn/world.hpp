#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include "mmdqn/geometry.hpp"
#include "mmdqn/rng.hpp"

namespace mmdqn {

// Agent pose: position in meters, heading in radians wrapped into [0, 2*pi).
// Heading 0 points along +x, positive turns are counter-clockwise.
struct Pose {
    Vec2 position;
    double heading = 0.0;
};

// Five-room layout: rooms as axis-aligned rectangles, doorways as the
// wall gaps connecting them, walls as the derived solid segments.
struct RoomMap {
    std::vector<Rect> rooms;       // rooms[0] is the big room
    std::vector<Segment> doorways;
    std::vector<Segment> walls;

    bool walkable(Vec2 p) const;
    double wall_clearance(Vec2 p) const;  // distance to nearest solid wall
    Rect bounding_box() const;

    // One room per line: "x_min y_min x_max y_max".
    void dump(std::ostream& os) const;
};

// Big room 10x10 m centered at the origin, four 6x6 m satellite rooms
// flush against its N/E/S/W walls, one centered 1.5 m doorway per shared
// wall.
RoomMap build_five_room_map();

enum class Action : int {
    TurnLeft = 0,
    TurnRight = 1,
    MoveForward = 2,
    MoveBackward = 3,
};
inline constexpr int kNumActions = 4;

enum class SpawnMode {
    BigRoomRandom,
    BigRoomFixed,
    AllRoomsRandom,
};

struct SpawnConfig {
    SpawnMode mode = SpawnMode::BigRoomRandom;
    double goal_clearance = 1.0;  // min distance from goal center to any wall
};

// Fixed goal point used by SpawnMode::BigRoomFixed (big-room NE quadrant).
inline constexpr Vec2 kFixedGoal{3.5, 3.5};

struct EpisodeState {
    Pose pose;
    Vec2 goal;
    int tick = 0;
    bool done = false;
    int timeout = 0;
};

struct StepOutcome {
    double reward = 0.0;
    bool done = false;
    int ticks_elapsed = 0;
};

struct DynamicsConfig {
    double move_step = 0.35;     // meters per tick
    double turn_step_deg = 5.0;  // degrees per tick
    double goal_radius = 0.7;    // goal contact distance
};

// Spawns the agent at the big-room center with a random heading and places
// the goal per SpawnConfig. Throws std::invalid_argument on timeout <= 0
// and std::runtime_error if goal rejection sampling exceeds 1000 attempts.
EpisodeState reset(const RoomMap& map, const SpawnConfig& spawn, int timeout, Rng& rng);

// Advances one game tick. Movement is blocked entirely (hard block, no
// sliding) when the swept segment touches a wall or exits the walkable
// area. Throws std::logic_error when called on a finished episode.
EpisodeState tick(const EpisodeState& state, Action action, const RoomMap& map,
                  const DynamicsConfig& dyn);

// Repeats `action` for up to `frame_skip` ticks, stopping early on episode
// end. Reward is -ticks_elapsed plus 1 if the goal was reached.
std::pair<EpisodeState, StepOutcome> agent_step(const EpisodeState& state, Action action,
                                                const RoomMap& map, const DynamicsConfig& dyn,
                                                int frame_skip = 10);

double distance_to_goal(const EpisodeState& state);

bool goal_reached(const EpisodeState& state, const DynamicsConfig& dyn);

}  // namespace mmdqn
