#pragma once

#include <array>
#include <string>
#include <vector>

#include "mmdqn/world.hpp"

namespace mmdqn {

// Square RGB frame, row-major HxWx3, values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
};

struct RenderConfig {
    int resolution = 40;
    double fov = kPi / 2.0;  // horizontal field of view, radians
    std::array<float, 3> wall_color{0.75f, 0.75f, 0.75f};
    std::array<float, 3> floor_color{0.22f, 0.20f, 0.18f};
    std::array<float, 3> ceiling_color{0.35f, 0.37f, 0.40f};
    std::array<float, 3> goal_color{1.0f, 0.0f, 0.0f};
    double max_depth = 50.0;
    double goal_pillar_radius = 0.4;
};

struct RayHit {
    enum class Kind { None, Wall, Goal };
    Kind kind = Kind::None;
    double distance = 0.0;
};

// Nearest intersection of a unit ray with the wall segments or the goal
// pillar (a vertical cylinder). Throws std::invalid_argument when the
// direction is not unit length (tolerance 1e-9).
RayHit ray_cast(Vec2 origin, Vec2 dir, const RoomMap& map, Vec2 goal, double max_depth,
                double goal_radius);

// Column raycaster: one ray per column across the FOV, wall brightness
// attenuated by 1/(1 + 0.2*distance), goal pillar in flat goal_color,
// ceiling above and floor below the column. Pure function of its inputs.
Image render(const EpisodeState& state, const RoomMap& map, const RenderConfig& cfg);

// Binary PPM (P6) dump for visual inspection.
void write_ppm(const Image& img, const std::string& path);

}  // namespace mmdqn
