#include "mmdqn/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mmdqn {

RayHit ray_cast(Vec2 origin, Vec2 dir, const RoomMap& map, Vec2 goal, double max_depth,
                double goal_radius) {
    if (std::abs(norm(dir) - 1.0) > 1e-9) {
        throw std::invalid_argument("ray_cast: direction must be unit length");
    }

    RayHit hit;
    double best = max_depth;
    for (const Segment& w : map.walls) {
        double t = ray_segment_hit(origin, dir, w);
        if (t >= 0.0 && t < best) {
            best = t;
            hit.kind = RayHit::Kind::Wall;
        }
    }
    double tg = ray_circle_hit(origin, dir, goal, goal_radius);
    if (tg >= 0.0 && tg < best) {
        best = tg;
        hit.kind = RayHit::Kind::Goal;
    }
    if (hit.kind != RayHit::Kind::None) hit.distance = best;
    return hit;
}

Image render(const EpisodeState& state, const RoomMap& map, const RenderConfig& cfg) {
    const int res = cfg.resolution;
    Image img;
    img.width = res;
    img.height = res;
    img.data.assign(static_cast<size_t>(res) * res * 3, 0.0f);

    const Vec2 eye = state.pose.position;
    const double heading = state.pose.heading;

    for (int col = 0; col < res; ++col) {
        // Column 0 is the left edge of the view (largest angle offset).
        double offset = cfg.fov * (0.5 - (col + 0.5) / res);
        double angle = heading + offset;
        Vec2 dir{std::cos(angle), std::sin(angle)};
        RayHit hit = ray_cast(eye, dir, map, state.goal, cfg.max_depth, cfg.goal_pillar_radius);

        int top = res / 2;      // first wall row (inclusive)
        int bottom = res / 2;   // one past the last wall row
        std::array<float, 3> column_color{0, 0, 0};
        if (hit.kind != RayHit::Kind::None) {
            double perp = hit.distance * std::cos(offset);
            double height_px = static_cast<double>(res) / std::max(perp, 1e-6);
            int half = static_cast<int>(std::min(height_px, static_cast<double>(res)) / 2.0);
            top = res / 2 - half;
            bottom = res / 2 + half;
            if (hit.kind == RayHit::Kind::Goal) {
                column_color = cfg.goal_color;
            } else {
                float atten = static_cast<float>(1.0 / (1.0 + 0.2 * hit.distance));
                for (int c = 0; c < 3; ++c) column_color[c] = cfg.wall_color[c] * atten;
            }
        }
        for (int row = 0; row < res; ++row) {
            const std::array<float, 3>& px = row < top      ? cfg.ceiling_color
                                             : row < bottom ? column_color
                                                            : cfg.floor_color;
            for (int c = 0; c < 3; ++c) {
                img.at(row, col, c) = std::clamp(px[c], 0.0f, 1.0f);
            }
        }
    }
    return img;
}

void write_ppm(const Image& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_ppm: cannot open " + path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    for (float v : img.data) {
        float clamped = std::clamp(v, 0.0f, 1.0f);
        os.put(static_cast<char>(std::lround(clamped * 255.0f)));
    }
    if (!os) throw std::runtime_error("write_ppm: write failed for " + path);
}

}  // namespace mmdqn
