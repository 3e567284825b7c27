#include "junction/config/render.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "junction/sim/geometry.hpp"
#include "junction/sim/map.hpp"

namespace junction::config {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb.at(i), rgb.at(i + 1), rgb.at(i + 2)};
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = c.r;
  rgb[i + 1] = c.g;
  rgb[i + 2] = c.b;
}

namespace {

double extent(const metrics::LogHeader& h) {
  return h.map.lanes_per_arm * h.map.lane_width + h.map.arm_length;
}

int image_size(const metrics::LogHeader& h, const RenderOptions& o) {
  return static_cast<int>(std::ceil(2.0 * extent(h) * o.pixels_per_meter));
}

sim::Vec2 to_world(const metrics::LogHeader& h, const RenderOptions& o, int px, int py) {
  const double e = extent(h);
  return {(px + 0.5) / o.pixels_per_meter - e, e - (py + 0.5) / o.pixels_per_meter};
}

Image background(const metrics::LogHeader& h, const RenderOptions& o) {
  const sim::MapGeometry map(h.map);
  const int n = image_size(h, o);
  Image img(n, n, palette::kBackground);
  const double hw = map.half_width();
  const double band = 1.0 / o.pixels_per_meter;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const sim::Vec2 p = to_world(h, o, x, y);
      if (!map.on_drivable(p)) continue;
      const bool edge = map.in_conflict_zone(p) && (std::abs(std::abs(p.x) - hw) < band || std::abs(std::abs(p.y) - hw) < band);
      img.set(x, y, edge ? palette::kConflictZone : palette::kRoad);
    }
  }
  return img;
}

void draw_line(Image& img, std::pair<int, int> a, std::pair<int, int> b, Rgb c) {
  const int steps = std::max(std::abs(b.first - a.first), std::abs(b.second - a.second));
  for (int k = 0; k <= steps; ++k) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(k) / steps;
    img.set(static_cast<int>(std::lround(a.first + t * (b.first - a.first))),
            static_cast<int>(std::lround(a.second + t * (b.second - a.second))), c);
  }
}

Rgb status_color(const metrics::AgentRecord& r) {
  if (r.in_contact) return palette::kContact;
  if (r.off_road) return palette::kOffRoad;
  if (r.arrived) return palette::kArrived;
  return palette::kNormal;
}

}  // namespace

std::pair<int, int> to_pixel(const metrics::LogHeader& h, const RenderOptions& o, double x, double y) {
  const double e = extent(h);
  return {static_cast<int>(std::floor((x + e) * o.pixels_per_meter)),
          static_cast<int>(std::floor((e - y) * o.pixels_per_meter))};
}

namespace {

void draw_step(Image& img, const metrics::TrajectoryLog& log, int step, const RenderOptions& o) {
  const metrics::LogHeader& h = log.header;
  for (const metrics::AgentRecord& r : log.records) {
    if (r.step != step) continue;
    sim::OrientedBox box{{r.x, r.y}, r.heading, h.vehicle_length / 2.0, h.vehicle_width / 2.0};
    const double reach = std::hypot(box.half_length, box.half_width);
    const auto lo = to_pixel(h, o, r.x - reach, r.y + reach);
    const auto hi = to_pixel(h, o, r.x + reach, r.y - reach);
    const Rgb color = status_color(r);
    for (int y = lo.second; y <= hi.second; ++y) {
      for (int x = lo.first; x <= hi.first; ++x) {
        if (box.contains(to_world(h, o, x, y))) img.set(x, y, color);
      }
    }
    if (o.front_sector && r.has_lidar) {
      // Sector edges and center ray, drawn out to the nearest front return.
      const double len = r.front_min * h.lidar_range;
      const double step_angle = 2.0 * sim::kPi / h.lidar_rays;
      const int half = h.front_sector_rays / 2;
      for (double off : {-half * step_angle, 0.0, (h.front_sector_rays - half - 1) * step_angle}) {
        const sim::Vec2 tip = sim::Vec2{r.x, r.y} + sim::unit(r.heading + off) * len;
        draw_line(img, to_pixel(h, o, r.x, r.y), to_pixel(h, o, tip.x, tip.y), palette::kLidar);
      }
    }
  }
}

}  // namespace

Image render_frame(const metrics::TrajectoryLog& log, int step, const RenderOptions& options) {
  Image img = background(log.header, options);
  draw_step(img, log, step, options);
  return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  f.get();
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error("not a P6 pixmap: " + path.string());
  Image img(w, h, {});
  f.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!f) throw std::runtime_error("truncated pixmap: " + path.string());
  return img;
}

int render_frames(const metrics::TrajectoryLog& log, const std::filesystem::path& out_dir,
                  const RenderOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw std::runtime_error("cannot create frame directory " + out_dir.string());
  }
  if (log.episode_steps <= 0) return 0;
  const Image base = background(log.header, options);
  for (int s = 1; s <= log.episode_steps; ++s) {
    Image img = base;
    draw_step(img, log, s, options);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.ppm", s);
    write_ppm(img, out_dir / name);
  }
  return log.episode_steps;
}

}  // namespace junction::config
