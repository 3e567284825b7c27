#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "junction/metrics/trajectory_log.hpp"

namespace junction::config {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

// Fixed palette. Vehicle status precedence: contact, off-road, arrived, normal.
namespace palette {
inline constexpr Rgb kBackground{34, 102, 51};
inline constexpr Rgb kRoad{90, 90, 90};
inline constexpr Rgb kConflictZone{255, 215, 0};  // outline only
inline constexpr Rgb kNormal{40, 110, 230};
inline constexpr Rgb kContact{220, 30, 30};
inline constexpr Rgb kOffRoad{255, 140, 0};
inline constexpr Rgb kArrived{150, 150, 150};
inline constexpr Rgb kLidar{0, 230, 230};
}  // namespace palette

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, Rgb fill);
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
};

struct RenderOptions {
  double pixels_per_meter = 4.0;
  bool front_sector = true;
};

/// Pixel coordinates of a world point (y up in the world, down in the image).
std::pair<int, int> to_pixel(const metrics::LogHeader& header, const RenderOptions& options, double x, double y);

/// Top-down view after `step`: roads, conflict-zone outline, vehicle
/// footprints colored by status and an optional front-sector overlay.
Image render_frame(const metrics::TrajectoryLog& log, int step, const RenderOptions& options = {});

/// Binary P6 portable pixmap.
void write_ppm(const Image& image, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

/// Writes frame_NNNNN.ppm for steps 1..episode_steps and returns the count.
/// Throws std::runtime_error when the directory cannot be written.
int render_frames(const metrics::TrajectoryLog& log, const std::filesystem::path& out_dir,
                  const RenderOptions& options = {});

}  // namespace junction::config
