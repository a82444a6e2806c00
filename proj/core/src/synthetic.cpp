#include "shipbow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "shipbow/config.hpp"
#include "shipbow/error.hpp"
#include "shipbow/random.hpp"

namespace shipbow {

namespace fs = std::filesystem;

namespace {

struct Painter {
  cv::Mat canvas;  // RGB order, CV_8UC3
  Rng& rng;

  double between(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

  cv::Scalar jitter(cv::Scalar c, double amount) {
    for (int i = 0; i < 3; ++i) c[i] = std::clamp(c[i] + between(-amount, amount), 0.0, 255.0);
    return c;
  }

  void poly(const std::vector<cv::Point2d>& pts, const cv::Scalar& color) {
    std::vector<cv::Point> ip;
    for (const auto& p : pts) ip.emplace_back(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)));
    cv::fillPoly(canvas, std::vector<std::vector<cv::Point>>{ip}, color, cv::LINE_AA);
  }

  void box(double x0, double y0, double x1, double y1, const cv::Scalar& color) {
    poly({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, color);
  }
};

struct Hull {
  double left, right, deck, keel;
  double length() const { return right - left; }
};

void background(Painter& p, double horizon) {
  const int w = p.canvas.cols;
  const int h = p.canvas.rows;
  const cv::Scalar sky_top = p.jitter({150, 190, 230}, 15);
  const cv::Scalar sky_low = p.jitter({205, 225, 240}, 10);
  const cv::Scalar sea_top = p.jitter({40, 90, 140}, 15);
  const cv::Scalar sea_low = p.jitter({20, 55, 95}, 10);
  for (int y = 0; y < h; ++y) {
    cv::Scalar c;
    if (y < horizon) {
      const double t = y / std::max(horizon, 1.0);
      c = sky_top * (1 - t) + sky_low * t;
    } else {
      const double t = (y - horizon) / std::max(h - horizon, 1.0);
      c = sea_top * (1 - t) + sea_low * t;
    }
    cv::line(p.canvas, {0, y}, {w - 1, y}, c);
  }
  const int waves = 20 + static_cast<int>(p.rng.index(20));
  for (int i = 0; i < waves; ++i) {
    const double y = p.between(horizon + 4, h - 2);
    const double x = p.between(0, w);
    const double len = 3 + 6 * (y - horizon) / std::max(h - horizon, 1.0);
    cv::line(p.canvas, cv::Point(static_cast<int>(x), static_cast<int>(y)),
             cv::Point(static_cast<int>(x + len), static_cast<int>(y)), p.jitter({120, 160, 190}, 15), 1);
  }
}

void hull_shape(Painter& p, const Hull& hull, const cv::Scalar& top, const cv::Scalar& bottom, double rake) {
  const double L = hull.length();
  const double mid = hull.deck + 0.55 * (hull.keel - hull.deck);
  p.poly({{hull.left, hull.deck}, {hull.right, hull.deck}, {hull.right - rake * L, hull.keel},
          {hull.left + 0.04 * L, hull.keel}},
         top);
  p.poly({{hull.left + 0.02 * L, mid}, {hull.right - rake * L * 0.5, mid}, {hull.right - rake * L, hull.keel},
          {hull.left + 0.04 * L, hull.keel}},
         bottom);
}

void bridge(Painter& p, double x, double deck, double width, double height) {
  const cv::Scalar white = p.jitter({235, 235, 230}, 10);
  p.box(x, deck - height, x + width, deck, white);
  const cv::Scalar glass = p.jitter({40, 50, 60}, 10);
  p.box(x + 0.1 * width, deck - height + 0.15 * height, x + 0.9 * width, deck - height + 0.3 * height, glass);
  p.box(x + 0.3 * width, deck - height * 1.35, x + 0.55 * width, deck - height, p.jitter({60, 60, 60}, 10));
}

void draw_container(Painter& p, double cx, double horizon, int w, int h) {
  Hull hull;
  const double L = w * p.between(0.68, 0.85);
  hull.left = cx - L / 2;
  hull.right = cx + L / 2;
  hull.deck = horizon + h * p.between(0.02, 0.06);
  hull.keel = hull.deck + h * p.between(0.1, 0.14);
  hull_shape(p, hull, p.jitter({30, 40, 70}, 15), p.jitter({150, 30, 30}, 20), 0.08);

  static const cv::Scalar palette[] = {{200, 40, 30}, {30, 80, 170}, {40, 140, 60}, {220, 130, 20}, {190, 190, 190}};
  const int cols = 7 + static_cast<int>(p.rng.index(4));
  const int rows = 3 + static_cast<int>(p.rng.index(2));
  const double x0 = hull.left + 0.1 * L;
  const double x1 = hull.left + 0.78 * L;
  const double cw = (x1 - x0) / cols;
  const double ch = h * p.between(0.055, 0.07);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (r == rows - 1 && p.rng.uniform() < 0.25) continue;
      const cv::Scalar color = p.jitter(palette[p.rng.index(5)], 20);
      const double bx = x0 + c * cw;
      const double by = hull.deck - (r + 1) * ch;
      p.box(bx + 1, by + 1, bx + cw - 1, by + ch - 1, color);
      const cv::Scalar rib = color * 0.6;
      for (double rx = bx + 3; rx < bx + cw - 2; rx += 3)
        cv::line(p.canvas, cv::Point(static_cast<int>(rx), static_cast<int>(by + 2)),
                 cv::Point(static_cast<int>(rx), static_cast<int>(by + ch - 2)), rib, 1);
    }
  }
  bridge(p, hull.left + 0.8 * L, hull.deck, 0.09 * L, ch * (rows + 1.5));
}

void draw_tanker(Painter& p, double cx, double horizon, int w, int h) {
  Hull hull;
  const double L = w * p.between(0.7, 0.85);
  hull.left = cx - L / 2;
  hull.right = cx + L / 2;
  hull.deck = horizon + h * p.between(0.04, 0.08);
  hull.keel = hull.deck + h * p.between(0.08, 0.11);
  hull_shape(p, hull, p.jitter({45, 75, 55}, 12), p.jitter({110, 45, 40}, 15), 0.05);

  // Long flat deck with a pipe rack and a few domes.
  const cv::Scalar pipe = p.jitter({170, 160, 120}, 15);
  p.box(hull.left + 0.08 * L, hull.deck - 2, hull.left + 0.8 * L, hull.deck, pipe);
  const int domes = 3 + static_cast<int>(p.rng.index(3));
  const double span = 0.66 * L / domes;
  const double radius = std::min(span * 0.42, h * 0.085);
  const cv::Scalar dome = p.jitter({215, 215, 205}, 12);
  for (int i = 0; i < domes; ++i) {
    const double dx = hull.left + 0.12 * L + (i + 0.5) * span;
    cv::ellipse(p.canvas, cv::Point(static_cast<int>(std::lround(dx)), static_cast<int>(std::lround(hull.deck))),
                cv::Size(static_cast<int>(std::lround(radius)), static_cast<int>(std::lround(radius * 0.9))), 0,
                180, 360, dome, cv::FILLED, cv::LINE_AA);
  }
  const int cranes = 1 + static_cast<int>(p.rng.index(2));
  for (int i = 0; i < cranes; ++i) {
    const double x = hull.left + p.between(0.2, 0.7) * L;
    const double top = hull.deck - h * p.between(0.1, 0.15);
    cv::line(p.canvas, cv::Point(static_cast<int>(x), static_cast<int>(hull.deck)),
             cv::Point(static_cast<int>(x), static_cast<int>(top)), pipe * 0.7, 2);
    cv::line(p.canvas, cv::Point(static_cast<int>(x), static_cast<int>(top)),
             cv::Point(static_cast<int>(x + 0.06 * L), static_cast<int>(top + h * 0.04)), pipe * 0.7, 1);
  }
  bridge(p, hull.left + 0.84 * L, hull.deck, 0.08 * L, h * p.between(0.12, 0.16));
}

void draw_sailboat(Painter& p, double cx, double horizon, int w, int h) {
  Hull hull;
  const double L = w * p.between(0.3, 0.42);
  hull.left = cx - L / 2;
  hull.right = cx + L / 2;
  hull.deck = horizon + h * p.between(0.06, 0.12);
  hull.keel = hull.deck + h * p.between(0.06, 0.09);
  hull_shape(p, hull, p.jitter({240, 240, 240}, 10), p.jitter({20, 40, 90}, 20), 0.2);

  const double mast_x = hull.left + p.between(0.45, 0.55) * L;
  const double mast_top = std::max(2.0, hull.deck - h * p.between(0.5, 0.65));
  cv::line(p.canvas, cv::Point(static_cast<int>(mast_x), static_cast<int>(hull.deck)),
           cv::Point(static_cast<int>(mast_x), static_cast<int>(mast_top)), p.jitter({90, 80, 70}, 10), 2,
           cv::LINE_AA);
  const cv::Scalar sail = p.jitter({245, 245, 238}, 10);
  const double boom = hull.deck - h * 0.04;
  p.poly({{mast_x - 2, mast_top + 2}, {mast_x - 2, boom}, {hull.left + 0.08 * L, boom}}, sail);
  p.poly({{mast_x + 2, mast_top + 6}, {hull.right - 0.06 * L, hull.deck - 1}, {mast_x + 2, hull.deck - 1}},
         p.jitter(p.rng.uniform() < 0.3 ? cv::Scalar{200, 60, 50} : cv::Scalar{240, 240, 235}, 10));
  const cv::Scalar seam = sail * 0.8;
  for (int i = 1; i < 4; ++i) {
    const double t = i / 4.0;
    const double y = mast_top + t * (boom - mast_top);
    const double x = mast_x - 2 - t * (mast_x - 2 - (hull.left + 0.08 * L));
    cv::line(p.canvas, cv::Point(static_cast<int>(x), static_cast<int>(y)),
             cv::Point(static_cast<int>(mast_x - 2), static_cast<int>(y)), seam, 1);
  }
  const cv::Scalar rope(70, 70, 70);
  cv::line(p.canvas, cv::Point(static_cast<int>(mast_x), static_cast<int>(mast_top)),
           cv::Point(static_cast<int>(hull.left + 0.02 * L), static_cast<int>(hull.deck)), rope, 1, cv::LINE_AA);
  for (int i = 0; i < 3; ++i) {
    const double x = hull.left + (0.25 + 0.15 * i) * L;
    cv::circle(p.canvas, cv::Point(static_cast<int>(x), static_cast<int>(hull.deck + 0.3 * (hull.keel - hull.deck))),
               1, cv::Scalar(40, 40, 60), cv::FILLED);
  }
}

}  // namespace

std::vector<std::string> synthetic_classes() { return {"container", "sailboat", "tanker"}; }

RgbImage draw_synthetic_ship(const std::string& class_name, std::uint64_t seed, int width, int height) {
  if (width < 32 || height < 32) throw Error(Errc::InvalidArgument, "synthetic images must be at least 32x32");
  Rng rng(seed);
  Painter p{cv::Mat(height, width, CV_8UC3), rng};
  const double horizon = height * p.between(0.4, 0.55);
  background(p, horizon);
  const double cx = width * p.between(0.42, 0.58);
  if (class_name == "container") draw_container(p, cx, horizon, width, height);
  else if (class_name == "tanker") draw_tanker(p, cx, horizon, width, height);
  else if (class_name == "sailboat") draw_sailboat(p, cx, horizon, width, height);
  else throw Error(Errc::InvalidArgument, "unknown synthetic class '" + class_name + "'");

  if (rng.uniform() < 0.5) cv::flip(p.canvas, p.canvas, 1);

  const double noise = p.between(2.0, 6.0);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    const auto* row = p.canvas.ptr<cv::Vec3b>(y);
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = row[x][c] + rng.normal(0.0, noise);
        pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
  }
  return RgbImage(width, height, std::move(pixels));
}

void generate_synthetic_dataset(const fs::path& out, std::uint64_t seed, int per_class) {
  if (per_class < 2) throw Error(Errc::InvalidArgument, "per_class must be >= 2");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + out.string() + ": " + ec.message());

  Rng seeds(seed);
  for (const auto& cls : synthetic_classes()) {
    fs::create_directories(out / cls, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + (out / cls).string());
    for (int i = 0; i < per_class; ++i) {
      std::ostringstream name;
      name << cls << "_" << std::setw(3) << std::setfill('0') << i << ".png";
      const std::uint64_t image_seed = seeds.index(UINT64_MAX);
      save_png(draw_synthetic_ship(cls, image_seed), out / cls / name.str());
    }
  }

  PipelineConfig config;
  config.train_fraction = 2.0 / 3.0;
  std::ofstream cfg(out / "synthetic_config.json");
  cfg << config_to_json(config) << "\n";
  if (!cfg) throw Error(Errc::IoError, "cannot write " + (out / "synthetic_config.json").string());
}

}  // namespace shipbow
