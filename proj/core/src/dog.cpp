#include "shipbow/dog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "shipbow/error.hpp"

namespace shipbow {

void ScaleSpaceParams::validate() const {
  if (octaves < 1) throw Error(Errc::InvalidArgument, "octaves must be >= 1");
  if (scales_per_octave < 1) throw Error(Errc::InvalidArgument, "scales_per_octave must be >= 1");
  if (!(base_sigma > 0.0)) throw Error(Errc::InvalidArgument, "base_sigma must be > 0");
  if (!(contrast_threshold > 0.0)) throw Error(Errc::InvalidArgument, "contrast_threshold must be > 0");
  if (!(edge_ratio > 1.0)) throw Error(Errc::InvalidArgument, "edge_ratio must be > 1");
}

PixelPoint Keypoint::pixel(int width, int height) const {
  return {std::clamp(static_cast<int>(std::lround(x)), 0, width - 1),
          std::clamp(static_cast<int>(std::lround(y)), 0, height - 1)};
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width();
  const int h = img.height();
  if (radius == 0) return img;

  // Horizontal then vertical pass, each over a clamped row/column copy.
  GrayImage tmp(w, h);
  std::vector<double> line(static_cast<std::size_t>(std::max(w, h) + 2 * radius));
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + 2 * radius; ++i) line[i] = img.at(std::clamp(i - radius, 0, w - 1), y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      const double* src = line.data() + x;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * src[k];
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int x = 0; x < w; ++x) {
    for (int i = 0; i < h + 2 * radius; ++i) line[i] = tmp.at(x, std::clamp(i - radius, 0, h - 1));
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      const double* src = line.data() + y;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * src[k];
      out.at(x, y) = acc;
    }
  }
  return out;
}

namespace {

GrayImage downsample_by_two(const GrayImage& img) {
  const int w = std::max(img.width() / 2, 1);
  const int h = std::max(img.height() / 2, 1);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  return out;
}

GrayImage upsample_by_two(const GrayImage& img) {
  const int w = img.width() * 2;
  const int h = img.height() * 2;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const double sy = y / 2.0;
    const int y0 = static_cast<int>(sy);
    const double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = x / 2.0;
      const int x0 = static_cast<int>(sx);
      const double fx = sx - x0;
      const double top = (1 - fx) * img.clamped(x0, y0) + fx * img.clamped(x0 + 1, y0);
      const double bottom = (1 - fx) * img.clamped(x0, y0 + 1) + fx * img.clamped(x0 + 1, y0 + 1);
      out.at(x, y) = (1 - fy) * top + fy * bottom;
    }
  }
  return out;
}

GrayImage subtract(const GrayImage& a, const GrayImage& b) {
  GrayImage out(a.width(), a.height());
  auto dst = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = av[i] - bv[i];
  return out;
}

constexpr int kMinOctaveSide = 4;
constexpr int kMaxRefineSteps = 5;

}  // namespace

int effective_octaves(int width, int height, const ScaleSpaceParams& params) {
  int side = std::min(width, height) * (params.upsample_input ? 2 : 1);
  int count = 0;
  while (count < params.octaves && side >= kMinOctaveSide) {
    ++count;
    side /= 2;
  }
  return std::max(count, 1);
}

DogPyramid build_dog_pyramid(const GrayImage& img, const ScaleSpaceParams& params) {
  params.validate();
  if (std::min(img.width(), img.height()) < 16)
    throw Error(Errc::ImageTooSmall, "scale space needs min(width, height) >= 16");

  const int s = params.scales_per_octave;
  DogPyramid pyr;
  pyr.layer_sigmas.resize(s + 3);
  for (int i = 0; i < s + 3; ++i)
    pyr.layer_sigmas[i] = params.base_sigma * std::pow(2.0, static_cast<double>(i) / s);

  const int n_octaves = effective_octaves(img.width(), img.height(), params);
  GrayImage base = params.upsample_input ? upsample_by_two(img) : img;
  double scale = params.upsample_input ? 0.5 : 1.0;

  for (int o = 0; o < n_octaves; ++o) {
    Octave oct;
    oct.scale = scale;
    oct.gaussians.reserve(s + 3);
    if (o == 0) {
      // The input is treated as unblurred: layer i is the input at sigma_i.
      for (int i = 0; i < s + 3; ++i) oct.gaussians.push_back(gaussian_blur(base, pyr.layer_sigmas[i]));
    } else {
      // Layer s of the previous octave has sigma 2*base_sigma, i.e. base_sigma
      // after halving, which makes it layer 0 here.
      oct.gaussians.push_back(downsample_by_two(pyr.octaves.back().gaussians[s]));
      const double s0 = pyr.layer_sigmas[0];
      for (int i = 1; i < s + 3; ++i) {
        const double sig = pyr.layer_sigmas[i];
        oct.gaussians.push_back(gaussian_blur(oct.gaussians[0], std::sqrt(sig * sig - s0 * s0)));
      }
    }
    oct.dogs.reserve(s + 2);
    for (int i = 0; i < s + 2; ++i) oct.dogs.push_back(subtract(oct.gaussians[i + 1], oct.gaussians[i]));
    pyr.octaves.push_back(std::move(oct));
    scale *= 2.0;
  }
  return pyr;
}

namespace {

bool is_strict_extremum(const std::vector<GrayImage>& dogs, int layer, int x, int y) {
  const double v = dogs[layer].at(x, y);
  const bool maximum = v > 0.0;
  for (int dl = -1; dl <= 1; ++dl) {
    const GrayImage& d = dogs[layer + dl];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dl == 0 && dx == 0 && dy == 0) continue;
        const double n = d.at(x + dx, y + dy);
        if (maximum ? !(v > n) : !(v < n)) return false;
      }
    }
  }
  return true;
}

struct Derivatives {
  std::array<double, 3> gradient{};           // d/dx, d/dy, d/ds
  std::array<std::array<double, 3>, 3> hessian{};
};

Derivatives derivatives_at(const std::vector<GrayImage>& dogs, int layer, int x, int y) {
  const GrayImage& prev = dogs[layer - 1];
  const GrayImage& cur = dogs[layer];
  const GrayImage& next = dogs[layer + 1];
  const double v2 = 2.0 * cur.at(x, y);

  Derivatives d;
  d.gradient = {(cur.at(x + 1, y) - cur.at(x - 1, y)) * 0.5,
                (cur.at(x, y + 1) - cur.at(x, y - 1)) * 0.5,
                (next.at(x, y) - prev.at(x, y)) * 0.5};
  const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
  const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
  const double dss = next.at(x, y) + prev.at(x, y) - v2;
  const double dxy = (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1)) * 0.25;
  const double dxs = (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) + prev.at(x - 1, y)) * 0.25;
  const double dys = (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) + prev.at(x, y - 1)) * 0.25;
  d.hessian = {{{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}}};
  return d;
}

// Solves H * x = b by Cramer's rule; false when H is numerically singular.
bool solve3(const std::array<std::array<double, 3>, 3>& h, const std::array<double, 3>& b,
            std::array<double, 3>& x) {
  auto det3 = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double det = det3(h);
  if (std::abs(det) < 1e-18) return false;
  for (int c = 0; c < 3; ++c) {
    auto m = h;
    for (int r = 0; r < 3; ++r) m[r][c] = b[r];
    x[c] = det3(m) / det;
  }
  return true;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const DogPyramid& pyramid, int width, int height,
                                       const ScaleSpaceParams& params) {
  const int s = params.scales_per_octave;
  const double pre_threshold = 0.5 * params.contrast_threshold;
  const double r = params.edge_ratio;
  const double edge_limit = (r + 1.0) * (r + 1.0) / r;

  std::vector<Keypoint> out;
  for (int o = 0; o < static_cast<int>(pyramid.octaves.size()); ++o) {
    const Octave& oct = pyramid.octaves[o];
    const int w = oct.dogs.front().width();
    const int h = oct.dogs.front().height();
    if (w < 3 || h < 3) continue;

    std::vector<Keypoint> found;
    for (int layer = 1; layer <= s; ++layer) {
      for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
          if (std::abs(oct.dogs[layer].at(x, y)) < pre_threshold) continue;
          if (!is_strict_extremum(oct.dogs, layer, x, y)) continue;

          int xi = x, yi = y, li = layer;
          std::array<double, 3> offset{};
          Derivatives d;
          bool converged = false;
          for (int step = 0; step < kMaxRefineSteps; ++step) {
            d = derivatives_at(oct.dogs, li, xi, yi);
            const std::array<double, 3> rhs = {-d.gradient[0], -d.gradient[1], -d.gradient[2]};
            if (!solve3(d.hessian, rhs, offset)) break;
            if (std::abs(offset[0]) < 0.5 && std::abs(offset[1]) < 0.5 && std::abs(offset[2]) < 0.5) {
              converged = true;
              break;
            }
            if (std::abs(offset[0]) > w || std::abs(offset[1]) > h || std::abs(offset[2]) > s + 2) break;
            xi += static_cast<int>(std::lround(offset[0]));
            yi += static_cast<int>(std::lround(offset[1]));
            li += static_cast<int>(std::lround(offset[2]));
            if (li < 1 || li > s || xi < 1 || xi > w - 2 || yi < 1 || yi > h - 2) break;
          }
          if (!converged) continue;

          const double response = oct.dogs[li].at(xi, yi) +
                                  0.5 * (d.gradient[0] * offset[0] + d.gradient[1] * offset[1] +
                                         d.gradient[2] * offset[2]);
          if (std::abs(response) < params.contrast_threshold) continue;

          const double dxx = d.hessian[0][0];
          const double dyy = d.hessian[1][1];
          const double dxy = d.hessian[0][1];
          const double trace = dxx + dyy;
          const double det = dxx * dyy - dxy * dxy;
          if (det <= 0.0 || trace * trace / det >= edge_limit) continue;

          Keypoint kp;
          kp.x = (xi + offset[0]) * oct.scale;
          kp.y = (yi + offset[1]) * oct.scale;
          if (kp.x < 0.0 || kp.y < 0.0 || kp.x >= width || kp.y >= height) continue;
          kp.sigma = params.base_sigma * std::pow(2.0, (li + offset[2]) / s) * oct.scale;
          kp.dog_response = response;
          kp.octave = o;
          kp.layer = li;
          kp.octave_x = xi;
          kp.octave_y = yi;
          found.push_back(kp);
        }
      }
    }

    std::sort(found.begin(), found.end(), [](const Keypoint& a, const Keypoint& b) {
      return std::tie(a.layer, a.y, a.x) < std::tie(b.layer, b.y, b.x);
    });
    // Refinement can pull neighbouring extrema onto the same location.
    std::vector<Keypoint> kept;
    for (const auto& kp : found) {
      const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Keypoint& q) {
        const double dx = q.x - kp.x;
        const double dy = q.y - kp.y;
        return dx * dx + dy * dy < 0.25;
      });
      if (!duplicate) kept.push_back(kp);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

std::vector<Keypoint> detect_keypoints(const GrayImage& img, const ScaleSpaceParams& params) {
  const DogPyramid pyramid = build_dog_pyramid(img, params);
  return detect_keypoints(pyramid, img.width(), img.height(), params);
}

}  // namespace shipbow
