#include "rcdt/radon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "rcdt/error.hpp"

namespace rcdt {

namespace {

struct Geometry {
  std::size_t n_offsets;
  double extent;
  double spacing;
  double center_row;
  double center_col;
};

Geometry make_geometry(const Image& image, std::size_t n_offsets) {
  const double extent = static_cast<double>(diagonal_extent(image.rows(), image.cols()));
  if (n_offsets == 0) n_offsets = static_cast<std::size_t>(extent);
  if (n_offsets < 2) {
    throw Error(ErrorKind::InvalidInput, "n_offsets must be at least 2, got " + std::to_string(n_offsets));
  }
  return {n_offsets, extent, extent / static_cast<double>(n_offsets),
          0.5 * (static_cast<double>(image.rows()) - 1.0), 0.5 * (static_cast<double>(image.cols()) - 1.0)};
}

// Quadratic B-spline.
double bspline2(double x) {
  x = std::abs(x);
  if (x < 0.5) return 0.75 - x * x;
  if (x < 1.5) {
    const double d = 1.5 - x;
    return 0.5 * d * d;
  }
  return 0.0;
}

// The three grid indices around a coordinate and their weights. Indices past
// either end are folded onto the end bin so the weights still sum to one.
struct Stencil {
  std::array<std::size_t, 3> index;
  std::array<double, 3> weight;
};

Stencil stencil(double coord, const Geometry& g) {
  const double u = (coord + 0.5 * g.extent) / g.spacing - 0.5;
  const double nearest = std::round(u);
  const double f = u - nearest;
  const long j = static_cast<long>(nearest);
  const long last = static_cast<long>(g.n_offsets) - 1;
  Stencil s;
  for (int k = 0; k < 3; ++k) {
    s.index[k] = static_cast<std::size_t>(std::clamp(j - 1 + k, 0L, last));
    s.weight[k] = bspline2(f - static_cast<double>(k - 1));
  }
  return s;
}

void finalize_row(std::span<double> row, double mass) {
  double sum = 0.0;
  for (double& v : row) {
    v = std::max(v, 0.0);
    sum += v;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::InvalidInput, "projection row has zero mass");
  const double scale = mass / sum;
  for (double& v : row) v *= scale;
}

// Each pixel is split into kSub x kSub equal point masses before splatting.
// With whole pixels the projected centers form a coarse lattice at some
// angles (spacing 1/sqrt(2) at 45 degrees) and the spline aliases against it.
constexpr int kSub = 2;
constexpr double kSubWeight = 1.0 / (kSub * kSub);

double sub_offset(int k) { return (static_cast<double>(k) + 0.5) / kSub - 0.5; }

}  // namespace

AngleGrid AngleGrid::uniform(std::size_t count) {
  if (count == 0) throw Error(ErrorKind::InvalidInput, "angle grid needs at least one angle");
  AngleGrid grid;
  grid.angles_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid.angles_[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
  }
  return grid;
}

std::size_t diagonal_extent(std::size_t rows, std::size_t cols) {
  const double r = static_cast<double>(rows);
  const double c = static_cast<double>(cols);
  return static_cast<std::size_t>(std::ceil(std::sqrt(r * r + c * c) - 1e-12));
}

Sinogram radon_forward(const Image& image, const AngleGrid& grid, std::size_t n_offsets) {
  validate_image(image);
  const Geometry g = make_geometry(image, n_offsets);
  const double mass = image.mass();
  Sinogram sino(grid.size(), g.n_offsets, g.extent);
  const auto n_angles = static_cast<long>(grid.size());
  const auto px = image.pixels();

#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_angles; ++i) {
    const double theta = grid[static_cast<std::size_t>(i)];
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    auto row = sino.row(static_cast<std::size_t>(i));
    double sub_shift[kSub * kSub];
    for (int a = 0; a < kSub; ++a)
      for (int b = 0; b < kSub; ++b) sub_shift[a * kSub + b] = sub_offset(b) * c + sub_offset(a) * s;
    // Offset of pixel (r, col): (col - cx) * cos + (r - cy) * sin.
    for (std::size_t r = 0; r < image.rows(); ++r) {
      const double base = (static_cast<double>(r) - g.center_row) * s - g.center_col * c;
      const double* line = px.data() + r * image.cols();
      for (std::size_t col = 0; col < image.cols(); ++col) {
        const double v = line[col] * kSubWeight;
        if (v == 0.0) continue;
        const double t0 = base + static_cast<double>(col) * c;
        for (double shift : sub_shift) {
          const Stencil st = stencil(t0 + shift, g);
          for (int k = 0; k < 3; ++k) row[st.index[k]] += st.weight[k] * v;
        }
      }
    }
    finalize_row(row, mass);
  }
  return sino;
}

Sinogram radon_forward_serial(const Image& image, const AngleGrid& grid, std::size_t n_offsets) {
  validate_image(image);
  const Geometry g = make_geometry(image, n_offsets);
  const double mass = image.mass();
  const std::size_t n = g.n_offsets;
  Sinogram sino(grid.size(), n, g.extent);

  // Rotated frame: column index = offset along the projection direction,
  // row index = position along the ray.
  Image rotated(n, n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c = std::cos(grid[i]);
    const double s = std::sin(grid[i]);
    std::fill(rotated.pixels().begin(), rotated.pixels().end(), 0.0);
    for (std::size_t r = 0; r < image.rows(); ++r) {
      for (std::size_t col = 0; col < image.cols(); ++col) {
        const double v = image(r, col) * kSubWeight;
        if (v == 0.0) continue;
        for (int sa = 0; sa < kSub; ++sa) {
          for (int sb = 0; sb < kSub; ++sb) {
            const double x = static_cast<double>(col) - g.center_col + sub_offset(sb);
            const double y = static_cast<double>(r) - g.center_row + sub_offset(sa);
            const Stencil st = stencil(x * c + y * s, g);
            const Stencil su = stencil(-x * s + y * c, g);
            for (int a = 0; a < 3; ++a)
              for (int b = 0; b < 3; ++b) rotated(su.index[a], st.index[b]) += su.weight[a] * st.weight[b] * v;
          }
        }
      }
    }
    auto row = sino.row(i);
    for (std::size_t kt = 0; kt < n; ++kt) {
      double column_sum = 0.0;
      for (std::size_t ku = 0; ku < n; ++ku) column_sum += rotated(ku, kt);
      row[kt] = column_sum;
    }
    finalize_row(row, mass);
  }
  return sino;
}

}  // namespace rcdt
