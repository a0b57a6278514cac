#include "ssdeconv/tabulated.hpp"

#include <cmath>
#include <numbers>

#include "ssdeconv/error.hpp"

namespace ssdeconv {

namespace {

// 4-point Lagrange weights for nodes -1, 0, 1, 2 at offset t in [0, 1).
inline void lagrange4(double t, double w[4]) {
  const double tm1 = t - 1.0;
  const double tm2 = t - 2.0;
  const double tp1 = t + 1.0;
  w[0] = -t * tm1 * tm2 / 6.0;
  w[1] = tp1 * tm1 * tm2 / 2.0;
  w[2] = -tp1 * t * tm2 / 2.0;
  w[3] = tp1 * t * tm1 / 6.0;
}

// Locates the cubic stencil; false when x is outside the interpolation region.
inline bool locate(double x, double lo, double step, int count, int& i, double& t) {
  const double pos = (x - lo) / step;
  if (!(pos >= 1.0) || !(pos < count - 2)) return false;
  i = static_cast<int>(pos);
  t = pos - i;
  return true;
}

}  // namespace

std::size_t Lattice::size() const {
  std::size_t s = 1;
  for (int c : count) s *= static_cast<std::size_t>(c);
  return s;
}

Lattice Lattice::cube(int d, double half_width, double max_step) {
  if (d < 1 || !(half_width > 0.0) || !(max_step > 0.0)) throw UsageError("lattice: bad cube parameters");
  const int count = static_cast<int>(std::ceil(2.0 * half_width / max_step)) + 1;
  const double step = 2.0 * half_width / (count - 1);
  return Lattice{std::vector<double>(d, -half_width), std::vector<double>(d, step), std::vector<int>(d, count)};
}

Lattice Lattice::box(std::vector<double> lo, std::vector<double> hi, std::vector<int> count) {
  if (lo.size() != hi.size() || lo.size() != count.size() || lo.empty()) throw UsageError("lattice: shape mismatch");
  std::vector<double> step(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (count[i] < 4 || !(hi[i] > lo[i])) throw UsageError("lattice: need >= 4 points and hi > lo per axis");
    step[i] = (hi[i] - lo[i]) / (count[i] - 1);
  }
  return Lattice{std::move(lo), std::move(step), std::move(count)};
}

TabulatedFunction::TabulatedFunction(Lattice lattice, std::vector<double> values, DensityFn fallback, bool clip)
    : lattice_(std::move(lattice)), values_(std::move(values)), fallback_(std::move(fallback)), clip_(clip) {
  const int d = lattice_.dimension();
  if (d < 1 || d > 2) throw UsageError("tabulated functions support d = 1 or 2");
  if (values_.size() != lattice_.size()) throw UsageError("tabulated function: value count mismatch");
  for (int c : lattice_.count)
    if (c < 4) throw UsageError("tabulated function: need >= 4 points per axis");
}

double TabulatedFunction::operator()(std::span<const double> x) const {
  const int d = lattice_.dimension();
  if (static_cast<int>(x.size()) != d) throw UsageError("tabulated function: dimension mismatch");
  double v = 0.0;
  if (d == 1) {
    int i;
    double t;
    if (!locate(x[0], lattice_.lo[0], lattice_.step[0], lattice_.count[0], i, t)) return fallback_(x);
    double w[4];
    lagrange4(t, w);
    const double* p = values_.data() + (i - 1);
    v = w[0] * p[0] + w[1] * p[1] + w[2] * p[2] + w[3] * p[3];
  } else {
    int i, j;
    double t, u;
    if (!locate(x[0], lattice_.lo[0], lattice_.step[0], lattice_.count[0], i, t) ||
        !locate(x[1], lattice_.lo[1], lattice_.step[1], lattice_.count[1], j, u))
      return fallback_(x);
    double wi[4], wj[4];
    lagrange4(t, wi);
    lagrange4(u, wj);
    const int stride = lattice_.count[1];
    for (int a = 0; a < 4; ++a) {
      const double* p = values_.data() + static_cast<std::size_t>(i - 1 + a) * stride + (j - 1);
      v += wi[a] * (wj[0] * p[0] + wj[1] * p[1] + wj[2] * p[2] + wj[3] * p[3]);
    }
  }
  return clip_ ? std::max(0.0, v) : v;
}

TabulatedFunction TabulatedFunction::from_estimate(const DensityEstimate& est, double half_width,
                                                   int points_per_half_period) {
  const int d = est.dimension();
  if (d > 2) throw UsageError("lattice tabulation supports d = 1 or 2");
  if (points_per_half_period < 2) throw UsageError("points_per_half_period must be >= 2");
  const FourierNodes& nodes = est.nodes();
  const double step = std::numbers::pi / (points_per_half_period * nodes.radius());
  Lattice lattice = Lattice::cube(d, half_width, step);
  const Eigen::Index r = nodes.count();
  const auto& w = est.weights();
  const double scale = est.amplitude() / static_cast<double>(r);
  std::vector<double> values(lattice.size());

  if (d == 1) {
    const int count = lattice.count[0];
    const double lo = lattice.lo[0];
    const double dx = lattice.step[0];
    std::vector<double> zr(r), zi(r), sr(r), si(r), wr(r), wi(r);
    for (Eigen::Index k = 0; k < r; ++k) {
      const double zeta = nodes.zeta(k, 0);
      sr[k] = std::cos(zeta * dx);
      si[k] = -std::sin(zeta * dx);
      wr[k] = w[static_cast<std::size_t>(k)].real();
      wi[k] = w[static_cast<std::size_t>(k)].imag();
    }
    constexpr int kReanchor = 64;
    for (int g = 0; g < count; ++g) {
      if (g % kReanchor == 0) {
        const double x = lo + dx * g;
        for (Eigen::Index k = 0; k < r; ++k) {
          const double phase = nodes.zeta(k, 0) * x;
          zr[k] = std::cos(phase);
          zi[k] = -std::sin(phase);
        }
      }
      double acc = 0.0;
      for (Eigen::Index k = 0; k < r; ++k) {
        acc += wr[k] * zr[k] - wi[k] * zi[k];
        const double nr = zr[k] * sr[k] - zi[k] * si[k];
        const double ni = zr[k] * si[k] + zi[k] * sr[k];
        zr[k] = nr;
        zi[k] = ni;
      }
      values[static_cast<std::size_t>(g)] = acc * scale;
    }
  } else {
    const int g1 = lattice.count[0];
    const int g2 = lattice.count[1];
    Matrix e1r(g1, r), e1i(g1, r), e2r(g2, r), e2i(g2, r);
    for (Eigen::Index k = 0; k < r; ++k) {
      const auto& wk = w[static_cast<std::size_t>(k)];
      for (int g = 0; g < g1; ++g) {
        const double phase = nodes.zeta(k, 0) * lattice.coordinate(0, g);
        const std::complex<double> e = wk * std::complex<double>(std::cos(phase), -std::sin(phase));
        e1r(g, k) = e.real();
        e1i(g, k) = e.imag();
      }
      for (int l = 0; l < g2; ++l) {
        const double phase = nodes.zeta(k, 1) * lattice.coordinate(1, l);
        e2r(l, k) = std::cos(phase);
        e2i(l, k) = -std::sin(phase);
      }
    }
    Matrix re = e1r * e2r.transpose();
    re.noalias() -= e1i * e2i.transpose();
    for (int g = 0; g < g1; ++g)
      for (int l = 0; l < g2; ++l) values[static_cast<std::size_t>(g) * g2 + l] = re(g, l) * scale;
  }

  auto exact = std::make_shared<const DensityEstimate>(est);
  return TabulatedFunction(std::move(lattice), std::move(values),
                           [exact](std::span<const double> x) { return (*exact)(x); }, true);
}

TabulatedFunction TabulatedFunction::from_function(const DensityFn& fn, Lattice lattice, bool clip) {
  const int d = lattice.dimension();
  if (d < 1 || d > 2) throw UsageError("tabulated functions support d = 1 or 2");
  std::vector<double> values(lattice.size());
  std::vector<double> x(static_cast<std::size_t>(d));
  if (d == 1) {
    for (int g = 0; g < lattice.count[0]; ++g) {
      x[0] = lattice.coordinate(0, g);
      values[static_cast<std::size_t>(g)] = fn(x);
    }
  } else {
    for (int g = 0; g < lattice.count[0]; ++g)
      for (int l = 0; l < lattice.count[1]; ++l) {
        x[0] = lattice.coordinate(0, g);
        x[1] = lattice.coordinate(1, l);
        values[static_cast<std::size_t>(g) * lattice.count[1] + l] = fn(x);
      }
  }
  return TabulatedFunction(std::move(lattice), std::move(values), fn, clip);
}

DensityFn TabulatedFunction::as_function() const {
  auto self = std::make_shared<const TabulatedFunction>(*this);
  return [self](std::span<const double> x) { return (*self)(x); };
}

DensityFn fast_density(const DensityEstimate& est, double half_width) {
  if (est.dimension() <= 2)
    return TabulatedFunction::from_estimate(est, half_width, est.dimension() == 1 ? 16 : 6).as_function();
  auto exact = std::make_shared<const DensityEstimate>(est);
  return [exact](std::span<const double> x) { return (*exact)(x); };
}

}  // namespace ssdeconv
