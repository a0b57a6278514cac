#include "ssdeconv/noise.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "json_util.hpp"
#include "ssdeconv/error.hpp"

namespace ssdeconv {

namespace {

using detail::json;

constexpr int kStackDims = 8;

// Scratch storage for a transformed point without touching the heap for d <= 8.
class PointBuffer {
 public:
  explicit PointBuffer(std::size_t d) : d_(d) {
    if (d > kStackDims) heap_.resize(d);
  }
  double* data() { return d_ > kStackDims ? heap_.data() : stack_.data(); }
  std::span<const double> view() { return {data(), d_}; }

 private:
  std::size_t d_;
  std::array<double, kStackDims> stack_{};
  std::vector<double> heap_;
};

void require_positive(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw DataError(std::string(what) + " must be non-empty");
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DataError(std::string(what) + " entries must be positive and finite");
  }
}

std::vector<double> doubles_from_json(const json& j, const char* field, std::size_t d_hint) {
  if (j.is_number()) return std::vector<double>(d_hint == 0 ? 1 : d_hint, j.get<double>());
  if (!j.is_array()) throw DataError(std::string("noise field '") + field + "' must be a number or array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError(std::string("noise field '") + field + "' has a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

json family_to_json(const NoiseFamily& f) {
  return std::visit(
      [&](const auto& rep) -> json {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, NoiseFamily::GaussianIID>) {
          return json{{"type", "gaussian"}, {"sigma", rep.sigma}};
        } else if constexpr (std::is_same_v<T, NoiseFamily::GammaDifferenceIID>) {
          return json{{"type", "gamma_difference"}, {"shape", rep.shape}, {"scale", rep.scale}};
        } else {
          return json{{"type", "linear_map"},
                      {"matrix", detail::matrix_to_json(rep.mixing)},
                      {"base", family_to_json(*rep.base)}};
        }
      },
      f.variant());
}

NoiseFamily family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw DataError("noise family must be an object with a string 'type'");
  const std::string type = j["type"].get<std::string>();
  const std::size_t d = j.contains("d") && j["d"].is_number_integer() ? j["d"].get<std::size_t>() : 0;
  if (type == "gaussian") {
    if (!j.contains("sigma")) throw DataError("gaussian noise requires 'sigma'");
    return NoiseFamily::gaussian_iid(doubles_from_json(j["sigma"], "sigma", d));
  }
  if (type == "gamma_difference") {
    if (!j.contains("shape") || !j.contains("scale"))
      throw DataError("gamma_difference noise requires 'shape' and 'scale'");
    auto shape = doubles_from_json(j["shape"], "shape", d);
    auto scale = doubles_from_json(j["scale"], "scale", std::max(d, shape.size()));
    if (shape.size() == 1 && scale.size() > 1) shape.resize(scale.size(), shape[0]);
    return NoiseFamily::gamma_difference_iid(std::move(shape), std::move(scale));
  }
  if (type == "linear_map") {
    if (!j.contains("matrix") || !j.contains("base"))
      throw DataError("linear_map noise requires 'matrix' and 'base'");
    return NoiseFamily::linear_map(detail::matrix_from_json(j["matrix"], "matrix"), family_from_json(j["base"]));
  }
  throw DataError("unknown noise family type '" + type + "'");
}

}  // namespace

double gamma_difference_density(double x, double shape, double scale) {
  // Symmetric variance-gamma law with alpha = 1/scale, lambda = shape:
  //   f(x) = alpha^{2k} |x|^{k-1/2} K_{k-1/2}(alpha |x|) / (sqrt(pi) Gamma(k) (2 alpha)^{k-1/2})
  const double alpha = 1.0 / scale;
  const double nu = shape - 0.5;
  const double ax = std::abs(x);
  const double log_norm = 2.0 * shape * std::log(alpha) - 0.5 * std::log(std::numbers::pi) -
                          std::lgamma(shape) - nu * std::log(2.0 * alpha);
  if (ax == 0.0 || alpha * ax < 1e-300) {
    if (nu <= 0.0) {
      throw DensityUnbounded("gamma_difference density is unbounded at the origin (shape <= 1/2)");
    }
    // |x|^nu K_nu(alpha |x|) -> Gamma(nu) 2^{nu-1} alpha^{-nu}
    return std::exp(log_norm + std::lgamma(nu) + (nu - 1.0) * std::log(2.0) - nu * std::log(alpha));
  }
  const double arg = alpha * ax;
  if (arg > 700.0) return 0.0;
  const double k = std::cyl_bessel_k(std::abs(nu), arg);
  return std::exp(log_norm + nu * std::log(ax)) * k;
}

namespace detail {

VarianceGammaTable::VarianceGammaTable(double shape, double scale) : shape_(shape), scale_(scale) {
  const double sd = scale * std::sqrt(2.0 * shape);
  lo_ = -kHalfWidthSd * sd;
  step_ = 2.0 * kHalfWidthSd * sd / (kNodes - 1);
  values_.resize(kNodes);
  for (int i = 0; i < kNodes; ++i) {
    const double x = lo_ + step_ * i;
    values_[i] = gamma_difference_density(x, shape, scale);
  }
}

double VarianceGammaTable::operator()(double x) const {
  const double pos = (x - lo_) / step_;
  if (!(pos >= 0.0) || pos >= kNodes - 1) return gamma_difference_density(x, shape_, scale_);
  // The log / power singularity at 0 for shape <= 1/2 is not interpolable.
  if (shape_ <= 0.5 && std::abs(x) < 2.0 * step_) return gamma_difference_density(x, shape_, scale_);
  const int i = static_cast<int>(pos);
  const double t = pos - i;
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

}  // namespace detail

NoiseFamily NoiseFamily::gaussian_iid(std::vector<double> sigma) {
  require_positive(sigma, "gaussian sigma");
  const int d = static_cast<int>(sigma.size());
  return NoiseFamily(d, GaussianIID{std::move(sigma)});
}

NoiseFamily NoiseFamily::gaussian_iid(int d, double sigma) {
  return gaussian_iid(std::vector<double>(static_cast<std::size_t>(d), sigma));
}

NoiseFamily NoiseFamily::gamma_difference_iid(std::vector<double> shape, std::vector<double> scale) {
  require_positive(shape, "gamma_difference shape");
  require_positive(scale, "gamma_difference scale");
  if (shape.size() != scale.size()) throw DataError("gamma_difference shape and scale lengths differ");
  GammaDifferenceIID rep{std::move(shape), std::move(scale), {}};
  for (std::size_t i = 0; i < rep.shape.size(); ++i) {
    std::shared_ptr<const detail::VarianceGammaTable> table;
    for (std::size_t j = 0; j < i; ++j) {
      if (rep.shape[j] == rep.shape[i] && rep.scale[j] == rep.scale[i]) table = rep.tables[j];
    }
    if (!table) table = std::make_shared<const detail::VarianceGammaTable>(rep.shape[i], rep.scale[i]);
    rep.tables.push_back(std::move(table));
  }
  const int d = static_cast<int>(rep.shape.size());
  return NoiseFamily(d, std::move(rep));
}

NoiseFamily NoiseFamily::gamma_difference_iid(int d, double shape, double scale) {
  return gamma_difference_iid(std::vector<double>(static_cast<std::size_t>(d), shape),
                              std::vector<double>(static_cast<std::size_t>(d), scale));
}

NoiseFamily NoiseFamily::linear_map(Matrix mixing, NoiseFamily base) {
  if (mixing.rows() != mixing.cols() || mixing.rows() != base.dimension())
    throw DataError("linear_map matrix must be d x d with d the base dimension");
  Matrix inverse = checked_inverse(mixing, "linear_map mixing matrix");
  const double abs_det = std::abs(mixing.determinant());
  const int d = base.dimension();
  return NoiseFamily(d, LinearMap{std::move(mixing), std::move(inverse), abs_det,
                                  std::make_shared<const NoiseFamily>(std::move(base))});
}

NoiseFamily NoiseFamily::gaussian(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw SingularMatrix("gaussian covariance is not positive definite");
  return linear_map(llt.matrixL(), gaussian_iid(static_cast<int>(cov.rows()), 1.0));
}

double NoiseFamily::density(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw UsageError("density: dimension mismatch");
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, GaussianIID>) {
          double log_f = 0.0;
          for (int i = 0; i < dim_; ++i) {
            const double z = x[i] / rep.sigma[i];
            log_f += -0.5 * z * z - std::log(rep.sigma[i]) - 0.5 * std::log(2.0 * std::numbers::pi);
          }
          return std::exp(log_f);
        } else if constexpr (std::is_same_v<T, GammaDifferenceIID>) {
          double f = 1.0;
          for (int i = 0; i < dim_; ++i) f *= (*rep.tables[i])(x[i]);
          return f;
        } else {
          PointBuffer buf(dim_);
          double* y = buf.data();
          for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += rep.inverse(i, j) * x[j];
            y[i] = s;
          }
          return rep.base->density(buf.view()) / rep.abs_det;
        }
      },
      rep_);
}

std::complex<double> NoiseFamily::characteristic(std::span<const double> t) const {
  if (static_cast<int>(t.size()) != dim_) throw UsageError("characteristic: dimension mismatch");
  return std::visit(
      [&](const auto& rep) -> std::complex<double> {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, GaussianIID>) {
          double e = 0.0;
          for (int i = 0; i < dim_; ++i) e += rep.sigma[i] * rep.sigma[i] * t[i] * t[i];
          return {std::exp(-0.5 * e), 0.0};
        } else if constexpr (std::is_same_v<T, GammaDifferenceIID>) {
          // (1 - i theta t)^{-k} (1 + i theta t)^{-k} = (1 + theta^2 t^2)^{-k}
          double log_phi = 0.0;
          for (int i = 0; i < dim_; ++i) {
            const double s = rep.scale[i] * t[i];
            log_phi -= rep.shape[i] * std::log1p(s * s);
          }
          return {std::exp(log_phi), 0.0};
        } else {
          PointBuffer buf(dim_);
          double* u = buf.data();
          for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += rep.mixing(j, i) * t[j];
            u[i] = s;
          }
          return rep.base->characteristic(buf.view());
        }
      },
      rep_);
}

void NoiseFamily::sample_into(Engine& engine, Matrix& out) const {
  if (out.cols() != dim_) throw UsageError("sample_into: column count must equal the dimension");
  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, GaussianIID>) {
          std::normal_distribution<double> normal(0.0, 1.0);
          for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (int i = 0; i < dim_; ++i) out(r, i) = rep.sigma[i] * normal(engine);
        } else if constexpr (std::is_same_v<T, GammaDifferenceIID>) {
          std::vector<std::gamma_distribution<double>> gammas;
          for (int i = 0; i < dim_; ++i) gammas.emplace_back(rep.shape[i], rep.scale[i]);
          for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (int i = 0; i < dim_; ++i) {
              const double g1 = gammas[i](engine);
              const double g2 = gammas[i](engine);
              out(r, i) = g1 - g2;
            }
        } else {
          Matrix base(out.rows(), dim_);
          rep.base->sample_into(engine, base);
          out.noalias() = base * rep.mixing.transpose();
        }
      },
      rep_);
}

Matrix NoiseFamily::sample(Seed seed, Eigen::Index m) const {
  if (m < 1) throw UsageError("sample: count must be >= 1");
  Engine engine = make_engine(seed);
  Matrix out(m, dim_);
  sample_into(engine, out);
  return out;
}

Matrix NoiseFamily::covariance() const {
  return std::visit(
      [&](const auto& rep) -> Matrix {
        using T = std::decay_t<decltype(rep)>;
        Matrix c = Matrix::Zero(dim_, dim_);
        if constexpr (std::is_same_v<T, GaussianIID>) {
          for (int i = 0; i < dim_; ++i) c(i, i) = rep.sigma[i] * rep.sigma[i];
        } else if constexpr (std::is_same_v<T, GammaDifferenceIID>) {
          for (int i = 0; i < dim_; ++i) c(i, i) = 2.0 * rep.shape[i] * rep.scale[i] * rep.scale[i];
        } else {
          c = rep.mixing * rep.base->covariance() * rep.mixing.transpose();
        }
        return c;
      },
      rep_);
}

bool NoiseFamily::is_gaussian() const {
  if (std::holds_alternative<GaussianIID>(rep_)) return true;
  if (const auto* lm = std::get_if<LinearMap>(&rep_)) return lm->base->is_gaussian();
  return false;
}

std::string NoiseFamily::to_json() const { return family_to_json(*this).dump(); }

NoiseFamily NoiseFamily::from_json(const std::string& text) {
  return family_from_json(detail::parse_json(text, "noise family"));
}

}  // namespace ssdeconv
