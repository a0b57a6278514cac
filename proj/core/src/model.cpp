#include "ssdeconv/model.hpp"

#include <cmath>

#include "json_util.hpp"
#include "ssdeconv/error.hpp"

namespace ssdeconv {

using detail::json;

void StateSpaceSpec::validate() const {
  const Eigen::Index d = A.rows();
  if (d < 1 || A.cols() != d || B.rows() != d || B.cols() != d)
    throw DataError("A and B must both be d x d with d >= 1");
  if (eps.dimension() != d || eta.dimension() != d) throw DataError("noise dimensions must match d");
  if (!A.allFinite() || !B.allFinite()) throw DataError("A and B must be finite");
  if (min_singular_value(B) < 1e-12 * std::max(1.0, spectral_norm(B))) throw SingularMatrix("B is singular");
  if (min_singular_value(A) < 1e-12 * std::max(1.0, spectral_norm(A))) throw SingularMatrix("A is singular");
  if (!(spectral_norm(A) < 1.0)) throw DataError("spectral norm of A must be < 1");
  const Matrix sigma = eps.covariance();
  if (min_singular_value(sigma) < 1e-12 * std::max(1.0, spectral_norm(sigma)))
    throw SingularMatrix("state noise covariance is singular");
}

std::string StateSpaceSpec::to_json() const {
  json j;
  j["d"] = dimension();
  j["A"] = detail::matrix_to_json(A);
  j["B"] = detail::matrix_to_json(B);
  j["eps"] = json::parse(eps.to_json());
  j["eta"] = json::parse(eta.to_json());
  return j.dump();
}

StateSpaceSpec StateSpaceSpec::from_json(const std::string& text) {
  const json j = detail::parse_json(text, "state space spec");
  for (const char* key : {"d", "A", "B", "eps", "eta"}) {
    if (!j.contains(key)) throw DataError(std::string("state space spec is missing '") + key + "'");
  }
  if (!j["d"].is_number_integer() || j["d"].get<int>() < 1) throw DataError("'d' must be a positive integer");
  StateSpaceSpec spec{detail::matrix_from_json(j["A"], "A"), detail::matrix_from_json(j["B"], "B"),
                      NoiseFamily::from_json(j["eps"].dump()), NoiseFamily::from_json(j["eta"].dump())};
  if (spec.dimension() != j["d"].get<int>()) throw DataError("'d' does not match the shape of A");
  spec.validate();
  return spec;
}

ObservationSeries::ObservationSeries(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 1) throw DataError("observation series needs d >= 1 columns");
  if (values_.rows() < kMinLength) throw DataError("observation series needs at least 3 rows");
  if (!values_.allFinite()) throw DataError("observation series contains non-finite values");
}

void validate_regime(const SmoothnessRegime& regime) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        bool ok = r.beta > 0 && r.b > 0 && r.c > 0;
        if constexpr (std::is_same_v<T, SuperSmooth>) ok = ok && r.gamma > 0 && r.r > 0;
        if (!ok) throw DataError("smoothness parameters must be strictly positive");
      },
      regime);
}

std::string regime_name(const SmoothnessRegime& regime) {
  return std::holds_alternative<OrdinarySmooth>(regime) ? "ordinary" : "super";
}

}  // namespace ssdeconv
