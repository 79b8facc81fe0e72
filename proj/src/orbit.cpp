#include "kanlab/orbit.hpp"

#include "kanlab/error.hpp"

namespace kanlab {

double seed_value(const BaseSeed& seed) {
  if (const auto* r = std::get_if<RationalAngle>(&seed)) return r->value();
  return wrap01(std::get<double>(seed));
}

CouplingStream::CouplingStream(const skew::KanSystem& sys, const BaseSeed& seed) : sys_(&sys) {
  if (!sys.fiber().is_product()) throw PreconditionError("coupling stream needs a product fiber family");
  if (const auto* r = std::get_if<RationalAngle>(&seed)) {
    if (!sys.base().is_linear()) throw PreconditionError("rational seeds need a linear base map");
    if (r->den <= 0 || r->num < 0 || r->num >= r->den) throw PreconditionError("rational seed out of range");
    exact_ = true;
    rational_ = *r;
  } else {
    theta_ = wrap01(std::get<double>(seed));
  }
}

void CouplingStream::fill(std::span<double> out) {
  const auto& fiber = sys_->fiber();
  const auto& base = sys_->base();
  if (exact_) {
    for (double& e : out) {
      e = fiber.coefficient(rational_);
      rational_ = base.evaluate(rational_);
    }
  } else {
    for (double& e : out) {
      e = fiber.coefficient(theta_);
      theta_ = base.evaluate(theta_);
    }
  }
}

std::vector<double> CouplingStream::take(std::size_t count) {
  std::vector<double> out(count);
  fill(out);
  return out;
}

double CouplingStream::current_angle() const { return exact_ ? rational_.value() : theta_; }

BaseSeed CouplingStream::current() const {
  if (exact_) return rational_;
  return theta_;
}

CouplingCache::CouplingCache(const skew::KanSystem& sys, const BaseSeed& seed)
    : seed_(seed), stream_(sys, seed) {
  if (const auto* d = std::get_if<double>(&seed_)) seed_ = wrap01(*d);
}

std::span<const double> CouplingCache::prefix(std::size_t n) {
  if (coeffs_.size() < n) coeffs_.reserve(n);
  while (coeffs_.size() < n) {
    if (period_) {
      coeffs_.push_back(coeffs_[coeffs_.size() - *period_]);
      continue;
    }
    double e = 0.0;
    stream_.fill(std::span(&e, 1));
    coeffs_.push_back(e);
    if (stream_.current() == seed_) period_ = coeffs_.size();
  }
  return std::span<const double>(coeffs_.data(), n);
}

std::vector<double> base_orbit(const torus::ExpandingCircleMap& map, const BaseSeed& seed,
                               std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  if (const auto* r = std::get_if<RationalAngle>(&seed)) {
    if (!map.is_linear()) throw PreconditionError("rational seeds need a linear base map");
    RationalAngle a = *r;
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(a.value());
      a = map.evaluate(a);
    }
    return out;
  }
  double theta = wrap01(std::get<double>(seed));
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(theta);
    theta = map.evaluate(theta);
  }
  return out;
}

}  // namespace kanlab
