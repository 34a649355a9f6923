#include "dpc/selfenergy.hpp"

#include <cmath>
#include <numbers>

#include "dpc/errors.hpp"

namespace dpc {

void PhysicalConstants::validate() const {
  if (!(G > 0.0) || !(hbar > 0.0)) {
    throw DomainError("physical constants must be strictly positive");
  }
}

void MassBody::validate() const {
  if (!(mass > 0.0)) throw DomainError("body '" + label + "': mass must be > 0");
  if (!(radius > 0.0)) throw DomainError("body '" + label + "': radius must be > 0");
  if (!(shape_correction > 0.0)) {
    throw DomainError("body '" + label + "': shape_correction must be > 0");
  }
}

double equivalent_sphere_radius(double mass, double density) {
  if (!(mass > 0.0) || !(density > 0.0)) {
    throw DomainError("equivalent sphere needs positive mass and density");
  }
  return std::cbrt(3.0 * mass / (4.0 * std::numbers::pi * density));
}

MassBody equivalent_sphere(double mass, double volume, std::string label) {
  if (!(volume > 0.0)) throw DomainError("equivalent sphere needs positive volume");
  return MassBody{mass, std::cbrt(3.0 * volume / (4.0 * std::numbers::pi)),
                  std::move(label)};
}

double SuperpositionGeometry::lambda() const {
  return lambda_ratio(displacement, body.radius);
}

void SuperpositionGeometry::validate() const {
  body.validate();
  if (!(displacement >= 0.0)) throw DomainError("displacement must be >= 0");
}

const char* to_string(OverlapVariant v) {
  return v == OverlapVariant::PaperPrinted ? "printed" : "corrected";
}

OverlapVariant overlap_variant_from_string(const std::string& s) {
  if (s == "printed" || s == "paper_printed") return OverlapVariant::PaperPrinted;
  if (s == "corrected" || s == "continuity_corrected") {
    return OverlapVariant::ContinuityCorrected;
  }
  throw DomainError("unknown overlap variant '" + s + "' (expected printed|corrected)");
}

double lambda_ratio(double displacement, double radius) {
  if (!(radius > 0.0)) throw DomainError("lambda_ratio: radius must be > 0");
  if (!(displacement >= 0.0)) throw DomainError("lambda_ratio: displacement must be >= 0");
  return displacement / (2.0 * radius);
}

double self_energy_scale(const MassBody& body, const PhysicalConstants& c) {
  return 6.0 * c.G * body.mass * body.mass / (5.0 * body.radius) * body.shape_correction;
}

double self_energy_separated(const MassBody& body, double lambda,
                             const PhysicalConstants& c) {
  body.validate();
  if (!(lambda >= 1.0)) {
    throw RegimeError("self_energy_separated requires lambda >= 1; use the overlapping form");
  }
  if (std::isinf(lambda)) return self_energy_scale(body, c);
  return self_energy_scale(body, c) * (1.0 - 5.0 / (12.0 * lambda));
}

double self_energy_overlapping(const MassBody& body, double lambda,
                               OverlapVariant variant, const PhysicalConstants& c) {
  body.validate();
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw RegimeError("self_energy_overlapping requires 0 <= lambda <= 1");
  }
  const double cubic = variant == OverlapVariant::PaperPrinted ? 5.0 / 3.0 : 5.0 / 4.0;
  const double l2 = lambda * lambda;
  const double l3 = l2 * lambda;
  const double poly = 5.0 / 3.0 * l2 - cubic * l3 + l3 * l2 / 6.0;
  return self_energy_scale(body, c) * poly;
}

double self_energy(const SuperpositionGeometry& geometry, OverlapVariant variant,
                   const PhysicalConstants& c) {
  geometry.validate();
  const double lambda = geometry.lambda();
  if (lambda <= 1.0) return self_energy_overlapping(geometry.body, lambda, variant, c);
  return self_energy_separated(geometry.body, lambda, c);
}

double collapse_time(double energy, double gamma, const PhysicalConstants& c) {
  if (!(energy >= 0.0)) throw DomainError("collapse_time: energy must be >= 0");
  if (!(gamma > 0.0)) throw DomainError("collapse_time: gamma must be > 0");
  if (energy == 0.0) return kNeverCollapses;
  return gamma * c.hbar / energy;
}

double collapse_rate(double energy, double gamma, const PhysicalConstants& c) {
  if (!(energy >= 0.0)) throw DomainError("collapse_rate: energy must be >= 0");
  if (!(gamma > 0.0)) throw DomainError("collapse_rate: gamma must be > 0");
  return energy / (gamma * c.hbar);
}

MountReaction mount_reaction_contribution(const MassBody& mirror,
                                          double mirror_displacement,
                                          const MassBody& mount,
                                          OverlapVariant variant,
                                          const PhysicalConstants& c) {
  mirror.validate();
  if (!(mount.mass > 0.0)) throw DomainError("mount mass must be > 0");
  MountReaction out;
  if (std::isinf(mount.mass)) return out;
  mount.validate();
  out.mount_displacement = mirror.mass / mount.mass * mirror_displacement;
  out.mount_energy = self_energy({mount, out.mount_displacement}, variant, c);
  return out;
}

SystemEnergy system_self_energy(std::span<const SuperpositionGeometry> geometries,
                                std::span<const double> extra_component_rates,
                                OverlapVariant variant, double gamma,
                                const PhysicalConstants& c) {
  SystemEnergy out;
  for (const auto& g : geometries) out.energy += self_energy(g, variant, c);
  out.rate = collapse_rate(out.energy, gamma, c);
  for (double r : extra_component_rates) {
    if (!(r >= 0.0)) throw DomainError("component collapse rate must be >= 0");
    out.rate += r;
  }
  return out;
}

}  // namespace dpc
