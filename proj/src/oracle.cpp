#include "dpc/oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "dpc/errors.hpp"

namespace dpc {
namespace {

// fftw planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

// Occupied fraction of the cube centred at (x, y, z) with side h.
double occupancy(double x, double y, double z, double h, double radius,
                 int subsamples) {
  const double r = std::sqrt(x * x + y * y + z * z);
  const double half_diag = 0.5 * std::sqrt(3.0) * h;
  if (r + half_diag <= radius) return 1.0;
  if (r - half_diag > radius) return 0.0;
  const double r2 = radius * radius;
  int inside = 0;
  for (int a = 0; a < subsamples; ++a) {
    const double px = x + ((a + 0.5) / subsamples - 0.5) * h;
    for (int b = 0; b < subsamples; ++b) {
      const double py = y + ((b + 0.5) / subsamples - 0.5) * h;
      for (int k = 0; k < subsamples; ++k) {
        const double pz = z + ((k + 0.5) / subsamples - 0.5) * h;
        if (px * px + py * py + pz * pz <= r2) ++inside;
      }
    }
  }
  return static_cast<double>(inside) / (subsamples * subsamples * subsamples);
}

}  // namespace

double unit_cube_self_integral() {
  const double s2 = std::numbers::sqrt2;
  const double s3 = std::numbers::sqrt3;
  return 2.0 * ((1.0 + s2 - 2.0 * s3) / 5.0 - std::numbers::pi / 3.0 +
                std::log((1.0 + s2) * (2.0 + s3)));
}

OracleResult self_energy_numeric_oracle(const SuperpositionGeometry& geometry,
                                        int resolution, const PhysicalConstants& c,
                                        int subsamples) {
  geometry.validate();
  if (resolution < 8) throw DomainError("oracle resolution must be >= 8 voxels per radius");
  if (subsamples < 1) throw DomainError("oracle subsamples must be >= 1");

  const MassBody& body = geometry.body;
  const double radius = body.radius;
  const double ds = geometry.displacement;
  const double h = radius / resolution;

  OracleResult out;
  out.resolution = resolution;
  out.under_resolved = ds > 0.0 && ds < h / subsamples;

  const int nx = static_cast<int>(std::ceil((2.0 * radius + ds) / h)) + 2;
  const int ny = static_cast<int>(std::ceil(2.0 * radius / h)) + 2;
  out.grid = {nx, ny, ny};
  if (ds == 0.0) return out;

  const std::size_t cells = static_cast<std::size_t>(nx) * ny * ny;
  std::vector<double> f1(cells), f2(cells);
  double sum1 = 0.0, sum2 = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double x = (i - 0.5 * (nx - 1)) * h;
    for (int j = 0; j < ny; ++j) {
      const double y = (j - 0.5 * (ny - 1)) * h;
      for (int k = 0; k < ny; ++k) {
        const double z = (k - 0.5 * (ny - 1)) * h;
        const std::size_t idx = (static_cast<std::size_t>(i) * ny + j) * ny + k;
        f1[idx] = occupancy(x + 0.5 * ds, y, z, h, radius, subsamples);
        f2[idx] = occupancy(x - 0.5 * ds, y, z, h, radius, subsamples);
        sum1 += f1[idx];
        sum2 += f2[idx];
      }
    }
  }

  // Padded grid large enough that circular convolution equals linear.
  const int px = 2 * nx, py = 2 * ny, pz = 2 * ny;
  const int pzc = pz / 2 + 1;
  const std::size_t real_n = static_cast<std::size_t>(px) * py * pz;
  const std::size_t cplx_n = static_cast<std::size_t>(px) * py * pzc;

  auto mass = fftw_buffer<double>(real_n);
  auto kernel = fftw_buffer<double>(real_n);
  auto mass_hat = fftw_buffer<fftw_complex>(cplx_n);
  auto kernel_hat = fftw_buffer<fftw_complex>(cplx_n);

  std::unique_ptr<Plan> fwd_mass, fwd_kernel, inverse;
  {
    std::lock_guard lock(planner_mutex());
    fwd_mass = std::make_unique<Plan>(
        fftw_plan_dft_r2c_3d(px, py, pz, mass.get(), mass_hat.get(), FFTW_ESTIMATE));
    fwd_kernel = std::make_unique<Plan>(fftw_plan_dft_r2c_3d(
        px, py, pz, kernel.get(), kernel_hat.get(), FFTW_ESTIMATE));
    inverse = std::make_unique<Plan>(
        fftw_plan_dft_c2r_3d(px, py, pz, mass_hat.get(), kernel.get(), FFTW_ESTIMATE));
  }

  const double m1 = body.mass / sum1;
  const double m2 = body.mass / sum2;
  std::fill(mass.get(), mass.get() + real_n, 0.0);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < ny; ++k) {
        const std::size_t src = (static_cast<std::size_t>(i) * ny + j) * ny + k;
        const std::size_t dst = (static_cast<std::size_t>(i) * py + j) * pz + k;
        mass[dst] = m1 * f1[src] - m2 * f2[src];
      }
    }
  }

  auto wrap = [](int i, int n) { return i <= n / 2 ? i : i - n; };
  for (int i = 0; i < px; ++i) {
    const double dx = wrap(i, px);
    for (int j = 0; j < py; ++j) {
      const double dy = wrap(j, py);
      for (int k = 0; k < pz; ++k) {
        const double dz = wrap(k, pz);
        const std::size_t idx = (static_cast<std::size_t>(i) * py + j) * pz + k;
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        kernel[idx] = d == 0.0 ? unit_cube_self_integral() / h : 1.0 / (d * h);
      }
    }
  }

  fwd_mass->execute();
  fwd_kernel->execute();
  // Out-of-place r2c leaves `mass` intact for the final contraction.
  for (std::size_t n = 0; n < cplx_n; ++n) {
    const std::complex<double> a(mass_hat[n][0], mass_hat[n][1]);
    const std::complex<double> b(kernel_hat[n][0], kernel_hat[n][1]);
    const auto p = a * b;
    mass_hat[n][0] = p.real();
    mass_hat[n][1] = p.imag();
  }
  inverse->execute();  // potential (unnormalised) now lives in `kernel`

  double acc = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < ny; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(i) * py + j) * pz + k;
        acc += mass[idx] * kernel[idx];
      }
    }
  }
  out.energy = 0.5 * c.G * acc / static_cast<double>(real_n) * body.shape_correction;
  return out;
}

}  // namespace dpc
