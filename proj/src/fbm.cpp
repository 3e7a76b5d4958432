#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fmt/format.h>
#include <mutex>

#include "shearsep/noise.hpp"
#include "shearsep/rng.hpp"

namespace shearsep::noise {

namespace {

// The FFTW planner is not reentrant; executing an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t m) {
  std::size_t p = 1;
  while (p < m) p <<= 1;
  return p;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

fftw_plan make_plan(std::size_t len, fftw_complex* in, fftw_complex* out) {
  std::lock_guard lock(planner_mutex());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(len), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  if (p == nullptr) throw std::runtime_error("fftw: plan creation failed");
  return p;
}

void destroy_plan(fftw_plan p) {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(p);
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::invalid_argument(fmt::format("fbm: hurst={} outside (0,1)", hurst));
  }
}

// Eigenvalues of the length-2M circulant whose first row is
// [g0, ..., gM, g(M-1), ..., g1]. Real because the row is symmetric.
std::vector<double> embedding_spectrum(double hurst, std::size_t half) {
  const std::size_t len = 2 * half;
  FftwBuffer in(len), out(len);
  for (std::size_t k = 0; k <= half; ++k) {
    in.data[k][0] = fgn_autocovariance(hurst, k);
    in.data[k][1] = 0.0;
  }
  for (std::size_t k = 1; k < half; ++k) {
    in.data[len - k][0] = in.data[k][0];
    in.data[len - k][1] = 0.0;
  }
  fftw_plan p = make_plan(len, in.data, out.data);
  fftw_execute(p);
  destroy_plan(p);
  std::vector<double> lam(len);
  for (std::size_t k = 0; k < len; ++k) lam[k] = out.data[k][0];
  return lam;
}

constexpr double kEigenTolerance = -1e-10;

}  // namespace

double fgn_autocovariance(double hurst, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  if (k == 0) return 1.0;
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

std::vector<double> circulant_eigenvalues(double hurst, std::size_t m) {
  check_hurst(hurst);
  if (m == 0) throw std::invalid_argument("circulant_eigenvalues: m must be >= 1");
  return embedding_spectrum(hurst, next_pow2(m));
}

double fbm_covariance(double hurst, double t, double s) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(t), h2) + std::pow(std::abs(s), h2) - std::pow(std::abs(t - s), h2));
}

struct FbmSampler::Impl {
  // Circulant route.
  std::size_t len = 0;
  std::vector<double> sqrt_lam;  // sqrt(lambda_k / len)
  fftw_plan plan = nullptr;
  // Dense route: lower Cholesky factor of the increment covariance.
  Eigen::MatrixXd chol;

  ~Impl() {
    if (plan != nullptr) destroy_plan(plan);
  }
};

FbmSampler::FbmSampler(double hurst, double dt, std::size_t n, FbmMethod method)
    : hurst_(hurst), dt_(dt), n_(n), method_(method), impl_(std::make_unique<Impl>()) {
  check_hurst(hurst);
  if (n < 2) throw std::invalid_argument("sample_fbm: n must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("sample_fbm: dt must be > 0");
  const std::size_t m = n - 1;  // increments

  bool embedded = false;
  if (method != FbmMethod::Cholesky) {
    const std::size_t half = next_pow2(m);
    std::vector<double> lam = embedding_spectrum(hurst, half);
    const double lo = *std::min_element(lam.begin(), lam.end());
    if (lo >= kEigenTolerance) {
      impl_->len = 2 * half;
      impl_->sqrt_lam.resize(lam.size());
      for (std::size_t k = 0; k < lam.size(); ++k) {
        impl_->sqrt_lam[k] = std::sqrt(std::max(lam[k], 0.0) / static_cast<double>(impl_->len));
      }
      FftwBuffer a(impl_->len), b(impl_->len);
      impl_->plan = make_plan(impl_->len, a.data, b.data);
      method_ = FbmMethod::CirculantEmbedding;
      embedded = true;
    } else if (method == FbmMethod::CirculantEmbedding) {
      throw CapacityError(fmt::format("fbm: circulant embedding not nonnegative (min eigenvalue {})", lo));
    }
  }
  if (!embedded) {
    if (n > kCholeskyCap) {
      throw CapacityError(fmt::format("fbm: grid of {} nodes exceeds the dense fallback cap {}", n, kCholeskyCap));
    }
    Eigen::MatrixXd cov(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        cov(i, j) = fgn_autocovariance(hurst, i > j ? i - j : j - i);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("fbm: increment covariance not positive definite");
    impl_->chol = llt.matrixL();
    method_ = FbmMethod::Cholesky;
  }
}

FbmSampler::~FbmSampler() = default;

NoisePath FbmSampler::sample(std::uint64_t seed, double t0) const {
  const std::size_t m = n_ - 1;
  const double scale = std::pow(dt_, hurst_);
  std::vector<double> inc1(m), inc2(m);

  if (method_ == FbmMethod::CirculantEmbedding) {
    // One complex transform yields two independent real sequences: the real
    // and imaginary parts each carry the target covariance.
    const std::size_t len = impl_->len;
    FftwBuffer in(len), out(len);
    for (std::size_t k = 0; k < len; ++k) {
      const auto [u, v] = rng::normal_pair(seed, rng::Domain::Fbm, k);
      in.data[k][0] = impl_->sqrt_lam[k] * u;
      in.data[k][1] = impl_->sqrt_lam[k] * v;
    }
    fftw_execute_dft(impl_->plan, in.data, out.data);
    for (std::size_t i = 0; i < m; ++i) {
      inc1[i] = out.data[i][0];
      inc2[i] = out.data[i][1];
    }
  } else {
    Eigen::VectorXd z1(m), z2(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto [u, v] = rng::normal_pair(seed, rng::Domain::Fbm, i, 1);
      z1[i] = u;
      z2[i] = v;
    }
    const Eigen::VectorXd y1 = impl_->chol.triangularView<Eigen::Lower>() * z1;
    const Eigen::VectorXd y2 = impl_->chol.triangularView<Eigen::Lower>() * z2;
    for (std::size_t i = 0; i < m; ++i) {
      inc1[i] = y1[i];
      inc2[i] = y2[i];
    }
  }

  std::vector<Vec2> v(n_);
  Vec2 w{};
  for (std::size_t i = 0; i < m; ++i) {
    w.x1 += scale * inc1[i];
    w.x2 += scale * inc2[i];
    v[i + 1] = w;
  }
  return NoisePath(t0, dt_, std::move(v));
}

NoisePath sample_fbm(std::uint64_t seed, double hurst, double t0, double dt, std::size_t n,
                     FbmMethod method) {
  return FbmSampler(hurst, dt, n, method).sample(seed, t0);
}

}  // namespace shearsep::noise
