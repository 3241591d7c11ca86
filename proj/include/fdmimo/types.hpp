#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace fdmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using RVector = Eigen::VectorXd;

/// Power-ratio dB to linear: 10^(db/10).
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Linear power ratio to dB; 0 maps to -inf.
inline double linear_to_db(double lin) {
  if (lin <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(lin);
}

/// Path loss in dB to a linear power gain: 10^(-pl/10).
inline double pathloss_to_gain(double pl_db) { return std::pow(10.0, -pl_db / 10.0); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return linear_to_db(mw); }

/// Amplitude (voltage) dB to a linear field scale: 10^(db/20).
inline double amplitude_db_to_scale(double db) { return std::pow(10.0, db / 20.0); }

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic child-seed derivation from a parent seed and stream tags.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t s = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  s = mix64(s ^ mix64(a));
  s = mix64(s ^ mix64(b ^ 0xbb67ae8584caa73bULL));
  s = mix64(s ^ mix64(c ^ 0x3c6ef372fe94f82bULL));
  return s;
}

/// Seeded random source for all stochastic sampling in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform(double a, double b) { return a + (b - a) * unif_(gen_); }

  /// One draw of CN(0, variance).
  Complex cnormal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    return {s * normal(), s * normal()};
  }

  /// Matrix with i.i.d. CN(0, variance) entries, filled in row-major order.
  CMatrix cgaussian(Eigen::Index rows, Eigen::Index cols, double variance) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cnormal(variance);
    return m;
  }

  CVector cgaussian_vec(Eigen::Index n, double variance) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal(variance);
    return v;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace fdmimo
