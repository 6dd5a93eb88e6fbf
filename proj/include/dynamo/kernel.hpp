// Localizing kernel families and the per-time-point weight vector.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "dynamo/errors.hpp"

namespace dynamo {

enum class KernelFamily { Epanechnikov, Gaussian, Boxcar };

inline std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Boxcar: return "boxcar";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "epanechnikov") return KernelFamily::Epanechnikov;
  if (s == "gaussian") return KernelFamily::Gaussian;
  if (s == "boxcar") return KernelFamily::Boxcar;
  throw DataError("unknown kernel family '" + s +
                  "' (expected epanechnikov, gaussian or boxcar)");
}

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  double bandwidth = 0.5;

  void validate() const {
    if (!(bandwidth > 0)) throw DataError("bandwidth must be > 0");
    if (family != KernelFamily::Gaussian && bandwidth > 1.0) {
      // Compact-support families live on normalized time, so h <= 1.
      throw DataError("bandwidth must be <= 1 for " + to_string(family));
    }
  }
};

inline double kernel_value(KernelFamily family, double u) {
  switch (family) {
    case KernelFamily::Epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846);
    case KernelFamily::Boxcar:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
  }
  return 0.0;
}

inline double kernel_value(const KernelSpec& spec, double u) {
  return kernel_value(spec.family, u);
}

// Weight of time point l for a fit centered at t (both 1-based):
//   w_l = K((tau_l - tau_t)/h) / (T*h).
// The 1/(T*h) factor is kept verbatim instead of renormalizing to sum one,
// so loss values are directly comparable across bandwidths.
inline Eigen::VectorXd local_weights(const KernelSpec& spec, Eigen::Index t,
                                     Eigen::Index T) {
  spec.validate();
  if (t < 1 || t > T) {
    throw DataError("time index t=" + std::to_string(t) +
                    " outside [1, T=" + std::to_string(T) + "]");
  }
  const double h = spec.bandwidth;
  const double Th = static_cast<double>(T) * h;
  Eigen::VectorXd w(T);
  for (Eigen::Index l = 1; l <= T; ++l) {
    // (tau_l - tau_t)/h computed as (l - t)/(T*h), exact at the support edge
    const double u = static_cast<double>(l - t) / Th;
    w(l - 1) = kernel_value(spec, u) / Th;
  }
  if ((w.array() > 0.0).count() == 0) {
    throw DataError("all kernel weights are zero at t=" + std::to_string(t) +
                    "; increase the bandwidth");
  }
  return w;
}

}  // namespace dynamo
