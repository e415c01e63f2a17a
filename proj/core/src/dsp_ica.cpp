#include "oow/dsp.hpp"
#include "oow/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace oow::dsp {

double excess_kurtosis(const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  if (n < 2) return 0.0;
  const Eigen::ArrayXd c = x.array() - x.mean();
  const double m2 = c.square().sum() / n;
  if (m2 <= 0.0) return 0.0;
  const double m4 = c.square().square().sum() / n;
  return m4 / (m2 * m2) - 3.0;
}

IcaResult fastica(const Eigen::MatrixXd& data, const IcaOptions& options) {
  const Eigen::Index channels = data.rows();
  const Eigen::Index n = data.cols();
  if (channels < 2) throw ParameterError("ICA needs at least 2 channels");
  if (n < 2) throw ParameterError("ICA needs at least 2 samples");

  const Eigen::VectorXd mean = data.rowwise().mean();
  const Eigen::MatrixXd x = data.colwise() - mean;
  const Eigen::MatrixXd cov = x * x.transpose() / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double floor = std::max(lambda.maxCoeff(), 0.0) * 1e-10;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = channels - 1; i >= 0; --i) {
    if (lambda[i] > floor) keep.push_back(i);
  }
  if (keep.empty()) throw DegenerateInputError("ICA input has zero variance");
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());

  Eigen::MatrixXd whiten(m, channels);
  Eigen::MatrixXd dewhiten(channels, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = std::sqrt(lambda[keep[j]]);
    whiten.row(j) = eig.eigenvectors().col(keep[j]).transpose() / s;
    dewhiten.col(j) = eig.eigenvectors().col(keep[j]) * s;
  }
  const Eigen::MatrixXd z = whiten * x;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  bool converged = true;

  for (Eigen::Index p = 0; p < m; ++p) {
    Eigen::VectorXd wp(m);
    for (Eigen::Index i = 0; i < m; ++i) wp[i] = normal(rng);
    auto orthogonalize = [&](Eigen::VectorXd& v) {
      for (Eigen::Index q = 0; q < p; ++q) v -= v.dot(w.row(q).transpose()) * w.row(q).transpose();
      v.normalize();
    };
    orthogonalize(wp);

    bool done = false;
    for (int it = 0; it < options.max_iter && !done; ++it) {
      const Eigen::ArrayXd proj = (wp.transpose() * z).transpose().array();
      const Eigen::ArrayXd g = proj.tanh();
      const double dg_mean = (1.0 - g.square()).mean();
      Eigen::VectorXd next = z * g.matrix() / static_cast<double>(n) - dg_mean * wp;
      orthogonalize(next);
      done = 1.0 - std::abs(next.dot(wp)) < options.tol;
      wp = next;
    }
    // A direction with Gaussian statistics has no fixed point to find, and
    // any orthonormal completion of the remaining subspace is as good as
    // another. Only a non-Gaussian direction that failed to settle counts.
    if (!done) {
      const double kurt = excess_kurtosis((wp.transpose() * z).transpose());
      if (std::abs(kurt) > 5.0 * std::sqrt(24.0 / static_cast<double>(n))) converged = false;
    }
    w.row(p) = wp.transpose();
  }

  IcaResult result;
  result.converged = converged;
  result.sources = w * z;
  result.mixing = dewhiten * w.transpose();
  return result;
}

IcaResult ica_clean(const Recording& rec, const IcaOptions& options) {
  const Eigen::Index eog = rec.channel_index(options.eog_channel);
  if (eog < 0) throw ParameterError("EOG channel '" + options.eog_channel + "' not in recording");
  if (rec.channels() < 2) throw ParameterError("ICA needs at least 2 channels");

  IcaResult result = fastica(rec.data, options);
  if (!result.converged) {
    result.cleaned = rec;
    return result;
  }

  const Eigen::VectorXd mean = rec.data.rowwise().mean();
  const Eigen::ArrayXd ref = (rec.data.row(eog).transpose().array() - mean[eog]);
  const double ref_norm = std::sqrt(ref.square().sum());

  Eigen::MatrixXd kept = result.mixing;
  for (Eigen::Index k = 0; k < result.sources.rows(); ++k) {
    const Eigen::VectorXd s = result.sources.row(k).transpose();
    const Eigen::ArrayXd sc = s.array() - s.mean();
    const double denom = ref_norm * std::sqrt(sc.square().sum());
    const double corr = denom > 0.0 ? (sc * ref).sum() / denom : 0.0;
    if (std::abs(corr) > options.eog_corr_threshold ||
        std::abs(excess_kurtosis(s)) > options.kurtosis_threshold) {
      result.rejected.push_back(static_cast<int>(k));
      kept.col(k).setZero();
    }
  }

  result.cleaned = rec;
  result.cleaned.data = (kept * result.sources).colwise() + mean;
  return result;
}

}  // namespace oow::dsp
