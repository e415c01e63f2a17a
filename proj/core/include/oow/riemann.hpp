#pragma once

#include "oow/dsp.hpp"
#include "oow/error.hpp"
#include "oow/mission.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oow::riemann {

/// Symmetric positive-definite matrix. Plain Eigen storage; functions
/// below check the invariant where it matters.
using SpdMatrix = Eigen::MatrixXd;

/// Symmetric within 1e-9 (relative) and smallest eigenvalue above
/// rel_tol times the largest.
bool is_spd(const Eigen::MatrixXd& m, double rel_tol = 1e-9);

SpdMatrix sqrtm(const SpdMatrix& a);
SpdMatrix invsqrtm(const SpdMatrix& a);
Eigen::MatrixXd logm(const SpdMatrix& a);
/// Exponential of a symmetric matrix.
SpdMatrix expm(const Eigen::MatrixXd& s);
SpdMatrix powm(const SpdMatrix& a, double p);

/// Row-centered sample covariance C (n - 1 normalization), returned as
/// (1 - gamma) C + gamma tr(C)/d I + 1e-10 I.
SpdMatrix covariance(const Eigen::MatrixXd& data, double shrinkage = 0.01);
SpdMatrix covariance(const dsp::Epoch& epoch, double shrinkage = 0.01);

/// Affine-invariant distance ||log(A^-1/2 B A^-1/2)||_F.
double distance(const SpdMatrix& a, const SpdMatrix& b);

/// Point at t on the geodesic from a (t = 0) to b (t = 1).
SpdMatrix geodesic(const SpdMatrix& a, const SpdMatrix& b, double t);

struct KarcherOptions {
  double tol = 1e-8;
  int max_iter = 50;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SpdMatrix last, double residual)
      : Error(what), last_(std::move(last)), residual_(residual) {}
  const SpdMatrix& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  SpdMatrix last_;
  double residual_;
};

/// Fixed-point Karcher mean starting from the arithmetic mean. Optional
/// non-negative weights (same length as the set).
SpdMatrix karcher_mean(const std::vector<SpdMatrix>& set, const KarcherOptions& options = {},
                       const std::vector<double>& weights = {});

/// Frobenius norm of the weighted mean of logs of m^-1/2 C_i m^-1/2.
double karcher_residual(const SpdMatrix& m, const std::vector<SpdMatrix>& set,
                        const std::vector<double>& weights = {});

// MDM ------------------------------------------------------------------------

struct MdmModel {
  std::vector<std::string> classes;  // sorted
  std::vector<SpdMatrix> means;

  const SpdMatrix& mean_of(const std::string& label) const;  // throws ParameterError
  bool has(const std::string& label) const;
};

MdmModel mdm_fit(const std::vector<SpdMatrix>& covs, const std::vector<std::string>& labels,
                 const KarcherOptions& options = {});
/// Throws ParameterError naming any class in `required` without samples.
MdmModel mdm_fit(const std::vector<SpdMatrix>& covs, const std::vector<std::string>& labels,
                 const std::vector<std::string>& required, const KarcherOptions& options = {});

struct Prediction {
  std::string label;
  std::map<std::string, double> distances;
};

/// Nearest class mean; ties go to the lexicographically first label.
Prediction mdm_predict(const MdmModel& model, const SpdMatrix& cov);

/// Distance from cov to the low-workload class mean.
double d0(const MdmModel& model, const SpdMatrix& cov, const std::string& lw_label = "LW");

// Labels -----------------------------------------------------------------------

enum class Paradigm { FiveClass, Latency, TimePressure };

std::string paradigm_name(Paradigm p);
Paradigm paradigm_from_name(const std::string& name);
/// All labels the paradigm can produce, sorted.
std::vector<std::string> paradigm_classes(Paradigm p);

/// five_class: LW, TP, 0.5s, 0.5s+TP, HighLat (latency >= 0.75 s, with or
/// without TP). latency: Lat / NoLat. time_pressure: TP / NoTP.
std::string label_for(const mission::TrialConfig& config, Paradigm p);

// Cross-validation ----------------------------------------------------------

struct ClassMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::string> classes;     // union of true and predicted, sorted
  Eigen::MatrixXi confusion;            // rows true, cols predicted
};

ClassMetrics score(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred);

struct FoldResult {
  std::string subject;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::optional<ClassMetrics> metrics;
  std::optional<std::string> error;  // fit failure for this fold
};

struct CvReport {
  Paradigm paradigm = Paradigm::FiveClass;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;  // unweighted over folds that produced metrics
  double mean_macro_f1 = 0.0;
};

struct CvOptions {
  double shrinkage = 0.01;
  KarcherOptions karcher;
};

/// Epoch labels come from label_for(epoch.trial) when the trial is known,
/// else from epoch.label.
CvReport loso_cv(const std::vector<dsp::Epoch>& epochs, Paradigm paradigm, const CvOptions& options = {});

/// Preprocess, select channels and window every recording.
std::vector<dsp::Epoch> prepare_epochs(const std::vector<dsp::Recording>& recordings, dsp::Method method,
                                       const dsp::ChannelConfig& channels,
                                       const dsp::PreprocessOptions& options = {});

}  // namespace oow::riemann
