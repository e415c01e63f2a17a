#include "oow/riemann.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace oow::riemann {

namespace {

template <typename F>
Eigen::MatrixXd apply_eig(const Eigen::MatrixXd& a, F f) {
  if (a.rows() != a.cols()) throw DimensionError("matrix is not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd v = eig.eigenvalues().unaryExpr(f);
  Eigen::MatrixXd out = eig.eigenvectors() * v.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

void check_positive(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ParameterError("matrix is not positive definite");
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

bool is_spd(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) return false;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return ev.minCoeff() > 0.0 && ev.minCoeff() > rel_tol * ev.maxCoeff();
}

SpdMatrix sqrtm(const SpdMatrix& a) {
  check_positive(a);
  return apply_eig(a, [](double x) { return std::sqrt(x); });
}

SpdMatrix invsqrtm(const SpdMatrix& a) {
  check_positive(a);
  return apply_eig(a, [](double x) { return 1.0 / std::sqrt(x); });
}

Eigen::MatrixXd logm(const SpdMatrix& a) {
  check_positive(a);
  return apply_eig(a, [](double x) { return std::log(x); });
}

SpdMatrix expm(const Eigen::MatrixXd& s) {
  return apply_eig(s, [](double x) { return std::exp(x); });
}

SpdMatrix powm(const SpdMatrix& a, double p) {
  check_positive(a);
  return apply_eig(a, [p](double x) { return std::pow(x, p); });
}

SpdMatrix covariance(const Eigen::MatrixXd& data, double shrinkage) {
  if (!(shrinkage >= 0.0 && shrinkage < 1.0)) throw ParameterError("shrinkage must lie in [0, 1)");
  if (data.rows() < 1 || data.cols() < 2) throw DimensionError("covariance needs >= 2 samples");
  const Eigen::MatrixXd x = data.colwise() - data.rowwise().mean();
  const Eigen::MatrixXd c = x * x.transpose() / static_cast<double>(data.cols() - 1);
  const auto d = static_cast<double>(c.rows());
  const double tr = c.trace();
  if (!(tr > 0.0)) throw DegenerateInputError("epoch has zero variance on every channel");
  Eigen::MatrixXd out = (1.0 - shrinkage) * c;
  out.diagonal().array() += shrinkage * tr / d + 1e-10;
  return 0.5 * (out + out.transpose());
}

SpdMatrix covariance(const dsp::Epoch& epoch, double shrinkage) {
  return covariance(epoch.data, shrinkage);
}

double distance(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("distance between " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(b, a, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw ParameterError("distance: first matrix is not positive definite");
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double l = eig.eigenvalues()[i];
    if (!(l > 0.0)) throw ParameterError("distance: second matrix is not positive definite");
    s += std::log(l) * std::log(l);
  }
  return std::sqrt(s);
}

SpdMatrix geodesic(const SpdMatrix& a, const SpdMatrix& b, double t) {
  const SpdMatrix h = sqrtm(a);
  const SpdMatrix hi = invsqrtm(a);
  const SpdMatrix mid = powm(hi * b * hi, t);
  const SpdMatrix out = h * mid * h;
  return 0.5 * (out + out.transpose());
}

namespace {

std::vector<double> normalized_weights(std::size_t n, const std::vector<double>& weights) {
  std::vector<double> w = weights.empty() ? std::vector<double>(n, 1.0) : weights;
  if (w.size() != n) throw DimensionError("weight count does not match set size");
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw ParameterError("weights must be non-negative");
    total += v;
  }
  if (!(total > 0.0)) throw ParameterError("weights sum to zero");
  for (double& v : w) v /= total;
  return w;
}

Eigen::MatrixXd tangent_mean(const SpdMatrix& m, const std::vector<SpdMatrix>& set, const std::vector<double>& w) {
  const SpdMatrix hi = invsqrtm(m);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (w[i] == 0.0) continue;
    t += w[i] * logm(hi * set[i] * hi);
  }
  return t;
}

}  // namespace

double karcher_residual(const SpdMatrix& m, const std::vector<SpdMatrix>& set, const std::vector<double>& weights) {
  return tangent_mean(m, set, normalized_weights(set.size(), weights)).norm();
}

SpdMatrix karcher_mean(const std::vector<SpdMatrix>& set, const KarcherOptions& options,
                       const std::vector<double>& weights) {
  if (set.empty()) throw ParameterError("Karcher mean of an empty set");
  for (const auto& c : set) {
    if (c.rows() != set.front().rows() || c.cols() != set.front().cols()) {
      throw DimensionError("Karcher mean over matrices of different sizes");
    }
  }
  const auto w = normalized_weights(set.size(), weights);
  SpdMatrix m = SpdMatrix::Zero(set.front().rows(), set.front().cols());
  for (std::size_t i = 0; i < set.size(); ++i) m += w[i] * set[i];

  double residual = 0.0;
  for (int it = 0; it <= options.max_iter; ++it) {
    const Eigen::MatrixXd t = tangent_mean(m, set, w);
    residual = t.norm();
    if (residual < options.tol) return m;
    if (it == options.max_iter) break;
    const SpdMatrix h = sqrtm(m);
    m = h * expm(t) * h;
    m = 0.5 * (m + m.transpose());
  }
  throw ConvergenceError("Karcher mean did not converge in " + std::to_string(options.max_iter) +
                             " iterations (residual " + std::to_string(residual) + ")",
                         m, residual);
}

// MDM ------------------------------------------------------------------------

bool MdmModel::has(const std::string& label) const {
  return std::find(classes.begin(), classes.end(), label) != classes.end();
}

const SpdMatrix& MdmModel::mean_of(const std::string& label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw ParameterError("model has no class '" + label + "'");
  return means[static_cast<std::size_t>(it - classes.begin())];
}

MdmModel mdm_fit(const std::vector<SpdMatrix>& covs, const std::vector<std::string>& labels,
                 const KarcherOptions& options) {
  return mdm_fit(covs, labels, {}, options);
}

MdmModel mdm_fit(const std::vector<SpdMatrix>& covs, const std::vector<std::string>& labels,
                 const std::vector<std::string>& required, const KarcherOptions& options) {
  if (covs.size() != labels.size()) throw DimensionError("covariance and label counts differ");
  if (covs.empty()) throw ParameterError("no training samples");
  std::set<std::string> present(labels.begin(), labels.end());
  for (const auto& r : required) {
    if (!present.count(r)) throw ParameterError("class '" + r + "' has no training samples");
  }
  MdmModel model;
  for (const auto& cls : present) {
    std::vector<SpdMatrix> members;
    for (std::size_t i = 0; i < covs.size(); ++i) {
      if (labels[i] == cls) members.push_back(covs[i]);
    }
    model.classes.push_back(cls);
    model.means.push_back(karcher_mean(members, options));
  }
  return model;
}

Prediction mdm_predict(const MdmModel& model, const SpdMatrix& cov) {
  if (model.classes.empty()) throw StateError("model has no classes");
  Prediction p;
  double best = 0.0;
  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    const double d = distance(model.means[i], cov);
    p.distances[model.classes[i]] = d;
    if (p.label.empty() || d < best) {
      best = d;
      p.label = model.classes[i];
    }
  }
  return p;
}

double d0(const MdmModel& model, const SpdMatrix& cov, const std::string& lw_label) {
  if (!model.has(lw_label)) throw ParameterError("model has no low-workload class '" + lw_label + "'");
  return distance(model.mean_of(lw_label), cov);
}

// Labels -----------------------------------------------------------------------

std::string paradigm_name(Paradigm p) {
  switch (p) {
    case Paradigm::FiveClass: return "five_class";
    case Paradigm::Latency: return "latency";
    case Paradigm::TimePressure: return "time_pressure";
  }
  return "?";
}

Paradigm paradigm_from_name(const std::string& name) {
  const std::string n = lower(name);
  if (n == "five_class" || n == "5class" || n == "five") return Paradigm::FiveClass;
  if (n == "latency") return Paradigm::Latency;
  if (n == "time_pressure" || n == "tp") return Paradigm::TimePressure;
  throw ParameterError("unknown paradigm '" + name + "'");
}

std::vector<std::string> paradigm_classes(Paradigm p) {
  std::vector<std::string> out;
  switch (p) {
    case Paradigm::FiveClass: out = {"LW", "TP", "0.5s", "0.5s+TP", "HighLat"}; break;
    case Paradigm::Latency: out = {"Lat", "NoLat"}; break;
    case Paradigm::TimePressure: out = {"TP", "NoTP"}; break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string label_for(const mission::TrialConfig& config, Paradigm p) {
  switch (p) {
    case Paradigm::FiveClass:
      if (config.latency >= 0.75) return "HighLat";
      if (config.latency > 0.0) return config.time_pressure ? "0.5s+TP" : "0.5s";
      return config.time_pressure ? "TP" : "LW";
    case Paradigm::Latency:
      return config.latency > 0.0 ? "Lat" : "NoLat";
    case Paradigm::TimePressure:
      return config.time_pressure ? "TP" : "NoTP";
  }
  return "?";
}

// Cross-validation ----------------------------------------------------------

ClassMetrics score(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionError("label vectors differ in length");
  ClassMetrics m;
  std::set<std::string> all(y_true.begin(), y_true.end());
  all.insert(y_pred.begin(), y_pred.end());
  m.classes.assign(all.begin(), all.end());
  const auto k = static_cast<Eigen::Index>(m.classes.size());
  m.confusion = Eigen::MatrixXi::Zero(k, k);
  auto index = [&](const std::string& s) {
    return static_cast<Eigen::Index>(std::lower_bound(m.classes.begin(), m.classes.end(), s) - m.classes.begin());
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) ++m.confusion(index(y_true[i]), index(y_pred[i]));
  if (y_true.empty()) return m;

  m.accuracy = static_cast<double>(m.confusion.trace()) / static_cast<double>(y_true.size());
  double f1_sum = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double tp = m.confusion(c, c);
    const double fp = m.confusion.col(c).sum() - tp;
    const double fn = m.confusion.row(c).sum() - tp;
    const double denom = 2.0 * tp + fp + fn;
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  m.macro_f1 = f1_sum / static_cast<double>(k);
  return m;
}

CvReport loso_cv(const std::vector<dsp::Epoch>& epochs, Paradigm paradigm, const CvOptions& options) {
  std::vector<std::string> labels;
  std::vector<SpdMatrix> covs;
  std::set<std::string> subjects;
  labels.reserve(epochs.size());
  covs.reserve(epochs.size());
  for (const auto& e : epochs) {
    labels.push_back(e.trial ? label_for(*e.trial, paradigm) : e.label);
    covs.push_back(covariance(e, options.shrinkage));
    subjects.insert(e.subject);
  }
  if (subjects.size() < 2) throw ParameterError("LOSO needs at least 2 subjects");
  const std::set<std::string> all_labels(labels.begin(), labels.end());
  const std::vector<std::string> required(all_labels.begin(), all_labels.end());

  CvReport report;
  report.paradigm = paradigm;
  int scored = 0;
  for (const auto& subject : subjects) {
    FoldResult fold;
    fold.subject = subject;
    std::vector<SpdMatrix> train_c;
    std::vector<std::string> train_l;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
      if (epochs[i].subject == subject) {
        test.push_back(i);
      } else {
        train_c.push_back(covs[i]);
        train_l.push_back(labels[i]);
      }
    }
    fold.train_size = train_c.size();
    fold.test_size = test.size();
    try {
      const MdmModel model = mdm_fit(train_c, train_l, required, options.karcher);
      std::vector<std::string> y_true, y_pred;
      for (std::size_t i : test) {
        y_true.push_back(labels[i]);
        y_pred.push_back(mdm_predict(model, covs[i]).label);
      }
      fold.metrics = score(y_true, y_pred);
      report.mean_accuracy += fold.metrics->accuracy;
      report.mean_macro_f1 += fold.metrics->macro_f1;
      ++scored;
    } catch (const Error& e) {
      fold.error = e.what();
    }
    report.folds.push_back(std::move(fold));
  }
  if (scored > 0) {
    report.mean_accuracy /= scored;
    report.mean_macro_f1 /= scored;
  }
  return report;
}

std::vector<dsp::Epoch> prepare_epochs(const std::vector<dsp::Recording>& recordings, dsp::Method method,
                                       const dsp::ChannelConfig& channels, const dsp::PreprocessOptions& options) {
  std::vector<dsp::Epoch> out;
  for (const auto& rec : recordings) {
    // ICA needs the EOG reference, so channel selection comes after cleaning.
    const dsp::Recording clean = dsp::preprocess(rec, method, options);
    auto epochs = dsp::window(dsp::select_channels(clean, channels));
    out.insert(out.end(), std::make_move_iterator(epochs.begin()), std::make_move_iterator(epochs.end()));
  }
  return out;
}

}  // namespace oow::riemann
