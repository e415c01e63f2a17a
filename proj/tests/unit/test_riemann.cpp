#include "oow/error.hpp"
#include "oow/riemann.hpp"
#include "oow/synthgen.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <set>

using namespace oow;
using namespace oow::riemann;

namespace {

// Distance from generalized eigenvalues of (B, A); no matrix square roots.
double oracle_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b, a);
  return std::sqrt(ges.eigenvalues().array().log().square().sum());
}

Eigen::MatrixXd random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd w(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) w(i, j) = g(rng);
  return w;
}

SpdMatrix random_spd(int d, std::mt19937_64& rng) {
  const Eigen::MatrixXd w = random_matrix(d, rng);
  return w * w.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<dsp::Epoch> planted_epochs(int subjects, std::uint64_t seed, bool identical) {
  const auto specs = synthgen::five_class_specs(4, 20.0, seed, identical);
  synthgen::GenOptions g;
  g.trials_per_class = 2;
  g.trial_seconds = 10.0;
  std::vector<dsp::Epoch> out;
  for (int s = 0; s < subjects; ++s) {
    const std::string id = "S" + std::to_string(s + 1);
    for (const auto& rec : synthgen::gen_subject(specs, id, seed + 100 + static_cast<std::uint64_t>(s), g)) {
      for (auto& e : dsp::window(rec)) out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace

// Covariance -----------------------------------------------------------------

TEST(Covariance, WhiteNoiseNearIdentity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(4, 500);
  for (auto& v : x.reshaped()) v = g(rng);
  const SpdMatrix c = covariance(x);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(c(i, j), i == j ? 1.0 : 0.0, 0.2);
  }
}

TEST(Covariance, MatchesDefinition) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd x = random_matrix(3, rng) * Eigen::MatrixXd::Random(3, 200);
  x.row(1).array() += 5.0;
  const double gamma = 0.2;
  // Explicit double loop for the sample covariance.
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double mi = x.row(i).mean(), mj = x.row(j).mean();
      for (int t = 0; t < 200; ++t) c(i, j) += (x(i, t) - mi) * (x(j, t) - mj);
      c(i, j) /= 199.0;
    }
  }
  const Eigen::MatrixXd expected =
      (1 - gamma) * c + (gamma * c.trace() / 3.0 + 1e-10) * Eigen::MatrixXd::Identity(3, 3);
  EXPECT_LT(max_abs(covariance(x, gamma) - expected), 1e-12);
}

TEST(Covariance, ShrinkageRestoresSpd) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(3, 500);
  for (auto& v : x.reshaped()) v = g(rng);
  x.row(2).setConstant(4.0);
  const SpdMatrix c = covariance(x, 0.01);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff(), 0.0);
  EXPECT_TRUE(is_spd(c));

  x.row(2) = x.row(0) + x.row(1);
  EXPECT_FALSE(is_spd(covariance(x, 0.0)));
}

TEST(Covariance, Errors) {
  EXPECT_THROW(covariance(Eigen::MatrixXd::Zero(3, 500)), DegenerateInputError);
  EXPECT_THROW(covariance(Eigen::MatrixXd::Ones(3, 500), 1.0), ParameterError);
  EXPECT_THROW(covariance(Eigen::MatrixXd::Ones(3, 1)), DimensionError);
}

// Matrix functions -----------------------------------------------------------

TEST(MatrixFunctions, Identities) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix a = random_spd(5, rng);
    EXPECT_LT(max_abs(expm(logm(a)) - a), 1e-8 * max_abs(a));
    EXPECT_LT(max_abs(sqrtm(a) * sqrtm(a) - a), 1e-8 * max_abs(a));
    EXPECT_LT(max_abs(invsqrtm(a) * a * invsqrtm(a) - Eigen::MatrixXd::Identity(5, 5)), 1e-8);
    EXPECT_LT(max_abs(powm(a, 2.0) - a * a), 1e-8 * max_abs(a * a));
  }
}

TEST(MatrixFunctions, DiagonalLog) {
  const Eigen::Vector3d d(1.0, std::exp(2.0), 0.5);
  const Eigen::MatrixXd l = logm(d.asDiagonal().toDenseMatrix());
  EXPECT_NEAR(l(0, 0), 0.0, 1e-14);
  EXPECT_NEAR(l(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(l(2, 2), std::log(0.5), 1e-14);
  EXPECT_LT(std::abs(l(0, 1)), 1e-14);
}

// Distance -------------------------------------------------------------------

TEST(Distance, Examples) {
  std::mt19937_64 rng(5);
  const SpdMatrix a = random_spd(4, rng);
  EXPECT_NEAR(distance(a, a), 0.0, 1e-9);
  const Eigen::MatrixXd e2 = Eigen::Vector2d(std::exp(2.0), std::exp(2.0)).asDiagonal();
  EXPECT_NEAR(distance(Eigen::MatrixXd::Identity(2, 2), e2), 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(Distance, MatchesGeneralizedEigenOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const SpdMatrix a = random_spd(6, rng), b = random_spd(6, rng);
    EXPECT_NEAR(distance(a, b), oracle_distance(a, b), 1e-8);
  }
}

TEST(Distance, Invariances) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const SpdMatrix a = random_spd(4, rng), b = random_spd(4, rng);
    const Eigen::MatrixXd w = random_matrix(4, rng);
    const double d = distance(a, b);
    EXPECT_NEAR(distance(b, a), d, 1e-8);
    EXPECT_NEAR(distance(w * a * w.transpose(), w * b * w.transpose()), d, 1e-8);
    EXPECT_NEAR(distance(3.7 * a, 3.7 * b), d, 1e-8);
    EXPECT_GT(d, 0.0);
  }
}

TEST(Distance, Errors) {
  EXPECT_THROW(distance(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)), DimensionError);
}

TEST(Geodesic, EndpointsAndSplit) {
  std::mt19937_64 rng(8);
  const SpdMatrix a = random_spd(3, rng), b = random_spd(3, rng);
  EXPECT_LT(max_abs(geodesic(a, b, 0.0) - a), 1e-9);
  EXPECT_LT(max_abs(geodesic(a, b, 1.0) - b), 1e-9);
  const SpdMatrix m = geodesic(a, b, 0.3);
  EXPECT_NEAR(distance(a, m), 0.3 * distance(a, b), 1e-8);
  EXPECT_NEAR(distance(m, b), 0.7 * distance(a, b), 1e-8);
}

// Karcher mean ---------------------------------------------------------------

TEST(Karcher, Examples) {
  std::mt19937_64 rng(9);
  const SpdMatrix a = random_spd(3, rng);
  EXPECT_LT(max_abs(karcher_mean({a}) - a), 1e-10);
  const Eigen::MatrixXd m = karcher_mean({Eigen::MatrixXd::Identity(2, 2), 4.0 * Eigen::MatrixXd::Identity(2, 2)});
  EXPECT_LT(max_abs(m - 2.0 * Eigen::MatrixXd::Identity(2, 2)), 1e-8);
}

TEST(Karcher, CommutingSetIsElementwiseGeometricMean) {
  std::vector<SpdMatrix> set;
  Eigen::Vector3d logsum = Eigen::Vector3d::Zero();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int i = 0; i < 7; ++i) {
    const Eigen::Vector3d d(u(rng), u(rng), u(rng));
    logsum += d.array().log().matrix();
    set.push_back(d.asDiagonal().toDenseMatrix());
  }
  const Eigen::Vector3d expected = (logsum / 7.0).array().exp();
  EXPECT_LT(max_abs(karcher_mean(set) - expected.asDiagonal().toDenseMatrix()), 1e-8);
}

TEST(Karcher, ResidualBelowTolerance) {
  std::mt19937_64 rng(11);
  std::vector<SpdMatrix> set;
  for (int i = 0; i < 12; ++i) set.push_back(random_spd(5, rng));
  const SpdMatrix m = karcher_mean(set);
  // Residual recomputed with an independent log via eigen-decomposition.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(m);
  const Eigen::MatrixXd isq = em.eigenvectors() * em.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                              em.eigenvectors().transpose();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(5, 5);
  for (const auto& c : set) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e(isq * c * isq);
    t += e.eigenvectors() * e.eigenvalues().array().log().matrix().asDiagonal() * e.eigenvectors().transpose();
  }
  EXPECT_LT((t / 12.0).norm(), 1e-8);
  EXPECT_LT(karcher_residual(m, set), 1e-8);
}

TEST(Karcher, CongruenceEquivariance) {
  std::mt19937_64 rng(12);
  std::vector<SpdMatrix> set, moved;
  const Eigen::MatrixXd w = random_matrix(4, rng);
  for (int i = 0; i < 8; ++i) {
    set.push_back(random_spd(4, rng));
    moved.push_back(w * set.back() * w.transpose());
  }
  const SpdMatrix expected = w * karcher_mean(set) * w.transpose();
  EXPECT_LT(max_abs(karcher_mean(moved) - expected), 1e-6 * max_abs(expected));
}

TEST(Karcher, NonConvergenceCarriesIterate) {
  std::mt19937_64 rng(13);
  std::vector<SpdMatrix> set;
  for (int i = 0; i < 6; ++i) set.push_back(random_spd(4, rng));
  KarcherOptions o;
  o.max_iter = 1;
  o.tol = 1e-300;
  try {
    karcher_mean(set, o);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().rows(), 4);
    EXPECT_GT(e.residual(), 0.0);
    EXPECT_NEAR(e.residual(), karcher_residual(e.last_iterate(), set), 1e-12);
  }
}

TEST(Karcher, Errors) {
  EXPECT_THROW(karcher_mean({}), ParameterError);
  EXPECT_THROW(karcher_mean({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)}), DimensionError);
}

// MDM ------------------------------------------------------------------------

TEST(Mdm, OneSamplePerClass) {
  std::mt19937_64 rng(14);
  const SpdMatrix a = random_spd(3, rng), b = random_spd(3, rng);
  const auto model = mdm_fit({b, a}, {"TP", "LW"});
  EXPECT_EQ(model.classes, (std::vector<std::string>{"LW", "TP"}));
  EXPECT_LT(max_abs(model.mean_of("LW") - a), 1e-10);
  EXPECT_LT(max_abs(model.mean_of("TP") - b), 1e-10);
  const auto p = mdm_predict(model, a);
  EXPECT_EQ(p.label, "LW");
  EXPECT_NEAR(p.distances.at("LW"), 0.0, 1e-9);
}

TEST(Mdm, DuplicationInvariance) {
  std::mt19937_64 rng(15);
  std::vector<SpdMatrix> covs;
  std::vector<std::string> labels;
  for (int i = 0; i < 5; ++i) {
    covs.push_back(random_spd(3, rng));
    labels.push_back(i % 2 ? "A" : "B");
  }
  auto doubled = covs;
  doubled.insert(doubled.end(), covs.begin(), covs.end());
  auto doubled_labels = labels;
  doubled_labels.insert(doubled_labels.end(), labels.begin(), labels.end());
  const auto m1 = mdm_fit(covs, labels), m2 = mdm_fit(doubled, doubled_labels);
  for (const auto& c : m1.classes) EXPECT_LT(max_abs(m1.mean_of(c) - m2.mean_of(c)), 1e-9);
}

TEST(Mdm, MissingClassNamed) {
  try {
    mdm_fit({Eigen::MatrixXd::Identity(2, 2)}, {"LW"}, {"LW", "HighLat"});
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("HighLat"), std::string::npos);
  }
}

TEST(Mdm, TieGoesToFirstLabel) {
  const SpdMatrix i3 = Eigen::MatrixXd::Identity(3, 3);
  const auto model = mdm_fit({i3, i3, i3}, {"TP", "0.5s", "LW"});
  std::mt19937_64 rng(16);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(mdm_predict(model, random_spd(3, rng)).label, "0.5s");
}

TEST(Mdm, PlantedTwoClass) {
  synthgen::ClassSpec a{"LW", {}, Eigen::Vector4d(1, 1, 4, 4).asDiagonal().toDenseMatrix(), {}};
  synthgen::ClassSpec b{"TP", {}, Eigen::Vector4d(4, 4, 1, 1).asDiagonal().toDenseMatrix(), {}};
  synthgen::GenOptions g;
  g.trials_per_class = 3;
  g.trial_seconds = 10.0;
  std::vector<SpdMatrix> train_c, test_c;
  std::vector<std::string> train_l, test_l;
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto& rec : synthgen::gen_subject({a, b}, "S", seed, g)) {
      for (const auto& e : dsp::window(rec)) {
        (seed == 1 ? train_c : test_c).push_back(covariance(e));
        (seed == 1 ? train_l : test_l).push_back(rec.label);
      }
    }
  }
  const auto model = mdm_fit(train_c, train_l);
  int hits = 0;
  for (std::size_t i = 0; i < test_c.size(); ++i) hits += mdm_predict(model, test_c[i]).label == test_l[i];
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(test_c.size()), 0.9);
}

TEST(Mdm, CongruenceInvariantPrediction) {
  std::mt19937_64 rng(17);
  std::vector<SpdMatrix> covs;
  std::vector<std::string> labels;
  for (int i = 0; i < 9; ++i) {
    covs.push_back(random_spd(3, rng));
    labels.push_back(std::string(1, static_cast<char>('A' + i % 3)));
  }
  const Eigen::MatrixXd w = random_matrix(3, rng);
  auto moved = covs;
  for (auto& c : moved) c = w * c * w.transpose();
  const auto m1 = mdm_fit(covs, labels), m2 = mdm_fit(moved, labels);
  for (int k = 0; k < 20; ++k) {
    const SpdMatrix t = random_spd(3, rng);
    EXPECT_EQ(mdm_predict(m1, t).label, mdm_predict(m2, w * t * w.transpose()).label);
  }
}

// d0 -------------------------------------------------------------------------

TEST(D0, Examples) {
  std::mt19937_64 rng(18);
  const SpdMatrix lw = random_spd(5, rng), tp = random_spd(5, rng);
  const auto model = mdm_fit({lw, tp}, {"LW", "TP"});
  EXPECT_NEAR(d0(model, lw), 0.0, 1e-9);
  EXPECT_NEAR(d0(model, 2.0 * lw), std::sqrt(5.0) * std::log(2.0), 1e-9);
  const auto no_lw = mdm_fit({tp}, {"TP"});
  EXPECT_THROW(d0(no_lw, tp), ParameterError);
}

TEST(D0, MonotoneAlongGeodesic) {
  std::mt19937_64 rng(19);
  const SpdMatrix lw = random_spd(4, rng), far = random_spd(4, rng);
  const auto model = mdm_fit({lw}, {"LW"});
  double last = -1.0;
  for (double t = 0.0; t <= 1.0 + 1e-12; t += 0.1) {
    const double v = d0(model, geodesic(lw, far, t));
    EXPECT_GT(v, last);
    last = v;
  }
}

// Labels ---------------------------------------------------------------------

TEST(Labels, FiveClass) {
  auto cfg = [](double lat, bool tp) {
    mission::TrialConfig c;
    c.latency = lat;
    c.time_pressure = tp;
    return c;
  };
  EXPECT_EQ(label_for(cfg(0, false), Paradigm::FiveClass), "LW");
  EXPECT_EQ(label_for(cfg(0, true), Paradigm::FiveClass), "TP");
  EXPECT_EQ(label_for(cfg(0.5, false), Paradigm::FiveClass), "0.5s");
  EXPECT_EQ(label_for(cfg(0.5, true), Paradigm::FiveClass), "0.5s+TP");
  EXPECT_EQ(label_for(cfg(1.0, false), Paradigm::FiveClass), "HighLat");
  EXPECT_EQ(label_for(cfg(1.5, true), Paradigm::FiveClass), "HighLat");
  EXPECT_EQ(label_for(cfg(0.5, true), Paradigm::Latency), "Lat");
  EXPECT_EQ(label_for(cfg(0, true), Paradigm::Latency), "NoLat");
  EXPECT_EQ(label_for(cfg(1.0, false), Paradigm::TimePressure), "NoTP");
  EXPECT_EQ(label_for(cfg(0, true), Paradigm::TimePressure), "TP");
  for (Paradigm p : {Paradigm::FiveClass, Paradigm::Latency, Paradigm::TimePressure}) {
    EXPECT_EQ(paradigm_from_name(paradigm_name(p)), p);
    const auto cls = paradigm_classes(p);
    for (double lat : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5}) {
      for (bool tp : {false, true}) {
        EXPECT_TRUE(std::binary_search(cls.begin(), cls.end(), label_for(cfg(lat, tp), p)));
      }
    }
  }
  EXPECT_THROW(paradigm_from_name("six_class"), ParameterError);
}

// Metrics and cross-validation -----------------------------------------------

TEST(Metrics, ConfusionArithmetic) {
  const auto m = score({"A", "A", "B", "B"}, {"A", "A", "A", "B"});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_NEAR(m.macro_f1, (0.8 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(m.confusion(0, 0), 2);
  EXPECT_EQ(m.confusion(1, 0), 1);
  EXPECT_EQ(m.confusion(1, 1), 1);
}

TEST(Cv, FoldsPartitionSubjects) {
  const auto epochs = planted_epochs(10, 1, false);
  const auto r = loso_cv(epochs, Paradigm::FiveClass);
  ASSERT_EQ(r.folds.size(), 10u);
  std::set<std::string> seen;
  for (const auto& f : r.folds) {
    EXPECT_TRUE(seen.insert(f.subject).second);
    std::size_t own = 0;
    for (const auto& e : epochs) own += e.subject == f.subject;
    EXPECT_EQ(f.test_size, own);
    EXPECT_EQ(f.train_size + f.test_size, epochs.size());
  }
}

TEST(Cv, PlantedFiveClassSeparates) {
  const auto r = loso_cv(planted_epochs(10, 2, false), Paradigm::FiveClass);
  EXPECT_GE(r.mean_accuracy, 0.9);
}

TEST(Cv, IdenticalClassesAtChance) {
  const auto r = loso_cv(planted_epochs(10, 3, true), Paradigm::FiveClass);
  EXPECT_NEAR(r.mean_accuracy, 0.2, 0.1);
}

TEST(Cv, MissingClassSurfacesPerFold) {
  auto epochs = planted_epochs(3, 4, false);
  // Only S1 keeps HighLat epochs, so the fold testing S1 cannot learn it.
  std::erase_if(epochs, [](const dsp::Epoch& e) {
    return e.subject != "S1" && label_for(*e.trial, Paradigm::FiveClass) == "HighLat";
  });
  const auto r = loso_cv(epochs, Paradigm::FiveClass);
  ASSERT_EQ(r.folds.size(), 3u);
  int errors = 0;
  for (const auto& f : r.folds) {
    if (f.error) {
      ++errors;
      EXPECT_EQ(f.subject, "S1");
      EXPECT_NE(f.error->find("HighLat"), std::string::npos);
    }
  }
  EXPECT_EQ(errors, 1);
}

TEST(Cv, NeedsTwoSubjects) {
  EXPECT_THROW(loso_cv(planted_epochs(1, 5, false), Paradigm::FiveClass), ParameterError);
}
