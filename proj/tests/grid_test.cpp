#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "cvgkp/fock.hpp"
#include "cvgkp/grid.hpp"
#include "cvgkp/rng.hpp"

namespace {

using cvgkp::GridWavefunction;

constexpr int kN = 481;
constexpr double kDx = 0.05;

TEST(Packet, MomentsMatchGaussianAnalytics) {
  const GridWavefunction w = cvgkp::gaussian_packet(kN, kDx, 0.3, 0.7, 0.5);
  EXPECT_NEAR(w.norm(), 1.0, 1e-12);
  const cvgkp::GridMoments m = cvgkp::grid_moments(w);
  EXPECT_NEAR(m.mean_q, 0.3, 1e-9);
  EXPECT_NEAR(m.var_q, 0.5, 1e-9);
  EXPECT_NEAR(m.mean_p, 0.7, 1e-9);
  // Minimum-uncertainty packet: var_p = 1 / (4 var_q).
  EXPECT_NEAR(m.var_p, 0.5, 1e-9);

  const GridWavefunction sq = cvgkp::gaussian_packet(kN, kDx, 0.0, 0.0, 0.1);
  const cvgkp::GridMoments ms = cvgkp::grid_moments(sq);
  EXPECT_NEAR(ms.var_q, 0.1, 1e-9);
  EXPECT_NEAR(ms.var_p, 2.5, 1e-8);

  EXPECT_THROW(cvgkp::gaussian_packet(kN, kDx, 0.0, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(cvgkp::gaussian_packet(480, kDx, 0.0, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(cvgkp::gaussian_packet(kN, -0.1, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST(Dft, MatrixIsExactlyUnitary) {
  const int n = 129;
  const Eigen::MatrixXcd f = cvgkp::dft_matrix(n, 0.1);
  const Eigen::MatrixXcd gram = f.adjoint() * f;
  EXPECT_LT((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dft, OffsetGridKeepsMomentumDistribution) {
  const GridWavefunction w = cvgkp::gaussian_packet(kN, kDx, 0.4, 0.9, 0.3);
  GridWavefunction shifted = w;
  shifted.x0 += 3.0 * kDx;  // same samples read as a displaced state
  const cvgkp::GridMoments a = cvgkp::grid_moments(w);
  const cvgkp::GridMoments b = cvgkp::grid_moments(shifted);
  EXPECT_NEAR(a.mean_p, b.mean_p, 1e-9);
  EXPECT_NEAR(a.var_p, b.var_p, 1e-9);
  EXPECT_NEAR(cvgkp::momentum_representation(shifted).norm(), 1.0, 1e-12);
}

TEST(Norms, ConstructorsAndUnitariesPreserveNorm) {
  const GridWavefunction cat = cvgkp::squeezed_cat(kN, kDx, 2.0, 1.0);
  EXPECT_NEAR(cat.norm(), 1.0, 1e-12);
  EXPECT_NEAR(cvgkp::momentum_representation(cat).norm(), 1.0, 1e-12);
  // The pair beam splitter is unitary; clipped tails are the only loss.
  EXPECT_NEAR(cvgkp::bs_pair_grid(cat).norm(), 1.0, 1e-9);

  // Discretizing a smooth normalized wavefunction keeps unit mass on its own.
  const Eigen::VectorXcd cps = cvgkp::cps_approx_state(0.1, 40);
  double raw = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double x = -0.5 * (kN - 1) * kDx + i * kDx;
    raw += std::norm(cvgkp::hermite_point(cps, x)) * kDx;
  }
  EXPECT_NEAR(raw, 1.0, 1e-9);
}

TEST(FockGrid, CubicApproximantMatchesClosedForm) {
  const double gamma = 0.1;
  const GridWavefunction w = cvgkp::fock_to_grid(cvgkp::cps_approx_state(gamma, 40), kN, kDx);
  EXPECT_NEAR(w.norm(), 1.0, 1e-12);
  const double scale = 1.0 / std::sqrt(1.0 + 3.0 * gamma * gamma / 4.0);
  double worst = 0.0;
  for (int i = 0; i < w.points(); ++i) {
    const double x = w.x(i);
    const std::complex<double> poly(1.0, gamma * (x * x * x - 1.5 * x));
    const std::complex<double> ref =
        std::pow(M_PI, -0.25) * std::exp(-x * x / 2.0) * poly * scale;
    worst = std::max(worst, std::abs(w.amps(i, 0) - ref));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Serialization, RoundTripIsExact) {
  const GridWavefunction w = cvgkp::squeezed_cat(101, 0.1, 1.5, 0.8);
  std::ostringstream os;
  cvgkp::write_wavefunction(os, w);
  std::istringstream is(os.str());
  const GridWavefunction back = cvgkp::read_wavefunction(is);
  EXPECT_EQ(back.x0, w.x0);
  EXPECT_EQ(back.dx, w.dx);
  ASSERT_EQ(back.points(), w.points());
  for (int i = 0; i < w.points(); ++i) {
    EXPECT_EQ(back.amps(i, 0).real(), w.amps(i, 0).real());
    EXPECT_EQ(back.amps(i, 0).imag(), w.amps(i, 0).imag());
  }

  std::istringstream bad_header("y0 0 dx 0.1 n 3\n0 0\n0 0\n0 0\n");
  EXPECT_THROW(cvgkp::read_wavefunction(bad_header), std::runtime_error);
  std::istringstream truncated("x0 0 dx 0.1 n 3\n0 0\n");
  EXPECT_THROW(cvgkp::read_wavefunction(truncated), std::runtime_error);
}

TEST(Peaks, SqueezedCatHasTwoSymmetricPeaks) {
  const double alpha = 2.0, r = 1.0;
  const GridWavefunction cat = cvgkp::squeezed_cat(kN, kDx, alpha, r);
  const std::vector<double> peaks = cvgkp::find_peaks(cat);
  const double expected = std::sqrt(2.0) * alpha * std::exp(-r);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_NEAR(peaks[0], -expected, kDx);
  EXPECT_NEAR(peaks[1], expected, kDx);
}

TEST(Cubic, ZeroGammaIsTeleportationIdentity) {
  const GridWavefunction vac = cvgkp::gaussian_packet(kN, kDx, 0.0, 0.0, 0.5);
  cvgkp::CounterRng rng(1, 0);
  for (double db : {15.0, 20.0, 25.0}) {
    const cvgkp::CubicTeleportResult res = cvgkp::cubic_phase_teleport(vac, 0.0, db, rng, 0.0);
    EXPECT_GE(res.fidelity, 0.999) << "resource " << db << " dB";
    EXPECT_EQ(res.outcome, 0.0);
    EXPECT_NEAR(res.state.norm(), 1.0, 1e-12);
  }
}

TEST(Cubic, FidelityImprovesWithResourceSqueezing) {
  const GridWavefunction vac = cvgkp::gaussian_packet(kN, kDx, 0.0, 0.0, 0.5);
  cvgkp::CounterRng rng(1, 0);
  double last = 0.0;
  for (double db : {10.0, 15.0, 20.0, 25.0}) {
    const cvgkp::CubicTeleportResult res = cvgkp::cubic_phase_teleport(vac, 0.1, db, rng, 0.0);
    EXPECT_GT(res.fidelity, last);
    last = res.fidelity;
  }
  EXPECT_GT(last, 0.999);
}

TEST(Cubic, SampledOutcomeKeepsHighFidelity) {
  const GridWavefunction vac = cvgkp::gaussian_packet(kN, kDx, 0.0, 0.0, 0.5);
  cvgkp::CounterRng rng(42, 0);
  const cvgkp::CubicTeleportResult res = cvgkp::cubic_phase_teleport(vac, 0.1, 20.0, rng);
  EXPECT_GE(res.fidelity, 0.99);
  EXPECT_NE(res.outcome, 0.0);
  EXPECT_LT(std::abs(res.outcome), 40.0);
}

TEST(Cubic, MomentumShiftMatchesMomentMap) {
  const GridWavefunction in = cvgkp::gaussian_packet(kN, kDx, 1.0, 0.0, 0.5);
  const double gamma = 0.1;
  cvgkp::CounterRng rng(1, 0);
  const cvgkp::CubicTeleportResult res = cvgkp::cubic_phase_teleport(in, gamma, 25.0, rng, 0.0);
  const cvgkp::GridMoments before = cvgkp::grid_moments(in);
  const cvgkp::GridMoments after = cvgkp::grid_moments(res.state);
  // p -> p + gamma q^2 in the Heisenberg picture.
  const double expected = gamma * (before.var_q + before.mean_q * before.mean_q);
  EXPECT_NEAR(after.mean_p - before.mean_p, expected, 1e-2);
}

TEST(Cubic, CoarseGridIsRejected) {
  const GridWavefunction vac = cvgkp::gaussian_packet(81, 0.3, 0.0, 0.0, 0.5);
  cvgkp::CounterRng rng(1, 0);
  EXPECT_THROW(cvgkp::cubic_phase_teleport(vac, 0.1, 20.0, rng, 0.0), cvgkp::ResolutionError);
  EXPECT_THROW(cvgkp::cubic_phase_teleport(cvgkp::bs_pair_grid(vac), 0.1, 20.0, rng, 0.0),
               std::invalid_argument);
}

TEST(Breed, ZeroRoundsReturnsTheCat) {
  const cvgkp::BreedingResult res = cvgkp::breed_gkp(2.0, 1.0, 0);
  const GridWavefunction cat = cvgkp::squeezed_cat(kN, kDx, 2.0, 1.0);
  EXPECT_TRUE(res.trace.empty());
  EXPECT_EQ(res.state.points(), cat.points());
  EXPECT_LT((res.state.amps - cat.amps).cwiseAbs().maxCoeff(), 1e-15);

  EXPECT_THROW(cvgkp::breed_gkp(2.0, 1.0, -1), std::invalid_argument);
  EXPECT_THROW(cvgkp::breed_gkp(2.0, 1.0, 1, 0.0), std::invalid_argument);
}

TEST(Breed, OneRoundMakesThreeBinomialPeaks) {
  const double alpha = 2.0, r = 1.0;
  const cvgkp::BreedingResult res = cvgkp::breed_gkp(alpha, r, 1);
  ASSERT_EQ(res.trace.size(), 1u);
  EXPECT_GT(res.trace[0].acceptance, 0.0);
  EXPECT_LT(res.trace[0].acceptance, 1.0);
  EXPECT_NEAR(res.state.norm(), 1.0, 1e-12);

  const std::vector<double> peaks = cvgkp::find_peaks(res.state);
  ASSERT_EQ(peaks.size(), 3u);
  const double outer = std::sqrt(2.0) * (std::sqrt(2.0) * alpha * std::exp(-r));
  EXPECT_NEAR(peaks[0], -outer, 2.0 * res.state.dx);
  EXPECT_NEAR(peaks[1], 0.0, 2.0 * res.state.dx);
  EXPECT_NEAR(peaks[2], outer, 2.0 * res.state.dx);

  // Peak amplitudes follow the pair-count weights (1, 2, 1), so the central
  // density is about four times the side density.
  const auto density_at = [&](double x) {
    int best = 0;
    for (int i = 0; i < res.state.points(); ++i)
      if (std::abs(res.state.x(i) - x) < std::abs(res.state.x(best) - x)) best = i;
    return std::norm(res.state.amps(best, 0));
  };
  const double ratio = density_at(0.0) / density_at(outer);
  EXPECT_NEAR(ratio, 4.0, 0.4);
}

TEST(Breed, AcceptanceScalesWithTheWindow) {
  const cvgkp::BreedingResult narrow = cvgkp::breed_gkp(2.0, 1.0, 1, 0.05);
  const cvgkp::BreedingResult wide = cvgkp::breed_gkp(2.0, 1.0, 1, 0.10);
  EXPECT_NEAR(wide.trace[0].acceptance / narrow.trace[0].acceptance, 2.0, 0.1);
  // The kept branch is the window-center slice either way.
  EXPECT_LT((narrow.state.amps - wide.state.amps).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Breed, FidelityTraceIsNonDecreasing) {
  const cvgkp::BreedingResult res = cvgkp::breed_gkp(2.5, 1.0, 3);
  ASSERT_EQ(res.trace.size(), 3u);
  EXPECT_LE(res.trace[0].fidelity, res.trace[1].fidelity + 1e-9);
  EXPECT_LE(res.trace[1].fidelity, res.trace[2].fidelity + 1e-9);
  for (const cvgkp::BreedingRound& round : res.trace) {
    EXPECT_GT(round.fidelity, 0.0);
    EXPECT_LE(round.fidelity, 1.0);
    EXPECT_GT(round.acceptance, 0.0);
    EXPECT_LT(round.acceptance, 1.0);
  }
}

TEST(BreedFit, RecoversParametersOfAnExactComb) {
  const double sigma2 = 0.05;
  const GridWavefunction comb = cvgkp::approx_gkp_state(641, kDx, sigma2, 0);
  const cvgkp::BreedingRound fit = cvgkp::detail::fit_and_overlap(comb);
  EXPECT_NEAR(fit.fitted_delta2, 2.0 * sigma2, 2e-3);
  EXPECT_NEAR(fit.fitted_kappa2, 2.0 * sigma2, 2e-2);
  EXPECT_GT(fit.fidelity, 0.9999);
}

TEST(GkpOverlap, SelfOverlapIsUnity) {
  const GridWavefunction state = cvgkp::approx_gkp_state(641, kDx, 0.05, 0);
  EXPECT_NEAR(state.norm(), 1.0, 1e-12);
  EXPECT_NEAR(cvgkp::gkp_overlap(state, 0.05, 0), 1.0, 1e-9);
}

TEST(GkpOverlap, LogicalStatesAreNearlyOrthogonal) {
  const GridWavefunction one = cvgkp::approx_gkp_state(641, kDx, 0.05, 1);
  EXPECT_LT(cvgkp::gkp_overlap(one, 0.05, 0), 1e-3);
}

TEST(GkpOverlap, SqueezedVacuumOverlapGrowsWithPeakWidth) {
  // A structureless Gaussian matches the comb better the wider its peaks,
  // i.e. the overlap rises with sigma2_gkp at a fixed state.
  const GridWavefunction vac = cvgkp::gaussian_packet(1281, kDx, 0.0, 0.0, 0.5 * std::exp(2.0));
  double last = 0.0;
  for (double s2 : {0.05, 0.1, 0.2}) {
    const double f = cvgkp::gkp_overlap(vac, s2, 0);
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, 1.0);
    EXPECT_GT(f, last);
    last = f;
  }
  // At fixed sigma2_gkp, widening the vacuum dilutes the overlap.
  double prev = 1.0;
  for (double r : {0.5, 1.0, 1.5}) {
    const GridWavefunction sq =
        cvgkp::gaussian_packet(1281, kDx, 0.0, 0.0, 0.5 * std::exp(2.0 * r));
    const double f = cvgkp::gkp_overlap(sq, 0.1, 0);
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(GkpOverlap, NarrowGridIsRejected) {
  const GridWavefunction vac = cvgkp::gaussian_packet(kN, kDx, 0.0, 0.0, 0.5);
  EXPECT_THROW(cvgkp::gkp_overlap(vac, 0.05, 0), cvgkp::ResolutionError);
  const GridWavefunction wide = cvgkp::gaussian_packet(641, kDx, 0.0, 0.0, 0.5);
  EXPECT_THROW(cvgkp::gkp_overlap(wide, -0.05, 0), std::invalid_argument);
  EXPECT_THROW(cvgkp::gkp_overlap(wide, 0.05, 2), std::invalid_argument);
}

}  // namespace
