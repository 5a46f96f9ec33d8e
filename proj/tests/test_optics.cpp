#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "lossyhom/optics.hpp"
#include "test_helpers.hpp"

using namespace lossyhom;
using lossyhom::testing::Rng;

namespace {

// Exact first and second derivatives of k(w) = w n(w) / c for the Lorentz
// index, by differentiating eps = n^2 symbolically.
struct LorentzDerivatives {
  std::complex<long double> k, dk, d2k;
};

LorentzDerivatives lorentz_exact(const LorentzOscillator& osc, long double w, long double c) {
  using C = std::complex<long double>;
  const long double wp2 = (long double)osc.plasma_freq * osc.plasma_freq;
  const long double wr = osc.resonance_freq, g = osc.damping;
  const C d(wr * wr - w * w, -g * w);
  const C dd(-2 * w, -g);
  const C ddd(-2, 0);
  const C eps = C(1) + wp2 / d;
  const C deps = -wp2 * dd / (d * d);
  const C d2eps = wp2 * (C(2) * dd * dd / (d * d * d) - ddd / (d * d));
  C n = std::sqrt(eps);
  if (n.imag() < 0) n = -n;
  const C dn = deps / (C(2) * n);
  const C d2n = (d2eps - C(2) * dn * dn) / (C(2) * n);
  return {w * n / c, (n + w * dn) / c, (C(2) * dn + w * d2n) / c};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(SourceSpec, NaturalPresetIsNarrowBand) {
  const auto s = SourceSpec::natural_preset();
  EXPECT_EQ(s.c(), 1.0);
  EXPECT_EQ(s.bandwidth, 1.0);
  EXPECT_EQ(s.omega_sum, 20.0);
  EXPECT_GE(s.center(), kNarrowBandRatio * s.bandwidth);
}

TEST(SourceSpec, RejectsBroadBandAndNonPositiveBandwidth) {
  EXPECT_THROW(SourceSpec::make(20.0, 0.0), ConfigError);
  EXPECT_THROW(SourceSpec::make(20.0, -1.0), ConfigError);
  EXPECT_THROW(SourceSpec::make(15.0, 1.0), ConfigError);  // 7.5 < 8
  EXPECT_NO_THROW(SourceSpec::make(16.0, 1.0));
}

TEST(VacuumDispersion, SiValues) {
  const auto s = SourceSpec::make(2.4e15, 1e12);
  const auto d = make_vacuum_dispersion(s);
  EXPECT_DOUBLE_EQ(d.alpha.real(), 1.0 / 299792458.0);
  EXPECT_NEAR(d.alpha.real(), 3.3356e-9, 1e-13);
  EXPECT_EQ(d.alpha.imag(), 0.0);
  EXPECT_EQ(d.beta, cplx(0.0, 0.0));
  EXPECT_NEAR(d.k0.real(), 4.0028e6, 1e2);
  EXPECT_DOUBLE_EQ(d.k0.real(), 1.2e15 / 299792458.0);
  EXPECT_EQ(d.k0.imag(), 0.0);
}

TEST(Wavevector, ExpansionCentreAndHandValue) {
  const auto s = SourceSpec::make(2.4e15, 1e12);
  const ComplexDispersion d{{3.0, 0.5}, {2e-9, 1e-12}, {1e-27, 0.0}};
  EXPECT_EQ(wavevector_at(d, s, s.center()), d.k0);

  const ComplexDispersion lossy{{0.0, 0.0}, {0.0, 1e-9}, {0.0, 0.0}};
  const auto k = wavevector_at(lossy, s, s.center() + 1e9);
  EXPECT_NEAR(k.real(), 0.0, 1e-15);
  EXPECT_NEAR(k.imag(), 1.0, 1e-12);
}

TEST(Wavevector, RejectsNonPositiveFrequency) {
  const auto s = SourceSpec::natural_preset();
  const auto d = make_vacuum_dispersion(s);
  EXPECT_THROW(wavevector_at(d, s, 0.0), NumericError);
  EXPECT_THROW(wavevector_at(d, s, -1.0), NumericError);
}

TEST(Wavevector, VacuumRoundTripOnBand) {
  Rng rng(7);
  for (const auto& s : {SourceSpec::make(2.4e15, 1e13), SourceSpec::natural_preset()}) {
    const auto d = make_vacuum_dispersion(s);
    for (int i = 0; i < 100; ++i) {
      const double w = rng.uniform(s.band_lo(), s.band_hi());
      const auto k = wavevector_at(d, s, w);
      EXPECT_NEAR(k.real(), w / s.c(), 4e-16 * w / s.c());
      EXPECT_EQ(k.imag(), 0.0);
    }
  }
}

TEST(Passivity, RejectsAmplifyingMedia) {
  const auto s = SourceSpec::natural_preset();
  // Im k = 1 + 0.5 delta goes negative at delta = -2, inside +-6.
  const ComplexDispersion gain{{10.0, 1.0}, {1.0, 0.5}, {0.0, 0.0}};
  EXPECT_THROW(check_passive(gain, s, "arm1.medium"), ConfigError);
  const ComplexDispersion ok{{10.0, 3.0}, {1.0, 0.5}, {0.0, 0.0}};
  EXPECT_NO_THROW(check_passive(ok, s, "arm1.medium"));
  // Negative curvature: vertex is a maximum, edges decide.
  const ComplexDispersion curved{{10.0, 1.0}, {1.0, 0.0}, {0.0, -0.1}};
  EXPECT_THROW(check_passive(curved, s, "arm1.medium"), ConfigError);
}

TEST(Passivity, ExactMinimumMatchesDenseSampling) {
  Rng rng(11);
  const auto s = SourceSpec::natural_preset();
  for (int i = 0; i < 200; ++i) {
    const ComplexDispersion d{{1.0, rng.uniform(-2, 2)}, {1.0, rng.uniform(-1, 1)}, {0.0, rng.uniform(-0.2, 0.2)}};
    double sampled = 1e300;
    for (int j = 0; j <= 20000; ++j) {
      const double w = s.band_lo() + (s.band_hi() - s.band_lo()) * j / 20000.0;
      sampled = std::min(sampled, wavevector_at(d, s, w).imag());
    }
    const double exact = min_im_wavevector_on_band(d, s);
    EXPECT_LE(exact, sampled + 1e-12);
    EXPECT_NEAR(exact, sampled, 1e-5);
  }
}

TEST(Lorentz, ZeroPlasmaFrequencyIsVacuum) {
  const auto s = SourceSpec::make(2.4e15, 1e13);
  const auto d = lorentz_to_dispersion({0.0, 4e15, 1e13}, s);
  const auto v = make_vacuum_dispersion(s);
  EXPECT_LE(rel(d.k0.real(), v.k0.real()), 1e-12);
  EXPECT_LE(rel(d.alpha.real(), v.alpha.real()), 1e-12);
  EXPECT_EQ(d.k0.imag(), 0.0);
  EXPECT_LE(std::abs(d.alpha.imag()), 1e-12 * v.alpha.real());
  EXPECT_LE(std::abs(d.beta), 1e-12 * v.alpha.real() / s.bandwidth);
}

TEST(Lorentz, LosslessNormalDispersion) {
  const auto s = SourceSpec::make(2.4e15, 1e13);
  const auto d = lorentz_to_dispersion({1e15, 4e15, 0.0}, s);
  EXPECT_LE(std::abs(d.alpha.imag()), 1e-12 * d.alpha.real());
  EXPECT_GT(d.alpha.real(), 1.0 / kSpeedOfLightSI);
}

TEST(Lorentz, ReferenceSetAgainstSymbolicDerivatives) {
  const auto s = SourceSpec::make(2.4e15, 1e13);
  const LorentzOscillator osc{1e15, 4e15, 1e13};
  const auto d = lorentz_to_dispersion(osc, s);
  const auto exact = lorentz_exact(osc, 1.2e15L, kSpeedOfLightSI);
  EXPECT_LE(rel(d.k0.real(), double(exact.k.real())), 1e-6);
  EXPECT_LE(rel(d.k0.imag(), double(exact.k.imag())), 1e-6);
  EXPECT_LE(rel(d.alpha.real(), double(exact.dk.real())), 1e-6);
  EXPECT_LE(rel(d.alpha.imag(), double(exact.dk.imag())), 1e-6);
  EXPECT_LE(rel(d.beta.real(), double(exact.d2k.real() / 2)), 1e-6);
  EXPECT_LE(rel(d.beta.imag(), double(exact.d2k.imag() / 2)), 1e-6);
  EXPECT_GE(min_im_wavevector_on_band(d, s), 0.0);
}

TEST(Lorentz, SecondDifferenceConvergesAtSecondOrder) {
  const auto s = SourceSpec::make(2.4e15, 1e13);
  const LorentzOscillator osc{1e15, 4e15, 1e13};
  const auto exact = lorentz_exact(osc, 1.2e15L, kSpeedOfLightSI);
  const double beta_re = double(exact.d2k.real() / 2), beta_im = double(exact.d2k.imag() / 2);
  const double h = 2e14;
  const auto coarse = lorentz_to_dispersion(osc, s, h);
  const auto fine = lorentz_to_dispersion(osc, s, h / 2);
  const double order_re = std::log2(std::abs(coarse.beta.real() - beta_re) / std::abs(fine.beta.real() - beta_re));
  const double order_im = std::log2(std::abs(coarse.beta.imag() - beta_im) / std::abs(fine.beta.imag() - beta_im));
  EXPECT_GE(order_re, 1.9);
  EXPECT_GE(order_im, 1.9);
}

TEST(Lorentz, RejectsNearResonanceAndBadParameters) {
  const auto s = SourceSpec::make(2.4e15, 1e13);
  EXPECT_THROW(lorentz_to_dispersion({1e15, 1.2e15 + 5e13, 1e13}, s), ConfigError);
  EXPECT_THROW(lorentz_to_dispersion({1e15, 0.0, 1e13}, s), ConfigError);
  EXPECT_THROW(lorentz_to_dispersion({1e15, 4e15, -1.0}, s), ConfigError);
  // Undamped resonance inside the band.
  EXPECT_THROW(lorentz_to_dispersion({1e15, 1.2e15 + 3e13, 0.0}, s), ConfigError);
}

TEST(ArmConfig, VacuumArmUsesVacuumDispersion) {
  const auto s = SourceSpec::natural_preset();
  const ArmConfig arm{2.0, Vacuum{}};
  EXPECT_EQ(arm.dispersion(s), make_vacuum_dispersion(s));
  EXPECT_THROW((ArmConfig{-1.0, Vacuum{}}.validate(s, "arm1")), ConfigError);
}

TEST(InterferometerConfig, SingleFormulaNeedsVacuumArm2) {
  auto c = lossyhom::testing::matched_two_dielectric();
  c.beta_convention = BetaConvention::single_formula;
  EXPECT_THROW(c.validate(), ConfigError);
}
