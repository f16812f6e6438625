// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: ten end-to-end checks against independent oracles and
// statistical bands. Each test prints one [PASS]/[FAIL] line with its worst
// observed margin, so a transcript of this binary is a complete scorecard.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "obr/analysis.hpp"
#include "obr/detector.hpp"
#include "obr/experiments.hpp"
#include "obr/orthant.hpp"
#include "obr/radar.hpp"
#include "obr/rng.hpp"
#include "../testutil.hpp"

using namespace obr;

namespace {

constexpr std::uint64_t kSeed = 20260815;

void report(int num, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", num,
              detail.c_str());
  std::fflush(stdout);
  REQUIRE(ok);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// Desk reference setup shared by the statistical criteria: the default
// configuration scale, built once.
struct Desk {
  CMat sigma;
  Scenario sc;
  NoiseTables noise;
  DetectorTables det;
};

const Desk& desk() {
  static const Desk d = [] {
    Desk s;
    RngStream cov_rng(kSeed, streams::tag(streams::kNoiseCov));
    s.sigma = random_noise_cov(2, 1.0, cov_rng);
    s.sc = make_scenario(2, 2, 500, 0.25 * kPi, 0.25 * kPi, s.sigma);
    s.noise = build_noise_tables(s.sc.comp.c, 1e-7,
                                 RngStream(kSeed, streams::tag(streams::kTables)));
    s.det = build_detector_tables(s.sc, s.sc.comp, s.noise);
    return s;
  }();
  return d;
}

double frac_above(const Vec& stats, double gamma) {
  std::size_t hits = 0;
  for (double t : stats) hits += t > gamma;
  return static_cast<double>(hits) / static_cast<double>(stats.size());
}

// Empirical detection rate at thresholds set from the null sample.
Vec empirical_roc(const Vec& h0, const Vec& h1, const Vec& pfa_grid) {
  Vec sorted = h0;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Vec pd(pfa_grid.size());
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    const double want = pfa_grid[i] * static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::floor(want + 0.5));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    const double thr = sorted[rank - 1];
    double hits = 0;
    for (double t : h1) hits += t >= thr;
    pd[i] = hits / static_cast<double>(h1.size());
  }
  return pd;
}

// Ten threshold points placed where the detection curve is statistically
// informative: from where it leaves ~0.985 down to where it reaches ~0.03.
Vec informative_gamma_grid(const NonNullMoments& mom) {
  double lo = 0.05, hi = 0.05;
  bool lo_set = false;
  for (double g = 0.05; g <= 150.0; g += 0.05) {
    const double pd = pd_exact(g, mom);
    if (!lo_set && pd <= 0.985) {
      lo = g;
      lo_set = true;
    }
    if (pd >= 0.03) hi = g;
  }
  if (!(hi > lo)) hi = lo + 5.0;
  return linspace(lo, hi, 10);
}

double mean_abs_dev(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("criterion 1: orthant probabilities against the arcsine law and "
          "direct sampling",
          "[acceptance]") {
  double worst_closed = 0.0;
  for (double r : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    Mat c(2, 2);
    c(0, 0) = c(1, 1) = 1.0;
    c(0, 1) = c(1, 0) = r;
    const double got = orthant_prob({0.0, 0.0}, c, 1e-9, RngStream(1, 0)).value;
    const double want = 0.25 + std::asin(r) / (2.0 * kPi);
    worst_closed = std::max(worst_closed, std::fabs(got - want));
  }

  // Ten random covariances, each checked against a plain 1e7-draw sample.
  const std::size_t n_mats = 10, n_draws = 10000000;
  Vec quad(n_mats), mc(n_mats), se(n_mats);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_mats; ++i)
    pool.emplace_back([&, i] {
      RngStream mat_rng(1001 + i, 0);
      const Mat s = testutil::random_spd(4, mat_rng);
      const Vec zero(4, 0.0);
      quad[i] = orthant_prob(zero, s, 1e-6, RngStream(2001 + i, 0)).value;
      RngStream mc_rng(3001 + i, 0);
      const auto [p, e] = testutil::mc_orthant(zero, s, n_draws, mc_rng);
      mc[i] = p;
      se[i] = e;
    });
  for (auto& t : pool) t.join();

  double worst_sigmas = 0.0;
  for (std::size_t i = 0; i < n_mats; ++i)
    worst_sigmas = std::max(worst_sigmas, std::fabs(quad[i] - mc[i]) / se[i]);

  const bool ok = worst_closed <= 1e-6 && worst_sigmas <= 3.0;
  report(1, ok,
         fmt("arcsine worst |err| %.2e (<= 1e-6), sampling worst %.2f sigma "
             "(<= 3)",
             worst_closed, worst_sigmas));
}

TEST_CASE("criterion 2: probability gradients against central differences",
          "[acceptance]") {
  // Both finite-difference evaluations share one stream and a fixed point
  // budget, so the quadrature error cancels in the difference.
  OrthantOptions fd_opt;
  fd_opt.tol = 1e-12;
  fd_opt.max_points = 1u << 17;
  fd_opt.n_shifts = 8;
  fd_opt.first_batch = 16384;
  const double h = 1e-4;

  double worst_mean = 0.0, worst_corr = 0.0;
  RngStream inst_rng(42, 0);
  for (std::size_t inst = 0; inst < 20; ++inst) {
    const std::size_t k = 3 + inst % 4;
    const Mat c = testutil::random_coherence(k, inst_rng);
    const Vec zero(k, 0.0);

    // The base point keeps the standardized limits away from ties; at a tie
    // the +-h evaluations reorder the variables differently and the shared
    // quadrature error stops cancelling.
    Vec base(k);
    for (double& b : base) b = 0.3 * inst_rng.next_normal();

    for (std::size_t j = 0; j < k; ++j) {
      const double grad =
          orthant_grad_mean(base, c, j, 1e-6, RngStream(50 + inst, j));
      Vec mu_p(base), mu_m(base);
      mu_p[j] += h;
      mu_m[j] -= h;
      const RngStream shared(90 + inst, j);
      const double fp = orthant_prob(mu_p, c, fd_opt, shared).value;
      const double fm = orthant_prob(mu_m, c, fd_opt, shared).value;
      worst_mean = std::max(worst_mean, std::fabs(grad - (fp - fm) / (2.0 * h)));
    }

    for (std::size_t r = 0; r + 1 < k; ++r)
      for (std::size_t s = r + 1; s < k; ++s) {
        const double grad =
            orthant_grad_corr(c, r, s, 1e-6, RngStream(130 + inst, r * k + s));
        Mat cp = c, cm = c;
        cp(r, s) = cp(s, r) = c(r, s) + h;
        cm(r, s) = cm(s, r) = c(r, s) - h;
        const RngStream shared(170 + inst, r * k + s);
        const double fp = orthant_prob(zero, cp, fd_opt, shared).value;
        const double fm = orthant_prob(zero, cm, fd_opt, shared).value;
        worst_corr = std::max(worst_corr, std::fabs(grad - (fp - fm) / (2.0 * h)));
      }
  }

  const bool ok = worst_mean <= 1e-4 && worst_corr <= 1e-4;
  report(2, ok,
         fmt("mean-gradient worst |err| %.2e, correlation-gradient worst "
             "|err| %.2e (<= 1e-4)",
             worst_mean, worst_corr));
}

TEST_CASE("criterion 3: internal consistency of the detector tables",
          "[acceptance]") {
  const Scenario sc =
      make_scenario(2, 2, 100, 0.25 * kPi, 0.25 * kPi, desk().sigma);
  const DetectorTables t = build_detector_tables(sc, sc.comp, desk().noise);
  const std::size_t kappa = pattern_count(t.m);

  double u1 = 0.0, u2 = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < t.n; ++i)
    for (std::size_t j = 0; j < kappa; ++j) {
      const double inv_o = 1.0 / t.noise.o[j];
      u1 += t.delta1(i, j) * t.delta1(i, j) * inv_o;
      u2 += t.delta2(i, j) * t.delta2(i, j) * inv_o;
      cross += t.delta1(i, j) * t.delta2(i, j) * inv_o;
    }

  const DetectorTables w = white_detector_tables(sc);
  double norms = 0.0;
  for (std::size_t i = 0; i < w.n; ++i)
    for (std::size_t x = 0; x < 2 * w.m; ++x)
      norms += w.a_cols(i, x) * w.a_cols(i, x);
  const double closed = 2.0 / kPi * norms;

  const double cross_rel = std::fabs(cross) / u1;
  const double dual_rel = std::fabs(u1 - u2) / u1;
  const double white_rel = std::fabs(w.upsilon_sq - closed) / closed;
  const bool ok = cross_rel <= 1e-6 && dual_rel <= 1e-6 && white_rel <= 1e-5;
  report(3, ok,
         fmt("cross-trace %.2e, dual-form gap %.2e (<= 1e-6), white "
             "closed-form gap %.2e (<= 1e-5)",
             cross_rel, dual_rel, white_rel));
}

TEST_CASE("criterion 4: null calibration at the desk scale", "[acceptance]") {
  const std::size_t n_trials = 100000;
  const std::vector<Vec> stats =
      simulate_statistics({&desk().det}, desk().sc.w, desk().sc.comp, 0.0,
                          n_trials, kSeed, 0, 0);

  const double gamma = threshold_for_pfa(0.01);
  const double emp = frac_above(stats[0], gamma);
  const double band = 3.0 * testutil::binomial_sigma(0.01, n_trials);

  const double ks = testutil::ks_distance(
      stats[0], [](double x) { return testutil::chi2_2_cdf(x); });
  const double ks_crit = 1.6276 / std::sqrt(static_cast<double>(n_trials));

  const bool ok = std::fabs(emp - 0.01) <= band && ks < ks_crit;
  report(4, ok,
         fmt("false alarm rate %.5f (target 0.01 +- %.5f), ", emp, band) +
             fmt("KS distance %.5f (< %.5f)", ks, ks_crit));
}

TEST_CASE("criterion 5: recalibrated thresholds under a fixed covariance error",
          "[acceptance]") {
  const std::size_t n_trials = 100000;
  RngStream prng(kSeed, streams::tag(streams::kPerturb, 90));
  const CompositeCovariance truth =
      complex_to_composite(perturb_cov(desk().sigma, 0.1, prng));
  const MismatchAnalysis mm =
      analyze_mismatch(desk().det, truth, 1e-6,
                       RngStream(kSeed, streams::tag(streams::kAnalysis, 90)));

  const std::vector<Vec> stats =
      simulate_statistics({&desk().det}, desk().sc.w, truth, 0.0, n_trials,
                          kSeed, 100000, 0);

  const double g_adj = threshold_mismatched(0.01, mm.upsilon_sq, mm.upsilon1_sq);
  const double emp_adj = frac_above(stats[0], g_adj);
  const double band_adj = 3.0 * testutil::binomial_sigma(0.01, n_trials);

  const double g_raw = threshold_for_pfa(0.01);
  const double theory_raw = pfa_mismatched(g_raw, mm.upsilon_sq, mm.upsilon1_sq);
  const double emp_raw = frac_above(stats[0], g_raw);
  const double band_raw = 3.0 * testutil::binomial_sigma(theory_raw, n_trials);

  const bool ok = std::fabs(emp_adj - 0.01) <= band_adj &&
                  std::fabs(emp_raw - theory_raw) <= band_raw;
  report(5, ok,
         fmt("adjusted rate %.5f (0.01 +- %.5f), ", emp_adj, band_adj) +
             fmt("unadjusted rate %.5f vs predicted %.5f (+- %.5f)", emp_raw,
                 theory_raw, band_raw));
}

TEST_CASE("criterion 6: averaged false alarm rate, both analytic routes",
          "[acceptance]") {
  const std::size_t n_trials = 100000, n_draws = 1000;
  const Vec gammas = {threshold_for_pfa(0.1), threshold_for_pfa(0.03),
                      threshold_for_pfa(0.01)};
  const PriorSampler prior = [](RngStream& r) {
    return perturb_cov(desk().sigma, 0.02, r);
  };

  const Vec taylor =
      avg_pfa(gammas, desk().det, prior, n_draws, AvgPfaMode::taylor, 1e-6,
              RngStream(kSeed, streams::tag(streams::kPrior, 900)));
  const Vec direct =
      avg_pfa(gammas, desk().det, prior, n_draws, AvgPfaMode::direct, 1e-6,
              RngStream(kSeed, streams::tag(streams::kPrior, 901)));

  const TruthFactory factory = [](std::size_t, RngStream& r) {
    return complex_to_composite(perturb_cov(desk().sigma, 0.02, r));
  };
  const std::vector<Vec> stats = simulate_statistics_varying(
      {&desk().det}, desk().sc.w, factory, 0.0, n_trials, kSeed, 200000, 0);

  double worst_rel = 0.0, worst_sig = 0.0;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const double emp = frac_above(stats[0], gammas[g]);
    worst_rel = std::max(worst_rel,
                         std::fabs(taylor[g] - direct[g]) / direct[g]);
    const double sd = testutil::binomial_sigma(direct[g], n_trials);
    worst_sig = std::max(worst_sig, std::fabs(taylor[g] - emp) / sd);
    worst_sig = std::max(worst_sig, std::fabs(direct[g] - emp) / sd);
  }

  const bool ok = worst_rel <= 0.05 && worst_sig <= 3.0;
  report(6, ok,
         fmt("route gap %.3f relative (<= 0.05), worst %.2f sigma from "
             "simulation (<= 3)",
             worst_rel, worst_sig));
}

TEST_CASE("criterion 7: detection probability against simulation",
          "[acceptance]") {
  const std::size_t n_trials = 100000;
  RngStream prng(kSeed, streams::tag(streams::kPerturb, 91));
  const CompositeCovariance truth =
      complex_to_composite(perturb_cov(desk().sigma, 0.02, prng));

  double worst = 0.0;
  std::uint64_t offset = 300000;
  std::size_t case_idx = 0;
  for (double snr : {-15.0, -10.0}) {
    const double beta = beta_for_snr(desk().sigma, desk().sc.p, snr);
    for (bool matched : {true, false}) {
      const NonNullMoments mom = non_null_moments(
          desk().det, beta, matched ? nullptr : &truth, 1e-6,
          RngStream(kSeed, streams::tag(streams::kAnalysis, 92 + case_idx)));
      const std::vector<Vec> stats = simulate_statistics(
          {&desk().det}, desk().sc.w, matched ? desk().sc.comp : truth, beta,
          n_trials, kSeed, offset, 0);
      offset += n_trials;
      ++case_idx;

      const Vec grid = informative_gamma_grid(mom);
      for (double g : grid) {
        const double pe = pd_exact(g, mom);
        const double emp = frac_above(stats[0], g);
        const double sd = testutil::binomial_sigma(pe, n_trials);
        worst = std::max(worst, std::fabs(pe - emp) / sd);
      }
    }
  }

  const bool ok = worst <= 3.0;
  report(7, ok,
         fmt("worst deviation %.2f sigma over 4 cases x 10 thresholds (<= 3)",
             worst));
}

TEST_CASE("criterion 8: where the weak-signal approximation degrades",
          "[acceptance]") {
  // The two analytic detection-rate routes are compared inside each
  // signal level's own transition region; a grid common to all levels
  // would sit in a saturated stretch of at least one curve. The moment
  // route is then anchored to simulation at the strongest signal, where
  // the weak-signal route is visibly off.
  const std::size_t n_trials = 100000;
  const Vec snrs = {-20.0, -10.0, -7.0};

  Vec dev(snrs.size());
  double worst_sigma = 0.0;
  for (std::size_t ci = 0; ci < snrs.size(); ++ci) {
    const double beta = beta_for_snr(desk().sigma, desk().sc.p, snrs[ci]);
    const NonNullMoments mom = non_null_moments(
        desk().det, beta, nullptr, 1e-6,
        RngStream(kSeed, streams::tag(streams::kAnalysis, 110 + ci)));
    const Vec grid = informative_gamma_grid(mom);

    Vec exact(grid.size()), low(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      exact[i] = pd_exact(grid[i], mom);
      low[i] = pd_low_snr(grid[i], desk().det, beta);
    }
    dev[ci] = mean_abs_dev(exact, low);

    if (ci + 1 == snrs.size()) {
      const std::vector<Vec> stats =
          simulate_statistics({&desk().det}, desk().sc.w, desk().sc.comp, beta,
                              n_trials, kSeed, 700000, 0);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double emp = frac_above(stats[0], grid[i]);
        const double sd = testutil::binomial_sigma(exact[i], n_trials);
        worst_sigma = std::max(worst_sigma, std::fabs(exact[i] - emp) / sd);
      }
    }
  }

  const bool ok = dev[0] < dev[1] && dev[1] < dev[2] &&
                  dev[2] >= 5.0 * dev[0] && worst_sigma <= 3.0;
  report(8, ok,
         fmt("route gap %.2e -> %.2e -> %.2e rising with signal level, ", dev[0],
             dev[1], dev[2]) +
             fmt("moment route %.2f sigma from simulation at -7 dB (<= 3)",
                 worst_sigma));
}

TEST_CASE("criterion 9: gains over the white-noise baseline and trained tables",
          "[acceptance]") {
  const std::size_t n_trials = 100000;
  const double beta = beta_for_snr(desk().sigma, desk().sc.p, -10.0);
  const Vec pfa_grid = log_pfa_grid(1e-3, 10);
  const DetectorTables white = white_detector_tables(desk().sc);

  const std::vector<Vec> h0 =
      simulate_statistics({&desk().det, &white}, desk().sc.w, desk().sc.comp,
                          0.0, n_trials, kSeed, 1000000, 0);
  const std::vector<Vec> h1 =
      simulate_statistics({&desk().det, &white}, desk().sc.w, desk().sc.comp,
                          beta, n_trials, kSeed, 1100000, 0);
  const Vec pd_prop = empirical_roc(h0[0], h1[0], pfa_grid);
  const Vec pd_white = empirical_roc(h0[1], h1[1], pfa_grid);

  double worst_shortfall = -1.0;
  bool dominates = true;
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    const double sd = std::sqrt(
        (pd_prop[i] * (1.0 - pd_prop[i]) + pd_white[i] * (1.0 - pd_white[i])) /
        static_cast<double>(n_trials));
    const double shortfall = pd_white[i] - pd_prop[i];
    worst_shortfall = std::max(worst_shortfall, shortfall);
    if (shortfall > 3.0 * sd) dominates = false;
  }

  // A long training interval must bring the trained detector to the
  // known-covariance one.
  const Scenario train =
      make_scenario(2, 2, 10000, 0.25 * kPi, 0.25 * kPi, desk().sigma);
  RngStream trng(kSeed, streams::tag(streams::kScenario, 50));
  const QuantizedData qd = simulate_quantized(train, 0.0, trng);
  const CompositeCovariance est = estimate_composite_one_bit(qd);
  const NoiseTables est_noise = build_noise_tables(
      est.c, 1e-7, RngStream(kSeed, streams::tag(streams::kTables, 60)));
  const DetectorTables det_est =
      build_detector_tables(desk().sc, est, est_noise);

  const std::vector<Vec> t0 =
      simulate_statistics({&det_est, &desk().det}, desk().sc.w, desk().sc.comp,
                          0.0, n_trials, kSeed, 1200000, 0);
  const std::vector<Vec> t1 =
      simulate_statistics({&det_est, &desk().det}, desk().sc.w, desk().sc.comp,
                          beta, n_trials, kSeed, 1300000, 0);
  const Vec pd_est = empirical_roc(t0[0], t1[0], pfa_grid);
  const Vec pd_known = empirical_roc(t0[1], t1[1], pfa_grid);

  double worst_train = 0.0;
  bool trained_close = true;
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    const double sd = std::sqrt(
        (pd_est[i] * (1.0 - pd_est[i]) + pd_known[i] * (1.0 - pd_known[i])) /
        static_cast<double>(n_trials));
    const double gap = std::fabs(pd_est[i] - pd_known[i]);
    worst_train = std::max(worst_train, gap - 3.0 * sd);
    if (gap > 3.0 * sd) trained_close = false;
  }

  const bool ok = dominates && trained_close;
  report(9, ok,
         fmt("worst shortfall vs white %.4f (within 3 sigma), trained-vs-known "
             "worst excess over band %.4f",
             worst_shortfall, std::max(0.0, worst_train)));
}

TEST_CASE("criterion 10: the statistic equals its textbook definition",
          "[acceptance]") {
  double worst = 0.0;
  for (std::size_t rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rep % 3;
    RngStream cov_rng(7000 + rep, 0);
    const CMat sigma1 = random_noise_cov(1, 1.0, cov_rng);
    const Scenario sc = make_scenario(1, 1, n, 0.25 * kPi, 0.2, sigma1);
    const DetectorTables det = build_detector_tables(
        sc, sc.comp, build_noise_tables(sc.comp.c, 1e-9, RngStream(7200 + rep, 0)));

    const cplx beta = (rep % 2) ? cplx(0.4, 0.2) : cplx(0.0, 0.0);
    RngStream drng(7400 + rep, 0);
    const QuantizedData q = simulate_quantized(sc, beta, drng);

    const double t_lib = rao_statistic(det, q);
    const double t_def = testutil::definitional_rao_m1(sc, q);
    worst = std::max(worst,
                     std::fabs(t_lib - t_def) / std::max(1.0, std::fabs(t_def)));
  }

  const bool ok = worst <= 1e-6;
  report(10, ok, fmt("worst relative gap %.2e over 100 datasets (<= 1e-6)",
                     worst));
}
