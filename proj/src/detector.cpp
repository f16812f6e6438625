// SPDX-License-Identifier: Apache-2.0
#include "obr/detector.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "obr/orthant.hpp"

namespace obr {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

Mat sign_conjugate(const Mat& c, const std::int8_t* tau) {
  const std::size_t k = c.rows();
  Mat out(k, k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q)
      out(p, q) = static_cast<double>(tau[p]) * static_cast<double>(tau[q]) * c(p, q);
  return out;
}

// d row for the quarter-turn image: [bottom; -top].
void rotate_row(const double* in, double* out, std::size_t m) {
  for (std::size_t t = 0; t < m; ++t) {
    out[t] = in[m + t];
    out[m + t] = -in[t];
  }
}

void validate_coherence(const Mat& c) {
  if (!c.square() || c.rows() == 0 || c.rows() % 2 != 0)
    throw InvalidArgument("noise tables: coherence must be square of even size");
  for (std::size_t i = 0; i < c.rows(); ++i)
    if (std::fabs(c(i, i) - 1.0) > 1e-10)
      throw InvalidArgument("noise tables: coherence needs a unit diagonal");
}

double trace_form(const Mat& delta, const Vec& weight_inv) {
  double acc = 0.0;
  for (std::size_t j = 0; j < delta.cols(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < delta.rows(); ++i) col += delta(i, j) * delta(i, j);
    acc += col / weight_inv[j];
  }
  return acc;
}

}  // namespace

std::size_t pattern_count(std::size_t m) { return std::size_t{1} << (2 * m); }

std::uint32_t pattern_index(const std::int8_t* tau, std::size_t len) {
  std::uint32_t idx = 0;
  for (std::size_t l = 0; l < len; ++l)
    idx |= static_cast<std::uint32_t>(tau[l] > 0) << (len - 1 - l);
  return idx;
}

void pattern_signs(std::uint32_t idx, std::size_t len, std::int8_t* tau) {
  for (std::size_t l = 0; l < len; ++l)
    tau[l] = (idx >> (len - 1 - l)) & 1u ? 1 : -1;
}

std::uint32_t pattern_rotate(std::uint32_t idx, std::size_t m) {
  const std::uint32_t mask = (1u << m) - 1u;
  const std::uint32_t top = (idx >> m) & mask;
  const std::uint32_t bot = idx & mask;
  return (bot << m) | (~top & mask);
}

std::uint32_t data_pattern(const QuantizedData& q, std::size_t l) {
  const std::size_t m = q.m;
  std::uint32_t re_bits = 0, im_bits = 0;
  for (std::size_t i = 0; i < m; ++i) {
    re_bits |= static_cast<std::uint32_t>(q.re[l * m + i] > 0) << (m - 1 - i);
    im_bits |= static_cast<std::uint32_t>(q.im[l * m + i] > 0) << (m - 1 - i);
  }
  return (re_bits << m) | im_bits;
}

NoiseTables build_noise_tables(const Mat& coherence, double tol, RngStream rng) {
  validate_coherence(coherence);
  const std::size_t k = coherence.rows();
  const std::size_t m = k / 2;
  if (m > 6) throw InvalidArgument("noise tables: pattern set too large (m > 6)");
  const std::size_t kappa = pattern_count(m);

  NoiseTables t;
  t.m = m;
  t.c = coherence;
  symmetrize(t.c);
  // The orbit sharing below leans on invariance under the quarter turn of
  // the embedding; reject inputs that lack it and snap the rest exactly
  // onto it so the shared entries are bitwise identities.
  if (quarter_turn_defect(t.c) > 1e-8)
    throw InvalidArgument(
        "noise tables: coherence is not quarter-turn invariant; it does not "
        "come from a circular complex covariance");
  t.c = quarter_turn_project(t.c);
  t.tol = tol;
  t.o.assign(kappa, 0.0);
  t.d = Mat(kappa, k);

  const std::uint32_t full = static_cast<std::uint32_t>(kappa - 1);
  std::vector<bool> seen(kappa, false);
  std::vector<std::int8_t> tau(k);
  const Vec zero(k, 0.0);

  for (std::uint32_t j = 0; j < kappa; ++j) {
    if (seen[j]) continue;
    const std::array<std::uint32_t, 4> orbit = {
        j, pattern_rotate(j, m), j ^ full, pattern_rotate(j ^ full, m)};
    for (std::uint32_t e : orbit) seen[e] = true;
    t.orbits.push_back(orbit);

    pattern_signs(j, k, tau.data());
    const Mat cj = sign_conjugate(t.c, tau.data());

    RngStream sub_o(rng.next_u64(), rng.next_u64());
    const double oj = orthant_prob(zero, cj, tol, sub_o).value;
    for (std::uint32_t e : orbit) t.o[e] = oj;

    for (std::size_t l = 0; l < k; ++l) {
      RngStream sub_d(rng.next_u64(), rng.next_u64());
      t.d(j, l) = static_cast<double>(tau[l]) *
                  orthant_grad_mean(zero, cj, l, tol, sub_d);
    }
    for (std::size_t step = 1; step < 4; ++step)
      rotate_row(t.d.row(orbit[step - 1]), t.d.row(orbit[step]), m);
  }
  return t;
}

NoiseTables white_noise_tables(std::size_t m) {
  if (m == 0 || m > 6) throw InvalidArgument("white_noise_tables: need 1 <= m <= 6");
  const std::size_t k = 2 * m;
  const std::size_t kappa = pattern_count(m);

  NoiseTables t;
  t.m = m;
  t.c = Mat::identity(k);
  t.tol = 0.0;
  // Independent signs: every pattern has probability 2^-2m and each gradient
  // component is the product of the remaining half-probabilities.
  const double oj = std::ldexp(1.0, -static_cast<int>(k));
  const double grad = kInvSqrt2Pi * std::ldexp(1.0, -static_cast<int>(k - 1));
  t.o.assign(kappa, oj);
  t.d = Mat(kappa, k);

  const std::uint32_t full = static_cast<std::uint32_t>(kappa - 1);
  std::vector<bool> seen(kappa, false);
  std::vector<std::int8_t> tau(k);
  for (std::uint32_t j = 0; j < kappa; ++j) {
    if (seen[j]) continue;
    const std::array<std::uint32_t, 4> orbit = {
        j, pattern_rotate(j, m), j ^ full, pattern_rotate(j ^ full, m)};
    for (std::uint32_t e : orbit) seen[e] = true;
    t.orbits.push_back(orbit);
    pattern_signs(j, k, tau.data());
    for (std::size_t l = 0; l < k; ++l) t.d(j, l) = static_cast<double>(tau[l]) * grad;
    for (std::size_t step = 1; step < 4; ++step)
      rotate_row(t.d.row(orbit[step - 1]), t.d.row(orbit[step]), m);
  }
  return t;
}

std::uint64_t coherence_key(const Mat& c) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 1099511628211ull;
    }
  };
  mix(c.rows());
  for (std::size_t i = 0; i < c.rows() * c.cols(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, c.data() + i, sizeof bits);
    mix(bits);
  }
  return h;
}

void save_noise_tables(const NoiseTables& t, const std::string& path) {
  nlohmann::json j;
  j["m"] = t.m;
  j["tol"] = t.tol;
  j["key"] = coherence_key(t.c);
  j["c"] = std::vector<double>(t.c.data(), t.c.data() + t.c.rows() * t.c.cols());
  j["o"] = t.o;
  j["d"] = std::vector<double>(t.d.data(), t.d.data() + t.d.rows() * t.d.cols());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write noise tables to " + path);
  out << j.dump(2) << '\n';
}

NoiseTables load_noise_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read noise tables from " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("noise tables file is not valid JSON: " + std::string(e.what()));
  }

  NoiseTables t;
  try {
    t.m = j.at("m").get<std::size_t>();
    if (t.m == 0 || t.m > 6) throw ConfigError("noise tables file: bad m");
    const std::size_t k = 2 * t.m;
    const std::size_t kappa = pattern_count(t.m);
    t.tol = j.at("tol").get<double>();

    const auto c = j.at("c").get<std::vector<double>>();
    const auto o = j.at("o").get<std::vector<double>>();
    const auto d = j.at("d").get<std::vector<double>>();
    if (c.size() != k * k || o.size() != kappa || d.size() != kappa * k)
      throw ConfigError("noise tables file: inconsistent sizes");

    t.c = Mat(k, k);
    std::memcpy(t.c.data(), c.data(), c.size() * sizeof(double));
    t.o = o;
    t.d = Mat(kappa, k);
    std::memcpy(t.d.data(), d.data(), d.size() * sizeof(double));
    if (j.at("key").get<std::uint64_t>() != coherence_key(t.c))
      throw ConfigError("noise tables file: key does not match stored coherence");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("noise tables file is malformed: " + std::string(e.what()));
  }

  const std::size_t kappa = pattern_count(t.m);
  const std::uint32_t full = static_cast<std::uint32_t>(kappa - 1);
  std::vector<bool> seen(kappa, false);
  for (std::uint32_t jj = 0; jj < kappa; ++jj) {
    if (seen[jj]) continue;
    const std::array<std::uint32_t, 4> orbit = {
        jj, pattern_rotate(jj, t.m), jj ^ full, pattern_rotate(jj ^ full, t.m)};
    for (std::uint32_t e : orbit) seen[e] = true;
    t.orbits.push_back(orbit);
  }
  return t;
}

DetectorTables build_detector_tables(const Scenario& sc,
                                     const CompositeCovariance& assumed,
                                     NoiseTables noise) {
  const std::size_t m = sc.m, n = sc.n, k = 2 * m;
  if (assumed.half() != m || noise.m != m)
    throw InvalidArgument("detector tables: dimension mismatch");
  const std::size_t kappa = pattern_count(m);

  DetectorTables t;
  t.m = m;
  t.n = n;
  t.noise = std::move(noise);
  t.d_diag = assumed.d;

  t.a_cols = Mat(n, k);
  t.b_cols = Mat(n, k);
  Vec inv_sd(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(assumed.d[i] > 0.0))
      throw InvalidArgument("detector tables: nonpositive composite diagonal");
    inv_sd[i] = 1.0 / std::sqrt(assumed.d[i]);
  }
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < m; ++i) {
      const cplx w = sc.w(i, l);
      t.a_cols(l, i) = inv_sd[i] * w.real();
      t.a_cols(l, m + i) = inv_sd[m + i] * w.imag();
      t.b_cols(l, i) = -inv_sd[i] * w.imag();
      t.b_cols(l, m + i) = inv_sd[m + i] * w.real();
    }
  }

  t.delta1 = Mat(n, kappa);
  t.delta2 = Mat(n, kappa);
  for (std::size_t l = 0; l < n; ++l)
    for (std::uint32_t j = 0; j < kappa; ++j) {
      double s1 = 0.0, s2 = 0.0;
      const double* dj = t.noise.d.row(j);
      for (std::size_t i = 0; i < k; ++i) {
        s1 += t.a_cols(l, i) * dj[i];
        s2 += t.b_cols(l, i) * dj[i];
      }
      t.delta1(l, j) = s1;
      t.delta2(l, j) = s2;
    }

  const double u1 = trace_form(t.delta1, t.noise.o);
  const double u2 = trace_form(t.delta2, t.noise.o);
  if (!(u1 > 0.0))
    throw NumericError("detector tables: Fisher scale is not positive");
  if (std::fabs(u1 - u2) > 1e-6 * u1)
    throw NumericError("detector tables: Fisher scale identity violated");
  t.upsilon_sq = 0.5 * (u1 + u2);

  const double inv_ups = 1.0 / std::sqrt(t.upsilon_sq);
  t.score1 = Mat(n, kappa);
  t.score2 = Mat(n, kappa);
  for (std::size_t l = 0; l < n; ++l)
    for (std::uint32_t j = 0; j < kappa; ++j) {
      const double w = inv_ups / t.noise.o[j];
      t.score1(l, j) = t.delta1(l, j) * w;
      t.score2(l, j) = t.delta2(l, j) * w;
    }
  return t;
}

DetectorTables build_detector_tables(const Scenario& sc, double tol, RngStream rng) {
  return build_detector_tables(sc, sc.comp, build_noise_tables(sc.comp.c, tol, rng));
}

DetectorTables white_detector_tables(const Scenario& sc) {
  double tr = 0.0;
  for (std::size_t i = 0; i < sc.m; ++i) tr += sc.sigma_n(i, i).real();
  const Vec flat(2 * sc.m, tr / static_cast<double>(2 * sc.m));
  return build_detector_tables(
      sc, composite_from_parts(flat, Mat::identity(2 * sc.m)),
      white_noise_tables(sc.m));
}

std::pair<double, double> score_pair(const DetectorTables& t, const QuantizedData& q) {
  if (q.m != t.m || q.n != t.n)
    throw InvalidArgument("score_pair: data does not match tables");
  double w1 = 0.0, w2 = 0.0;
  for (std::size_t l = 0; l < q.n; ++l) {
    const std::uint32_t j = data_pattern(q, l);
    w1 += t.score1(l, j);
    w2 += t.score2(l, j);
  }
  return {w1, w2};
}

double rao_statistic(const DetectorTables& t, const QuantizedData& q) {
  const auto [w1, w2] = score_pair(t, q);
  return w1 * w1 + w2 * w2;
}

double threshold_for_pfa(double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0))
    throw InvalidArgument("threshold_for_pfa: pfa must lie in (0,1)");
  return -2.0 * std::log(pfa);
}

}  // namespace obr
