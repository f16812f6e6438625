// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "obr/kernels.hpp"
#include "obr/normal.hpp"
#include "obr/rng.hpp"
#include "testutil.hpp"

using namespace obr;

TEST_CASE("normal cdf matches an independent erfc evaluation", "[kernels]") {
  std::vector<double> xs, got;
  for (double x = -37.0; x <= 37.0; x += 0.173) xs.push_back(x);
  got.resize(xs.size());
  for (const kernels::Batch* b : kernels::available_batches()) {
    INFO("backend " << b->name);
    b->norm_cdf(xs.data(), got.data(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double want = 0.5 * testutil::erfc_reference(-xs[i] / std::sqrt(2.0));
      if (want < 1e-290) {
        REQUIRE(got[i] < 1e-280);
      } else {
        REQUIRE(std::fabs(got[i] - want) <= 5e-13 * want);
      }
    }
  }
}

TEST_CASE("every cdf backend agrees with the scalar reference", "[kernels]") {
  RngStream rng(7, 1);
  std::vector<double> xs(4097), ref(xs.size()), got(xs.size());
  for (double& x : xs) x = (rng.next_uniform() - 0.5) * 74.0;
  const kernels::Batch& s = kernels::scalar_batch();
  s.norm_cdf(xs.data(), ref.data(), xs.size());
  for (const kernels::Batch* b : kernels::available_batches()) {
    if (b == &s) continue;
    INFO("backend " << b->name);
    b->norm_cdf(xs.data(), got.data(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (ref[i] < 1e-290) {
        REQUIRE(got[i] < 1e-280);
      } else {
        REQUIRE(std::fabs(got[i] - ref[i]) <= 1e-13 * ref[i]);
      }
    }
  }
}

TEST_CASE("every quantile backend agrees with the scalar reference", "[kernels]") {
  RngStream rng(7, 2);
  std::vector<double> ps(4097), ref(ps.size()), got(ps.size());
  for (double& p : ps) p = rng.next_uniform();
  ps[0] = 1e-300;
  ps[1] = 1e-17;
  ps[2] = 1.0 - 1e-16;
  const kernels::Batch& s = kernels::scalar_batch();
  s.norm_icdf(ps.data(), ref.data(), ps.size());
  for (const kernels::Batch* b : kernels::available_batches()) {
    if (b == &s) continue;
    INFO("backend " << b->name);
    b->norm_icdf(ps.data(), got.data(), ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
      REQUIRE(std::fabs(got[i] - ref[i]) <=
              1e-12 * std::max(1.0, std::fabs(ref[i])));
  }
}

TEST_CASE("quantile inverts the cdf", "[kernels]") {
  for (double p = 1e-12; p < 1.0; p = p < 0.5 ? p * 3.7 : 1.0 - (1.0 - p) / 3.7) {
    const double x = std_normal_quantile(p);
    const double back = std_normal_cdf(x);
    REQUIRE(std::fabs(back - p) <= 1e-9 * p + 1e-15);
  }
  REQUIRE(std::isfinite(std_normal_quantile(1e-300)));
  REQUIRE(std_normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("backend roster always includes the scalar reference", "[kernels]") {
  const auto batches = kernels::available_batches();
  REQUIRE(!batches.empty());
  REQUIRE(std::string(batches.front()->name) == "scalar");
  const std::string active = kernels::active_batch().name;
  bool listed = false;
  for (const kernels::Batch* b : batches) listed |= active == b->name;
  REQUIRE(listed);
}
