#include <cmath>
#include <doctest.h>

#include "orthofuse/stats.hpp"

using namespace orthofuse;

TEST_SUITE("stats") {

TEST_CASE("normal quantile matches published values") {
  CHECK(std::fabs(norm_ppf(0.975) - 1.959964) <= 1e-6 * 1.959964);
  CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(norm_ppf(0.995) == doctest::Approx(2.5758293035489004).epsilon(1e-9));
  CHECK(norm_ppf(0.1) == doctest::Approx(-1.2815515655446004).epsilon(1e-9));
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-6})
    CHECK(norm_cdf(norm_ppf(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("incomplete beta basics") {
  // I_x(1,1) = x
  CHECK(beta_inc(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  // I_x(2,1) = x^2
  CHECK(beta_inc(2, 1, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(beta_inc(3.5, 2.0, 0.4) ==
        doctest::Approx(1.0 - beta_inc(2.0, 3.5, 0.6)).epsilon(1e-12));
}

TEST_CASE("incomplete beta inverse round trip") {
  for (double a : {1.0, 2.5, 7.0, 40.0}) {
    for (double b : {1.0, 3.0, 55.0}) {
      for (double p : {0.005, 0.1, 0.5, 0.9, 0.995}) {
        const double x = beta_inc_inv(a, b, p);
        CHECK(beta_inc(a, b, x) == doctest::Approx(p).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("mean variance median helpers") {
  CHECK(mean({1, 2, 3}) == doctest::Approx(2.0));
  CHECK(variance({1, 2, 3}) == doctest::Approx(2.0 / 3.0));
  CHECK(median({5, 1, 3}) == doctest::Approx(3.0));
  CHECK(median({4, 1, 3, 2}) == doctest::Approx(2.5));
}

}  // TEST_SUITE
