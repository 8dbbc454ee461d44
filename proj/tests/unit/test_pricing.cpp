#include <doctest.h>

#include <cmath>
#include <random>

#include "dpos/pricing.hpp"
#include "helpers.hpp"

using namespace dpos;
using testing::error_code;

namespace {

constexpr double kE = 2.718281828459045;

// Closed forms evaluated in long double, independent of the library.
long double threshold_ld(const MarketSetup& m, std::size_t c) {
  long double headroom = 0.0L;
  for (std::size_t k = 0; k < m.resource_count(); ++k) {
    headroom += static_cast<long double>(m.upper_bounds[k]) - m.cost_coeffs[k];
  }
  return 1.0L / (1.0L + std::log(headroom / (static_cast<long double>(m.lower_bounds[c]) - m.cost_coeffs[c])));
}

MarketSetup random_setup(std::mt19937_64& rng, std::size_t C) {
  std::uniform_real_distribution<double> q(0.05, 2.0), gap(0.05, 3.0), spread(0.0, 10.0);
  MarketSetup m;
  for (std::size_t c = 0; c < C; ++c) {
    m.cost_coeffs.push_back(q(rng));
    m.lower_bounds.push_back(m.cost_coeffs.back() + gap(rng));
    m.upper_bounds.push_back(m.lower_bounds.back() + spread(rng));
  }
  return m;
}

}  // namespace

TEST_CASE("single resource with threshold one half") {
  const PricingSchedule s(testing::e1_setup());
  CHECK(std::abs(s.threshold(0) - 0.5) < 1e-12);
  CHECK(std::abs(s.competitive_ratio() - 2.0) < 1e-12);
  CHECK(s.price_at(0, 0.0).value() == 2.0);
  CHECK(s.price_at(0, 0.25).value() == 2.0);
  CHECK(s.price_at(0, 0.75).value() == doctest::Approx(1.0 + std::exp(0.5)).epsilon(1e-12));
  CHECK(s.price_at(0, 0.75).value() == doctest::Approx(2.6487213).epsilon(1e-7));
  CHECK(std::abs(s.price_at(0, 1.0).value() - (1.0 + kE)) < 1e-12);
  CHECK(s.price_at(0, 1.0 + 1e-9).is_pos_inf());
}

TEST_CASE("two resources") {
  const MarketSetup m = testing::e2_setup();
  const PricingSchedule s(m);
  CHECK(s.threshold(0) == doctest::Approx(0.3247341).epsilon(1e-7));
  CHECK(s.threshold(1) == doctest::Approx(0.5048392).epsilon(1e-7));
  CHECK(s.competitive_ratio() == doctest::Approx(3.0794415).epsilon(1e-7));
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(std::abs(s.threshold(c) - static_cast<double>(threshold_ld(m, c))) < 1e-15);
  }
  CHECK(s.price_at(0, 0.0).value() == 1.0);
  CHECK(s.price_at(1, 0.0).value() == 2.0);
}

TEST_CASE("precondition errors") {
  const std::string msg = testing::error_message([] { PricingSchedule s(testing::setup({2.0}, {2.0}, {3.0})); });
  CHECK(msg.find("q_c < p_lower_c violated") != std::string::npos);
  const PricingSchedule s(testing::e1_setup());
  CHECK(error_code([&] { (void)s.price_at(0, -0.1); }) == Errc::invalid_argument);
  CHECK(error_code([&] { (void)s.price_at(1, 0.5); }) == Errc::invalid_resource);
}

TEST_CASE("degenerate equal bounds need no special case") {
  const PricingSchedule s(testing::setup({1.0, 1.0}, {2.0, 2.0}, {2.0, 2.0}));
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(s.threshold(c) > 0.0);
    CHECK(s.threshold(c) < 1.0);
  }
  const PricingSchedule one(testing::setup({1.0}, {2.0}, {2.0}));
  CHECK(one.threshold(0) == 1.0);
  CHECK(one.competitive_ratio() == 1.0);
}

TEST_CASE("schedule properties on random setups") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t C = 1 + trial % 9;
    const MarketSetup m = random_setup(rng, C);
    const PricingSchedule s(m);
    double upper_sum = 0.0, cost_sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) upper_sum += m.upper_bounds[c], cost_sum += m.cost_coeffs[c];

    double max_inv = 1.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double w = s.threshold(c);
      max_inv = std::max(max_inv, 1.0 / w);
      CHECK(s.price_at(c, 0.0).value() == m.lower_bounds[c]);
      // Continuous at the threshold.
      CHECK(s.price_at(c, w).value() == doctest::Approx(m.lower_bounds[c]).epsilon(1e-12));
      // Terminal identity.
      const double terminal = upper_sum - (cost_sum - m.cost_coeffs[c]);
      CHECK(s.price_at(c, 1.0).value() == doctest::Approx(terminal).epsilon(1e-9));

      double prev = s.price_at(c, 0.0).value();
      for (int i = 1; i <= 400; ++i) {
        const double y = i / 400.0;
        const double p = s.price_at(c, y).value();
        CHECK(p >= prev);
        CHECK(p >= m.lower_bounds[c]);
        CHECK(p <= s.price_at(c, 1.0).value() * (1.0 + 1e-15));
        prev = p;
        // On the exponential segment the price satisfies phi' = (phi - q) / w,
        // the growth condition with equality. Central difference check.
        if (y > w + 1e-3 && y < 1.0 - 1e-3) {
          const double h = 1e-6;
          const double slope = (s.price_at(c, y + h).value() - s.price_at(c, y - h).value()) / (2 * h);
          CHECK(slope == doctest::Approx((p - m.cost_coeffs[c]) / w).epsilon(1e-5));
        }
      }
    }
    CHECK(s.competitive_ratio() == doctest::Approx(max_inv));
    CHECK(s.competitive_ratio() >= 1.0);
  }
}

TEST_CASE("myopic ramp") {
  const MarketSetup m = testing::setup({0.5, 0.5, 0.5}, {1.0, 2.0, 3.0}, {2.0, 4.0, 6.0});
  const MyopicPricing ramp(m);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(ramp.price_at(c, 0.0).value() == 0.0);
    const double top = (m.lower_bounds[c] + m.upper_bounds[c]) / 3.0;
    CHECK(ramp.price_at(c, 1.0).value() == doctest::Approx(top));
    CHECK(ramp.price_at(c, 0.999).value() == doctest::Approx(0.999 * top));
    CHECK(ramp.price_at(c, 1.001).is_pos_inf());
  }
}
