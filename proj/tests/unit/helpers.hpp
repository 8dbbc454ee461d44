#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpos/error.hpp"
#include "dpos/market.hpp"

namespace testing {

/// Code of the dpos::Error thrown by fn, or nullopt if nothing was thrown.
template <class Fn>
std::optional<dpos::Errc> error_code(Fn&& fn) {
  try {
    fn();
  } catch (const dpos::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

template <class Fn>
std::string error_message(Fn&& fn) {
  try {
    fn();
  } catch (const dpos::Error& e) {
    return e.what();
  }
  return {};
}

inline dpos::MarketSetup setup(std::vector<double> q, std::vector<double> lower, std::vector<double> upper) {
  return {std::move(q), std::move(lower), std::move(upper)};
}

/// q=1, lower=2, upper=1+e: threshold exactly 1/2.
inline dpos::MarketSetup e1_setup() { return setup({1.0}, {2.0}, {1.0 + 2.718281828459045}); }

/// q=(0.5,0.5), lower=(1,2), upper=(2,3).
inline dpos::MarketSetup e2_setup() { return setup({0.5, 0.5}, {1.0, 2.0}, {2.0, 3.0}); }

inline dpos::Instance instance(dpos::MarketSetup market, std::vector<std::vector<double>> rows,
                               std::vector<double> valuations) {
  const std::size_t C = market.resource_count();
  dpos::DemandMatrix d(rows.size(), C);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t c = 0; c < C; ++c) d(n, c) = rows[n][c];
  }
  return {std::move(market), std::move(d), std::move(valuations)};
}

/// Two tenants on one resource: d=(0.6, 0.6), v=(1.2, 1.5), q=0.5.
inline dpos::Instance two_tenant() {
  return instance(setup({0.5}, {1.9}, {2.6}), {{0.6}, {0.6}}, {1.2, 1.5});
}

}  // namespace testing
