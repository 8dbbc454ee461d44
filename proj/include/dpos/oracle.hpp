#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "dpos/market.hpp"

namespace dpos {

/// Packing LP: max c.x  s.t.  A x <= b,  0 <= x <= upper,  with b >= 0.
/// A is row-major (rows x cols).
struct PackingLp {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;
  std::vector<double> rhs;
  std::vector<double> objective;
  std::vector<double> upper;
};

struct LpSolution {
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

/// Bounded-variable primal simplex started from the all-slack basis.
LpSolution solve_packing_lp(const PackingLp& lp);

enum class OracleMethod { exhaustive, branch_and_bound, lp_upper_bound };

std::string_view to_string(OracleMethod m) noexcept;

struct OracleResult {
  double objective = 0.0;      // welfare of `decisions`, or the LP value for lp_upper_bound
  std::vector<bool> decisions;  // empty for lp_upper_bound
  OracleMethod method = OracleMethod::branch_and_bound;
  bool optimal = false;
  double upper_bound = 0.0;  // LP bound at the root
  std::uint64_t nodes = 0;
};

/// Largest instance the exhaustive path accepts.
inline constexpr std::size_t kExhaustiveLimit = 25;

struct ExactOptions {
  enum class Path { automatic, exhaustive, branch_and_bound };
  Path path = Path::automatic;
  std::uint64_t node_budget = 5'000'000;
};

/// Exact maximizer of the offline welfare problem. With linear costs this is a
/// multidimensional knapsack over adjusted profits v_n - sum_c q_c d_n^c;
/// tenants with non-positive adjusted profit are dropped up front. If the
/// branch-and-bound node budget runs out the best allocation found is
/// returned with optimal = false.
OracleResult offline_exact(const Instance& instance, ExactOptions options = {});

/// Value of the LP relaxation (x in [0, 1]^N). Never below offline_exact.
double lp_upper_bound(const Instance& instance);

}  // namespace dpos
