#include "dpos/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dpos {

std::string_view to_string(OracleMethod m) noexcept {
  switch (m) {
    case OracleMethod::exhaustive: return "exhaustive";
    case OracleMethod::branch_and_bound: return "branch-and-bound";
    case OracleMethod::lp_upper_bound: return "lp-upper-bound";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotEps = 1e-12;
constexpr double kCostEps = 1e-12;
// Capacity slack shared by the exhaustive and branch-and-bound paths so that
// both agree on borderline subsets.
constexpr double kCapacityTol = 1e-12;

}  // namespace

LpSolution solve_packing_lp(const PackingLp& lp) {
  const std::size_t m = lp.rows;
  const std::size_t n = lp.cols;
  if (lp.matrix.size() != m * n || lp.rhs.size() != m || lp.objective.size() != n ||
      lp.upper.size() != n) {
    throw Error(Errc::invalid_argument, "packing LP dimensions are inconsistent");
  }
  for (double b : lp.rhs) {
    if (!(b >= 0.0)) throw Error(Errc::invalid_argument, "packing LP needs b >= 0");
  }

  LpSolution sol;
  sol.x.assign(n, 0.0);
  if (n == 0) return sol;

  const std::size_t width = n + m;  // structural columns then slacks
  std::vector<double> tab(m * width, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab[i * width + j] = lp.matrix[i * n + j];
    tab[i * width + n + i] = 1.0;
  }
  std::vector<double> reduced(width, 0.0);
  std::copy(lp.objective.begin(), lp.objective.end(), reduced.begin());
  std::vector<double> upper(width, kInf);
  std::copy(lp.upper.begin(), lp.upper.end(), upper.begin());

  std::vector<double> beta = lp.rhs;  // values of basic variables
  std::vector<std::size_t> basis(m);
  std::iota(basis.begin(), basis.end(), n);
  std::vector<char> is_basic(width, 0);
  for (std::size_t i = 0; i < m; ++i) is_basic[n + i] = 1;
  std::vector<char> at_upper(width, 0);

  const std::size_t max_iter = 50 * (width + 1) + 1000;
  std::size_t degenerate_run = 0;
  for (sol.iterations = 0;; ++sol.iterations) {
    if (sol.iterations > max_iter) throw Error(Errc::internal, "simplex iteration limit reached");

    // Dantzig pricing; Bland's smallest-index rule while stalling.
    const bool bland = degenerate_run > 2 * width;
    std::size_t enter = width;
    double best = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      if (is_basic[j]) continue;
      const double gain = at_upper[j] ? -reduced[j] : reduced[j];
      if (gain > kCostEps && (gain > best || bland)) {
        enter = j;
        best = gain;
        if (bland) break;
      }
    }
    if (enter == width) break;

    const double dir = at_upper[enter] ? -1.0 : 1.0;
    double step = upper[enter];
    std::size_t leave_row = m;  // m means bound flip
    bool leave_to_upper = false;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = dir * tab[i * width + enter];
      double limit = kInf;
      bool to_upper = false;
      if (a > kPivotEps) {
        limit = std::max(0.0, beta[i]) / a;
      } else if (a < -kPivotEps && upper[basis[i]] < kInf) {
        limit = std::max(0.0, upper[basis[i]] - beta[i]) / -a;
        to_upper = true;
      } else {
        continue;
      }
      if (limit < step || (limit == step && leave_row < m && basis[i] < basis[leave_row])) {
        step = limit;
        leave_row = i;
        leave_to_upper = to_upper;
      }
    }
    if (step == kInf) throw Error(Errc::internal, "packing LP reported unbounded");
    degenerate_run = step <= 0.0 ? degenerate_run + 1 : 0;

    for (std::size_t i = 0; i < m; ++i) beta[i] -= dir * step * tab[i * width + enter];

    if (leave_row == m) {
      at_upper[enter] = !at_upper[enter];
      continue;
    }

    const double entering_value = (at_upper[enter] ? upper[enter] : 0.0) + dir * step;
    const std::size_t leaving = basis[leave_row];
    is_basic[leaving] = 0;
    at_upper[leaving] = leave_to_upper ? 1 : 0;
    is_basic[enter] = 1;
    at_upper[enter] = 0;
    basis[leave_row] = enter;
    beta[leave_row] = entering_value;

    double* prow = &tab[leave_row * width];
    const double piv = prow[enter];
    for (std::size_t j = 0; j < width; ++j) prow[j] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave_row) continue;
      double* row = &tab[i * width];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) row[j] -= f * prow[j];
    }
    const double f = reduced[enter];
    for (std::size_t j = 0; j < width; ++j) reduced[j] -= f * prow[j];
  }

  for (std::size_t j = 0; j < n; ++j) {
    if (!is_basic[j] && at_upper[j]) sol.x[j] = upper[j];
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) sol.x[basis[i]] = std::clamp(beta[i], 0.0, upper[basis[i]]);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
  return sol;
}

namespace {

struct Items {
  std::size_t resources = 0;
  std::vector<std::size_t> tenant;  // original index
  std::vector<double> profit;
  std::vector<double> demand;  // row-major items x resources
};

Items positive_items(const Instance& instance, bool drop_oversized) {
  Items items;
  items.resources = instance.resources();
  for (std::size_t n = 0; n < instance.tenants(); ++n) {
    const double a = adjusted_profit(instance, n);
    if (!(a > 0.0)) continue;
    bool fits = true;
    for (std::size_t c = 0; c < items.resources; ++c) {
      if (instance.demands(n, c) > 1.0 + kCapacityTol) fits = false;
    }
    if (drop_oversized && !fits) continue;
    items.tenant.push_back(n);
    items.profit.push_back(a);
    const auto row = instance.demands.row(n);
    items.demand.insert(items.demand.end(), row.begin(), row.end());
  }
  return items;
}

double lp_bound(const Items& items, std::size_t from, const std::vector<double>& capacity) {
  const std::size_t C = items.resources;
  const std::size_t k = items.tenant.size() - from;
  if (k == 0) return 0.0;
  PackingLp lp;
  lp.rows = C;
  lp.cols = k;
  lp.matrix.resize(C * k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < C; ++c) lp.matrix[c * k + j] = items.demand[(from + j) * C + c];
  }
  lp.rhs.resize(C);
  for (std::size_t c = 0; c < C; ++c) lp.rhs[c] = std::max(0.0, capacity[c]);
  lp.objective.assign(items.profit.begin() + static_cast<std::ptrdiff_t>(from), items.profit.end());
  lp.upper.assign(k, 1.0);
  return solve_packing_lp(lp).objective;
}

class BranchAndBound {
public:
  BranchAndBound(Items items, std::uint64_t budget) : items_(std::move(items)), budget_(budget) {
    const std::size_t k = items_.tenant.size();
    suffix_profit_.assign(k + 1, 0.0);
    for (std::size_t i = k; i-- > 0;) suffix_profit_[i] = suffix_profit_[i + 1] + items_.profit[i];
    chosen_.assign(k, 0);
    best_choice_.assign(k, 0);
  }

  void run() {
    std::vector<double> cap(items_.resources, 1.0);
    visit(0, 0.0, cap);
  }

  bool exhausted() const { return exhausted_; }
  std::uint64_t nodes() const { return nodes_; }
  const std::vector<char>& best() const { return best_choice_; }

private:
  void visit(std::size_t depth, double value, std::vector<double>& cap) {
    if (exhausted_) return;
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return;
    }
    if (value > best_value_) {
      best_value_ = value;
      best_choice_ = chosen_;
    }
    const std::size_t k = items_.tenant.size();
    if (depth == k) return;
    if (value + suffix_profit_[depth] <= best_value_ + 1e-12) return;
    if (value + lp_bound(items_, depth, cap) <= best_value_ + 1e-12) return;

    const std::size_t C = items_.resources;
    const double* d = &items_.demand[depth * C];
    bool fits = true;
    for (std::size_t c = 0; c < C; ++c) {
      if (d[c] > cap[c] + kCapacityTol) fits = false;
    }
    if (fits) {
      for (std::size_t c = 0; c < C; ++c) cap[c] -= d[c];
      chosen_[depth] = 1;
      visit(depth + 1, value + items_.profit[depth], cap);
      chosen_[depth] = 0;
      for (std::size_t c = 0; c < C; ++c) cap[c] += d[c];
    }
    visit(depth + 1, value, cap);
  }

  Items items_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
  std::vector<double> suffix_profit_;
  std::vector<char> chosen_;
  std::vector<char> best_choice_;
  double best_value_ = 0.0;
};

Items sort_by_efficiency(Items items) {
  const std::size_t k = items.tenant.size();
  const std::size_t C = items.resources;
  std::vector<double> eff(k);
  for (std::size_t i = 0; i < k; ++i) {
    double load = 0.0;
    for (std::size_t c = 0; c < C; ++c) load += items.demand[i * C + c];
    eff[i] = load > 0.0 ? items.profit[i] / load : kInf;
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return eff[a] > eff[b]; });
  Items out;
  out.resources = C;
  for (std::size_t i : perm) {
    out.tenant.push_back(items.tenant[i]);
    out.profit.push_back(items.profit[i]);
    out.demand.insert(out.demand.end(), items.demand.begin() + static_cast<std::ptrdiff_t>(i * C),
                      items.demand.begin() + static_cast<std::ptrdiff_t>((i + 1) * C));
  }
  return out;
}

std::vector<char> exhaustive_search(const Items& items) {
  const std::size_t k = items.tenant.size();
  const std::size_t C = items.resources;
  std::vector<char> in(k, 0), best(k, 0);
  std::vector<double> load(C, 0.0);
  double value = 0.0, best_value = 0.0;
  const std::uint64_t total = std::uint64_t{1} << k;
  // Gray-code walk: each step toggles exactly one item.
  for (std::uint64_t g = 1; g < total; ++g) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(g));
    const double sign = in[bit] ? -1.0 : 1.0;
    in[bit] = static_cast<char>(!in[bit]);
    value += sign * items.profit[bit];
    for (std::size_t c = 0; c < C; ++c) load[c] += sign * items.demand[bit * C + c];
    if (value <= best_value) continue;
    bool feasible = true;
    for (std::size_t c = 0; c < C; ++c) {
      if (load[c] > 1.0 + kCapacityTol) {
        feasible = false;
        break;
      }
    }
    if (feasible) {
      best_value = value;
      best = in;
    }
  }
  return best;
}

}  // namespace

OracleResult offline_exact(const Instance& instance, ExactOptions options) {
  const std::size_t N = instance.tenants();
  Items items = sort_by_efficiency(positive_items(instance, true));
  OracleResult r;
  r.upper_bound = lp_upper_bound(instance);

  bool use_exhaustive = options.path == ExactOptions::Path::exhaustive;
  if (options.path == ExactOptions::Path::automatic) use_exhaustive = items.tenant.size() <= 16;
  if (options.path == ExactOptions::Path::exhaustive && N > kExhaustiveLimit) {
    throw Error(Errc::invalid_argument, "exhaustive oracle limited to N <= " +
                                            std::to_string(kExhaustiveLimit));
  }

  std::vector<char> pick;
  if (use_exhaustive) {
    pick = exhaustive_search(items);
    r.method = OracleMethod::exhaustive;
    r.optimal = true;
    r.nodes = std::uint64_t{1} << items.tenant.size();
  } else {
    BranchAndBound bnb(items, options.node_budget);
    bnb.run();
    pick = bnb.best();
    r.method = OracleMethod::branch_and_bound;
    r.optimal = !bnb.exhausted();
    r.nodes = bnb.nodes();
  }

  r.decisions.assign(N, false);
  for (std::size_t i = 0; i < pick.size(); ++i) {
    if (pick[i]) r.decisions[items.tenant[i]] = true;
  }
  Allocation a = make_allocation(instance, r.decisions);
  r.objective = social_welfare(instance, a);
  return r;
}

double lp_upper_bound(const Instance& instance) {
  Items items = positive_items(instance, false);
  return lp_bound(items, 0, std::vector<double>(instance.resources(), 1.0));
}

}  // namespace dpos
