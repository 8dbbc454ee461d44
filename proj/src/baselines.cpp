#include "dpos/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace dpos {

namespace {

bool fits(const Instance& instance, std::size_t n, const std::vector<double>& load) {
  for (std::size_t c = 0; c < instance.resources(); ++c) {
    if (load[c] + instance.demands(n, c) > 1.0) return false;
  }
  return true;
}

void add_load(const Instance& instance, std::size_t n, std::vector<double>& load, double sign) {
  for (std::size_t c = 0; c < instance.resources(); ++c) load[c] += sign * instance.demands(n, c);
}

BaselineResult finish(const Instance& instance, std::vector<bool> accepted) {
  BaselineResult r;
  Allocation a = make_allocation(instance, accepted);
  r.welfare = social_welfare(instance, a);
  r.utilization = std::move(a.utilization);
  r.accepted = std::move(accepted);
  return r;
}

class Genetic {
public:
  Genetic(const Instance& instance, const GaParams& params)
      : inst_(instance), params_(params), rng_(params.seed) {
    const std::size_t N = inst_.tenants();
    profit_.resize(N);
    for (std::size_t n = 0; n < N; ++n) profit_[n] = adjusted_profit(inst_, n);
    std::vector<double> eff(N);
    for (std::size_t n = 0; n < N; ++n) {
      double load = 0.0;
      for (std::size_t c = 0; c < inst_.resources(); ++c) load += inst_.demands(n, c);
      if (load > 0.0) {
        eff[n] = profit_[n] / load;
      } else {
        eff[n] = profit_[n] > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
      }
    }
    drop_order_.resize(N);
    std::iota(drop_order_.begin(), drop_order_.end(), 0);
    std::stable_sort(drop_order_.begin(), drop_order_.end(),
                     [&](std::size_t a, std::size_t b) { return eff[a] < eff[b]; });
    mutation_ = params.mutation_rate >= 0.0 ? params.mutation_rate
                                            : 1.0 / static_cast<double>(std::max<std::size_t>(N, 1));
  }

  std::vector<bool> run() {
    const std::size_t N = inst_.tenants();
    const std::size_t P = std::max<std::size_t>(params_.population, 2);
    std::vector<Genome> pop(P);
    std::bernoulli_distribution coin(0.5);
    for (auto& g : pop) {
      g.bits.resize(N);
      for (std::size_t n = 0; n < N; ++n) g.bits[n] = coin(rng_) ? 1 : 0;
      evaluate(g);
    }
    std::bernoulli_distribution mutate(mutation_);
    for (std::size_t gen = 0; gen < params_.generations; ++gen) {
      std::sort(pop.begin(), pop.end(), [](const Genome& a, const Genome& b) { return a.fitness > b.fitness; });
      std::vector<Genome> next;
      next.reserve(P);
      for (std::size_t e = 0; e < std::min(params_.elitism, P); ++e) next.push_back(pop[e]);
      while (next.size() < P) {
        const Genome& a = tournament(pop);
        const Genome& b = tournament(pop);
        Genome child;
        child.bits.resize(N);
        for (std::size_t n = 0; n < N; ++n) {
          child.bits[n] = coin(rng_) ? a.bits[n] : b.bits[n];
          if (mutate(rng_)) child.bits[n] ^= 1;
        }
        evaluate(child);
        next.push_back(std::move(child));
      }
      pop = std::move(next);
    }
    const auto best = std::max_element(pop.begin(), pop.end(),
                                       [](const Genome& a, const Genome& b) { return a.fitness < b.fitness; });
    std::vector<bool> out(N);
    for (std::size_t n = 0; n < N; ++n) out[n] = best->bits[n] != 0;
    return out;
  }

private:
  struct Genome {
    std::vector<char> bits;
    double fitness = 0.0;
  };

  const Genome& tournament(const std::vector<Genome>& pop) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Genome* best = &pop[pick(rng_)];
    for (std::size_t t = 1; t < params_.tournament; ++t) {
      const Genome* other = &pop[pick(rng_)];
      if (other->fitness > best->fitness) best = other;
    }
    return *best;
  }

  void evaluate(Genome& g) {
    const std::size_t C = inst_.resources();
    std::vector<double> load(C, 0.0);
    for (std::size_t n = 0; n < g.bits.size(); ++n) {
      if (g.bits[n]) add_load(inst_, n, load, 1.0);
    }
    auto overfull = [&](std::size_t n) {
      for (std::size_t c = 0; c < C; ++c) {
        if (load[c] > 1.0 && inst_.demands(n, c) > 0.0) return true;
      }
      return false;
    };
    bool any_over = std::any_of(load.begin(), load.end(), [](double y) { return y > 1.0; });
    for (std::size_t i = 0; any_over && i < drop_order_.size(); ++i) {
      const std::size_t n = drop_order_[i];
      if (!g.bits[n] || !overfull(n)) continue;
      g.bits[n] = 0;
      add_load(inst_, n, load, -1.0);
      any_over = std::any_of(load.begin(), load.end(), [](double y) { return y > 1.0; });
    }
    g.fitness = 0.0;
    for (std::size_t n = 0; n < g.bits.size(); ++n) {
      if (g.bits[n]) g.fitness += profit_[n];
    }
  }

  const Instance& inst_;
  GaParams params_;
  std::mt19937_64 rng_;
  std::vector<double> profit_;
  std::vector<std::size_t> drop_order_;
  double mutation_ = 0.0;
};

}  // namespace

BaselineResult ga_heuristic(const Instance& instance, const GaParams& params) {
  if (instance.tenants() == 0) return finish(instance, {});
  Genetic ga(instance, params);
  return finish(instance, ga.run());
}

BaselineResult scpa_adapted(const Instance& instance) {
  const std::size_t N = instance.tenants();
  std::vector<double> surplus(N);
  for (std::size_t n = 0; n < N; ++n) surplus[n] = adjusted_profit(instance, n);

  std::vector<bool> accepted(N, false);
  std::vector<double> payments(N, 0.0);
  std::vector<double> load(instance.resources(), 0.0);
  std::size_t rounds = 0;
  for (;;) {
    std::size_t winner = N;
    for (std::size_t n = 0; n < N; ++n) {
      if (accepted[n] || !(surplus[n] > 0.0) || !fits(instance, n, load)) continue;
      if (winner == N || surplus[n] > surplus[winner]) winner = n;
    }
    if (winner == N) break;
    ++rounds;
    accepted[winner] = true;
    payments[winner] = instance.valuations[winner];
    add_load(instance, winner, load, 1.0);
  }
  BaselineResult r = finish(instance, std::move(accepted));
  r.payments = std::move(payments);
  r.rounds = rounds;
  return r;
}

SessionResult myopic_slicing(const Instance& instance, std::span<const std::size_t> order,
                             SessionOptions options) {
  MyopicPricing rule(instance.market);
  return run_session(instance, rule, order, options);
}

BaselineResult random_slicing(const Instance& instance, std::span<const std::size_t> order,
                              std::uint64_t seed) {
  const std::size_t N = instance.tenants();
  if (order.size() != N) throw Error(Errc::invalid_argument, "arrival order must cover every tenant");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<bool> accepted(N, false);
  std::vector<double> load(instance.resources(), 0.0);
  for (std::size_t n : order) {
    if (n >= N) throw Error(Errc::invalid_argument, "arrival order is not a permutation");
    if (!coin(rng)) continue;
    if (!fits(instance, n, load)) continue;
    accepted[n] = true;
    add_load(instance, n, load, 1.0);
  }
  return finish(instance, std::move(accepted));
}

}  // namespace dpos
