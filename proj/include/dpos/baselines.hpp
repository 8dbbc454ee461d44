#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpos/market.hpp"
#include "dpos/protocol.hpp"

namespace dpos {

struct BaselineResult {
  double welfare = 0.0;
  std::vector<bool> accepted;
  std::vector<double> payments;  // empty when the algorithm models none
  std::vector<double> utilization;
  std::size_t rounds = 0;  // SCPA bidding rounds
};

struct GaParams {
  std::size_t population = 100;
  std::size_t generations = 200;
  double mutation_rate = -1.0;  // per bit; negative selects 1/N
  std::size_t tournament = 3;
  std::size_t elitism = 2;
  std::uint64_t seed = 0;
};

/// Genetic search over accept/reject bit strings with uniform crossover.
/// Infeasible children are repaired by dropping accepted tenants in order of
/// increasing adjusted profit per unit of total demand, so every returned
/// allocation is feasible.
BaselineResult ga_heuristic(const Instance& instance, const GaParams& params = {});

/// Auction adaptation: in each round every unallocated tenant with positive
/// surplus v_n - sum_c q_c d_n^c whose demand still fits bids; the MVNO takes
/// the bidder with the largest increment of its own utility (lowest index on
/// ties), who pays its bid v_n. Stops when nobody bids.
BaselineResult scpa_adapted(const Instance& instance);

/// The posted-price session driven by the myopic linear price ramp.
SessionResult myopic_slicing(const Instance& instance, std::span<const std::size_t> order,
                             SessionOptions options = {});

/// Fair coin per arrival; a head is accepted only if the demand still fits.
BaselineResult random_slicing(const Instance& instance, std::span<const std::size_t> order,
                              std::uint64_t seed);

}  // namespace dpos
