#pragma once

// Seeded generators for property and acceptance tests.

#include "nes/game.hpp"
#include "nes/graph.hpp"

#include <cstdint>
#include <random>

namespace nes::testing {

struct RandomGameOptions {
  Index min_players = 2;
  Index max_players = 4;
  Index max_action_dim = 2;
  double coupling_probability = 0.6;
};

/// Symmetric r_i with eigenvalues at least 0.5 and symmetric nonnegative
/// couplings, so the game is strongly monotone with m >= 1.
QuadraticGame random_monotone_game(std::mt19937_64& rng,
                                   const RandomGameOptions& options = {});

/// Random spanning tree plus extra edges; unit weights unless weighted.
CommGraph random_connected_graph(std::mt19937_64& rng, Index nodes,
                                 double extra_edge_probability = 0.3,
                                 bool weighted = false);

Vector random_vector(std::mt19937_64& rng, Index size, double radius);

}  // namespace nes::testing
