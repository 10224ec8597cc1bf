#include "random_problems.hpp"

#include <algorithm>
#include <numeric>

namespace nes::testing {

Vector random_vector(std::mt19937_64& rng, Index size, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vector v(size);
  for (Index k = 0; k < size; ++k) v(k) = u(rng);
  return v;
}

QuadraticGame random_monotone_game(std::mt19937_64& rng,
                                   const RandomGameOptions& o) {
  std::uniform_int_distribution<Index> players(o.min_players, o.max_players);
  std::uniform_int_distribution<Index> dims(1, o.max_action_dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index n = players(rng);
  const Index p = dims(rng);

  QuadraticParams params;
  for (Index i = 0; i < n; ++i) {
    const Matrix b = random_vector(rng, p * p, 0.6).reshaped(p, p);
    params.r.push_back(b * b.transpose() + 0.5 * Matrix::Identity(p, p));
    params.linear.push_back(random_vector(rng, p, 3.0));
    params.offset.push_back(5.0 * unit(rng));
  }
  params.coupling = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (unit(rng) < o.coupling_probability)
        params.coupling(i, j) = params.coupling(j, i) = 0.2 + 0.8 * unit(rng);
  return QuadraticGame(std::move(params));
}

CommGraph random_connected_graph(std::mt19937_64& rng, Index nodes,
                                 double extra, bool weighted) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto weight = [&] { return weighted ? 0.5 + unit(rng) : 1.0; };
  std::vector<Index> order(static_cast<std::size_t>(nodes));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  Matrix a = Matrix::Zero(nodes, nodes);
  for (Index k = 1; k < nodes; ++k) {
    std::uniform_int_distribution<Index> pick(0, k - 1);
    const Index i = order[static_cast<std::size_t>(k)];
    const Index j = order[static_cast<std::size_t>(pick(rng))];
    a(i, j) = a(j, i) = weight();
  }
  for (Index i = 0; i < nodes; ++i)
    for (Index j = i + 1; j < nodes; ++j)
      if (a(i, j) == 0.0 && unit(rng) < extra) a(i, j) = a(j, i) = weight();
  return CommGraph(a);
}

}  // namespace nes::testing
