// Four warehouses rebalance inventory to the cost-optimal split of total demand.

#include <cmath>
#include <cstdio>

#include "palloc/experiment.hpp"
#include "palloc/sim.hpp"

int main() {
  const palloc::SimConfig cfg = palloc::inventory_preset(1);
  const palloc::Trajectory tr = palloc::integrate(cfg);

  std::printf("oracle optimum:");
  for (double y : tr.oracle.y_star) std::printf(" %.4f", y);
  std::printf("  (lambda0 %.4f)\n\n", tr.oracle.lambda0);

  std::printf("%8s %9s %9s %9s %9s %11s\n", "t", "I1", "I2", "I3", "I4", "err_opt");
  for (const auto& s : tr.samples) {
    const bool show = s.t < 10.0 ? std::fmod(s.t + 1e-9, 1.0) < 1e-6 : std::fmod(s.t + 1e-9, 10.0) < 1e-6;
    if (!show && &s != &tr.samples.back()) continue;
    std::printf("%8.2f", s.t);
    for (const auto& a : s.agents) std::printf(" %9.4f", a.y);
    std::printf(" %11.3e\n", s.err_opt);
  }
}
