// An observer learns a constant-plus-sinusoid disturbance from its samples.

#include <cmath>
#include <cstdio>

#include "palloc/observer.hpp"
#include "palloc/sim.hpp"

int main() {
  const auto exo = palloc::build_exosystem({3.0});
  const auto gain = palloc::design_gain(exo, palloc::default_poles(exo.dim()));
  std::printf("L = [%.4f, %.4f, %.4f], spectral abscissa %.3f\n", gain.L(0), gain.L(1), gain.L(2),
              gain.spectral_abscissa);

  palloc::DisturbanceSchedule d{2.0, {3.0}, {0.8}, {0.5}, 0.0};
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(exo.dim());
  const double dt = 1e-3;
  std::printf("\n%6s %10s %10s %12s %12s\n", "t", "d(t)", "D eta", "constant", "D_eps eta");
  for (int k = 0; k <= 3000; ++k) {
    const double t = k * dt;
    if (k % 250 == 0) {
      std::printf("%6.2f %10.4f %10.4f %12.4f %12.4f\n", t, palloc::disturbance_value(d, t), (exo.D() * eta)(0),
                  eta(0), (exo.D_eps() * eta)(0));
    }
    const auto f = [&](double tau, const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return gain.closed_loop * x + gain.L * palloc::disturbance_value(d, tau);
    };
    eta = palloc::rk4_step<Eigen::VectorXd>(f, t, eta, dt);
  }
}
