// Mean service cycle time of an open tandem queue, two ways: the triangular
// closed form and Monte Carlo simulation of the state recursion.

#include <iostream>

#include "tropic/lyapunov.hpp"
#include "tropic/network.hpp"

int main() {
    using namespace tropic;

    CompiledModel tandem = compile(presets::open_tandem({ServiceDistribution::exponential(1.0),
                                                         ServiceDistribution::exponential(2.0),
                                                         ServiceDistribution::exponential(3.0)}),
                                   17);

    std::cout << "state transition matrix A(k):\n";
    const ExprMatrix& a = tandem.delay_matrices[0];
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) std::cout << "  [" << a.at(i, j).to_string() << "]";
        std::cout << "\n";
    }

    auto closed = evaluate_closed_form(tandem.lifted);
    std::cout << "closed form (" << name(closed->method) << "): lambda = " << closed->lambda
              << ", throughput = " << *closed->throughput << "\n";

    MonteCarloOptions opt;
    opt.k = 10000;
    opt.replications = 20;
    LyapunovEstimate mc = estimate_monte_carlo(tandem.lifted, opt);
    std::cout << "monte carlo: lambda = " << mc.lambda << " +- " << mc.std_error << "\n";
    return 0;
}
