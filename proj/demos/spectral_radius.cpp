// Spectral radius of a fixed max-plus matrix, cross-checked by simulating
// the growth rate of its powers.

#include <iostream>

#include "tropic/io.hpp"
#include "tropic/lyapunov.hpp"

int main() {
    using namespace tropic;

    Matrix a = parse_matrix(
        "1    3 -inf\n"
        "0    2    5\n"
        "-inf 4    1\n");
    std::cout << "A =\n" << render_matrix(a);

    Scalar rho = spectral_radius(a);
    std::cout << "rho(A) = " << to_string(rho) << "  (maximum cycle mean)\n";

    RandomMatrixProcess p(ExprMatrix::from_matrix(a),
                          {ServiceDistribution::deterministic(0.0)}, 17);
    MonteCarloOptions opt;
    opt.k = 5000;
    opt.replications = 2;
    LyapunovEstimate est = estimate_monte_carlo(p, opt);
    std::cout << "||A^k||^(1/k) at k=5000: " << est.lambda << "\n";
    return 0;
}
