// The decomposition method on a blocked tandem: factor A(k) = B(k) C(k),
// check that C B is triangular with independent factors, and read the cycle
// time off the trace of E[C(1) B(2)].

#include <iostream>

#include "tropic/lyapunov.hpp"
#include "tropic/network.hpp"
#include "tropic/structure.hpp"

namespace {

void print(const char* label, const tropic::ExprMatrix& m) {
    std::cout << label << "\n";
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) std::cout << "  [" << m.at(i, j).to_string() << "]";
        std::cout << "\n";
    }
}

} // namespace

int main() {
    using namespace tropic;

    // three machines in line, no space behind the last one
    CompiledModel line = compile(
        presets::blocked_tandem({ServiceDistribution::exponential(1.0),
                                 ServiceDistribution::exponential(1.0),
                                 ServiceDistribution::exponential(1.0)},
                                {std::nullopt, std::nullopt, Count{0}},
                                Blocking::manufacturing),
        17);
    print("A(k):", line.delay_matrices[0]);

    auto candidates = sym_skeleton_candidates(line.delay_matrices[0]);
    for (const SymSkeleton& d : candidates) {
        bool indep = line.lifted.independent_leaf_sets(d.b.leaves(), d.c.leaves());
        std::cout << "\nskeleton via " << (d.from_rows ? "rows" : "columns")
                  << ", independent factors: " << (indep ? "yes" : "no") << "\n";
        print("B(k):", d.b);
        print("C(k):", d.c);
        print("C(k) B(k):", mat_mul(d.c, d.b));
    }

    auto est = evaluate_by_decomposition(line.lifted);
    std::cout << "\ndecomposition method: lambda = " << est->lambda << " ("
              << name(est->method) << ")\n";

    MonteCarloOptions opt;
    opt.k = 10000;
    opt.replications = 20;
    LyapunovEstimate mc = estimate_monte_carlo(line.lifted, opt);
    std::cout << "monte carlo: lambda = " << mc.lambda << " +- " << mc.std_error << "\n";
    return 0;
}
