// Propagates a Gaussian packet in a cosine potential with the product
// formula and prints its error against the dense spectral solution.

#include <cstdio>

#include "qfey/qfey.hpp"

int main() {
    using namespace qfey;
    const Grid grid = make_grid(-20.0, 20.0, 256);
    const Potential v = make_potential({PotentialTag::cosine, 1.0, 1.0}, grid);
    const WaveFunction f = gaussian_packet(0.0, 2.0, 1.0, grid);
    const double a = 1.0, t = 0.5;

    const TangentFamily heat = family_heat_gauss(v, grid);
    const WaveFunction exact = SpectralOracle(oracle_generator(heat.generator())).group(a, t, f);

    std::printf("heat-gauss family, t = 0.5\n%6s %14s %14s\n", "n", "plain", "3-point");
    const TangentFamily three = three_point_family(heat);
    for (int n : {1, 2, 4, 8, 16, 32, 64}) {
        const double e1 = l2_distance(evolve_schrodinger(heat, {a, t, n}, f), exact);
        const double e3 = l2_distance(evolve_schrodinger(three, {a, t, n}, f), exact);
        std::printf("%6d %14.6e %14.6e\n", n, e1, e3);
    }

    // the biharmonic family converges to its own group e^{iat(-(d^2)^2 - V)}
    const TangentFamily bi = family_polyharmonic(v, 2, grid);
    const WaveFunction bi_exact = SpectralOracle(oracle_generator(bi.generator())).group(a, 0.05, f);
    std::printf("\nbiharmonic family, t = 0.05\n%6s %14s\n", "n", "error");
    for (int n : {1, 4, 16, 64})
        std::printf("%6d %14.6e\n", n, l2_distance(evolve_schrodinger(bi, {a, 0.05, n}, f), bi_exact));
    return 0;
}
