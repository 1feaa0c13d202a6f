// Prints the polyharmonic heat-type kernel l(t, y) from its residue closed
// form next to direct quadrature of the Fourier integral.

#include <cstdio>

#include "qfey/qfey.hpp"

int main() {
    using namespace qfey;
    std::printf("%3s %6s %6s %22s %22s\n", "N", "t", "y", "closed form", "quadrature");
    for (int order : {2, 3, 4}) {
        const PolyharmonicParams p = make_polyharmonic_params(order);
        for (double y : {0.0, 0.5, 1.0, 2.0, 5.0})
            std::printf("%3d %6.2f %6.2f %22.15e %22.15e\n", order, 1.0, y, polyharmonic_kernel(1.0, y, p),
                        polyharmonic_kernel_quadrature(1.0, y, order));
    }
    return 0;
}
