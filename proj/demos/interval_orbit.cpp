// Follows one interval under G o Q. The start is given by its leaf and its
// projective coordinate x; x -> x + 1 at each step, so a start with x = -n
// near A crawls round its leaf for about n steps before coming back.
#include <cstdio>
#include <cstdlib>

#include "hyperdyn/scenarios.hpp"

int main(int argc, char** argv) {
    using namespace hyperdyn;
    const double alpha = argc > 1 ? std::atof(argv[1]) : 0.9;
    const double x = argc > 2 ? std::atof(argv[2]) : -20.0;
    const int steps = argc > 3 ? std::atoi(argv[3]) : 40;
    IntervalPoint p = leaf_point(alpha, from_projective_line(x) / two_pi);
    const IntervalPoint whole{0.0, 1.0};
    std::printf("step        a        b   d([a,b],[0,1])\n");
    for (int n = 0; n <= steps; ++n) {
        std::printf("%4d  %7.4f  %7.4f   %.4f\n", n, p.a, p.b, chebyshev(p, whole));
        p = g_map(p);
    }
}
