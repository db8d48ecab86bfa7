// Rotation plus identity on the plane: each starting radius keeps its own
// circle, so the limits never merge.
#include <cstdio>

#include "hyperdyn/scenarios.hpp"

int main() {
    using namespace hyperdyn;
    const std::vector<double> radii{0.5, 1.0, 2.0};
    const auto demo = planar_rotation_window(radii, 2000, 0.01);
    std::printf("radius  points\n");
    for (std::size_t i = 0; i < radii.size(); ++i) std::printf("%6.2f  %zu\n", radii[i], demo.limits[i].size());
    std::printf("\npairwise Hausdorff distance between limits\n");
    for (const auto& row : demo.spread) {
        for (double d : row) std::printf(" %7.4f", d);
        std::printf("\n");
    }
}
