#include "bfmcmc/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace bfmcmc {
namespace {

// Marsaglia-Tsang ziggurat, 128 layers, rebuilt in double precision at load.
// r is the start of the tail layer, v the common layer area.
struct ZigTables {
    std::uint32_t kn[128];
    double wn[128];
    double fn[128];

    ZigTables() {
        const double m1 = 2147483648.0;  // 2^31
        double dn = 3.442619855899;
        double tn = dn;
        const double vn = 9.91256303526217e-3;
        const double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

const ZigTables zig;

constexpr double kTailStart = 3.442619855899;

}  // namespace

double RngStream::normal() {
    for (;;) {
        const std::int32_t hz = static_cast<std::int32_t>(next_u32());
        const int iz = hz & 127;
        if (static_cast<std::uint32_t>(std::abs(static_cast<std::int64_t>(hz))) < zig.kn[iz])
            return hz * zig.wn[iz];

        if (iz == 0) {
            // Tail beyond r, Marsaglia's exact method.
            double x, y;
            do {
                x = -std::log(uniform_pos()) / kTailStart;
                y = -std::log(uniform_pos());
            } while (y + y < x * x);
            return (hz > 0) ? kTailStart + x : -(kTailStart + x);
        }

        const double x = hz * zig.wn[iz];
        if (zig.fn[iz] + uniform() * (zig.fn[iz - 1] - zig.fn[iz]) < std::exp(-0.5 * x * x))
            return x;
        // fell through the wedge: redraw
    }
}

}  // namespace bfmcmc
