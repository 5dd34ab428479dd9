#pragma once

#include <optional>

namespace critperc {

/// Site percolation thresholds of Z^d from published Monte Carlo studies.
/// These are external simulation estimates used only as default values of p;
/// nothing in the library derives them.
///   d=2: 0.592746   (Newman & Ziff, PRL 85, 2000; square lattice)
///   d=3: 0.3116077  (Wang, Zhou, Zhang, Garoni, Deng, PRE 87, 2013)
///   d=4: 0.1968861  (Mertens & Moore, PRE 98, 2018)
///   d=5: 0.1407966  (Mertens & Moore, PRE 98, 2018)
///   d=6: 0.1090178  (Mertens & Moore, PRE 98, 2018)
inline std::optional<double> literature_pc(int d) {
  switch (d) {
    case 2: return 0.592746;
    case 3: return 0.3116077;
    case 4: return 0.1968861;
    case 5: return 0.1407966;
    case 6: return 0.1090178;
    default: return std::nullopt;
  }
}

}  // namespace critperc
