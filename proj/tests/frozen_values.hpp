#pragma once

// Values produced by tests/oracles/het1_oracle.py (dense eigensolves, damped Newton,
// brute-force r-grid minimisation) on the HET1 cell at resolution 128. Regenerate with
//   python3 tests/oracles/het1_oracle.py
// and paste the output here.

#include <array>

namespace frozen {

inline constexpr int resolution = 128;

inline constexpr double lambda1 = -1.00316670053872;
inline constexpr double k_at_1 = -2.00287552267716;

// k(rho) for rho = 0.15 j, j = 1..20
inline constexpr std::array<double, 20> k_rho{
    -1.02565950216458, -1.09313810186851, -1.20560307180661, -1.36305532307528,
    -1.56549604890365, -1.81292665322211, -2.10534867388596, -2.44276370668731,
    -2.82517333692425, -3.25257908196793, -3.72498234734848, -4.24238439673466,
    -4.80478633499344, -5.4121891019734,  -6.06459347537548, -6.76200007983351,
    -7.50440940018011, -8.29182179716789, -9.1242375242414,  -10.0016567433604};

// Fields at x = 0, 1/4, 1/2 (grid indices 0, 32, 64).
inline constexpr std::array<int, 3> probe{0, 32, 64};
inline constexpr std::array<double, 3> I_bar{0.990640564273962, 1.00299268729137,
                                             1.01542090399593};
inline constexpr std::array<double, 3> R_bar{0.0582029962482098, 0.0500130243495488,
                                             0.0417537893172818};
inline constexpr std::array<double, 3> I_under{0.941160089259178, 0.953104743051117,
                                               0.96512472787717};
inline constexpr double lambda1_reduced = -0.953276021544233;

inline constexpr std::array<double, 3> I_star{0.943506411817015, 0.955470796604206,
                                              0.967510560315467};
inline constexpr std::array<double, 3> R_star{0.055439270419802, 0.0476412273545028,
                                              0.0397761000613552};
inline constexpr std::array<double, 3> S_star{1.00105431776318, 0.996887976041291,
                                              0.992713339623178};

inline constexpr double w_upper = 2.00287262965826;
inline constexpr double w_upper_r = 1.00170247069888;
inline constexpr double w_lower = 1.95242209963108;
inline constexpr double w_lower_r = 0.976478272765404;

// S0 at which lambda1 of the HET1 mu with alpha = 1 changes sign.
inline constexpr double critical_S0 = 0.996833299450625;

// Rayleigh quotient of 1 + 0.1 cos(2 pi x), gamma = 0, d = 1, resolution 256.
inline constexpr double rayleigh_cosine = 0.196400178363783;

}  // namespace frozen
