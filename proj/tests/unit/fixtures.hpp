// Reference values produced by tests/oracles/fixtures.py.

#pragma once

namespace fixtures {

inline constexpr double kDetGammaAA_10_1_1 = 25.12515625;
inline constexpr double kNoisyNu0 = 0.564373748493672;  // d = 8, k = 1, eta = .001, eps = .002
inline constexpr double kNoisyNu1 = 0.556342498494621;
inline constexpr double kNoisyConditional = 0.560903798811306;
inline constexpr double kPhysicalityBoundaryEta = 0.0133333333338282;  // xi = .21, d = 8

inline constexpr double kChiWorst021 = 0.289013450077376;
inline constexpr double kEtaWorst021 = 0.00164705882352941;
inline constexpr double kChiWorst030 = 0.372028607204756;
inline constexpr double kChiWorst021K3 = 0.289013450090928;

inline constexpr double kContinuousMi = 2.47942696711823;
inline constexpr double kBinnedMiDefaults = 2.47484848903;
inline constexpr double kBinnedMi200km = 2.42368502967;
inline constexpr double kBinnedMiNoiseless = 2.99723773142;
inline constexpr double kSignalFraction200km = 0.99316585102178;

inline constexpr double kErfInv099 = 1.821386367718449673;
inline constexpr double kErfInvTail = 3.123413274340875030;  // 1 - 1e-5
inline constexpr double kG1 = 1.377443751081734272;
inline constexpr double kEcTerm1e6 = 3.421928094887362e-5;
inline constexpr double kSmoothTerm1e6 = 0.044323055285044762;

// N = 1e6, p = 0.9, equal split of eps_s - eps_ec, centered bound
inline constexpr double kPointXiMax = 0.289555924165984;
inline constexpr double kPointChi = 0.362990373357;
inline constexpr double kPointRdo = 1.86437326677;
inline constexpr double kPointRn = 1.47458429123;

}  // namespace fixtures
