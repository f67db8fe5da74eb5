// Generated by tests/oracles/generate_oracles.py; do not edit by hand.
#pragma once

namespace oracle {

// Tiny explicit-feature HKL problem: polynomial kernel of order 2, p = 2, n = 15.
inline constexpr int kObjN = 15;
inline constexpr double kObjLambda = 0.05;
inline constexpr double kObjBeta = 2.0;
inline constexpr double kObjX[] = {-0.21118912055729136, -0.5177334709845255, 0.1495958369624623, -1.7898968436779759, 0.2844522535691842, -0.3216956064836901, -0.726050324449302, 0.09853727513129668, -1.9514738484064804, -0.15841288562715672, -0.7312848653804448, 0.40969535789355127, 0.44244173776631784, -0.9278626907702291, -0.9331679527718499, -1.4700371639889616, -0.7876892940867893, 0.3194143920162998, 0.8572703661247674, 0.22879972296310866, 0.03479925265515608, -0.8674471104434567, 0.19577021284431775, -0.8156895315256701, 0.23962888489868106, -0.20259332624012352, 0.8560181034854327, 0.2024703525539789, 1.3688252896097017, -0.4082144474715901};  // row major
inline constexpr double kObjY[] = {0.05747168910225425, -0.11689490223649239, 0.2386760766132086, -0.6164649741600994, -0.6410002118435045, -0.7076908054126595, -0.19406395006467103, 0.6290129687623295, -0.7461800207288258, 0.46609165822359144, -0.05730377009339298, -0.06211344730187054, -0.10939122064350543, 0.47930055768320756, 0.2228018806876966};
inline constexpr double kObjValue = 0.06398105835858274;

// Euclidean projections onto {eta >= 0, sum d^2 eta <= 1}, dimension 8.
inline constexpr int kProjCases = 3;
inline constexpr int kProjDim = 8;
inline constexpr double kProjRaw[] = {0.12084344913762672, -0.19738489433344936, 0.19754672653622188, -0.10802465625147023, 0.9040992669379599, -0.2854811092047469, 0.23546227927938757, -0.09375700376817137, -0.10251367326010857, 0.1976177205744089, 0.17866540766242142, 0.7253395619279956, 0.6705641208713125, 0.39969874885556983, 0.74805982103086, 0.763835724780896, 0.6352150822254078, -0.5583241878210343, 0.4254395360796613, 0.07206496350693048, -0.10088978154247735, 0.291844072018217, -0.14518503932811322, -0.2631657676990821};
inline constexpr double kProjD[] = {1.4942613953557506, 0.9952373553994828, 1.2031158125691164, 1.9221179155491672, 1.9130451715946912, 0.7415447258512011, 1.6345595066104028, 0.6381899467320171, 1.574158911685751, 0.8271337466871707, 1.2536789668138182, 0.9839464627437282, 1.1587699418975737, 1.6629956517111504, 1.1394294950163848, 1.9740466506106595, 0.5363842237713126, 0.6861591697586504, 1.3427773677324255, 0.8384877081102027, 0.8676602537942478, 1.717431765198812, 1.4674707787480772, 1.1157254883329835};
inline constexpr double kProjExpected[] = {2.0339320277054242e-12, 1.3121782373498172e-12, 5.6570485369357334e-11, 5.275781256849151e-13, 0.27324331790099304, 1.480254543024683e-12, 3.0657740111779736e-12, 4.622723555307319e-12, 9.609237955076739e-13, 6.63618763772523e-10, 9.079568549501262e-12, 0.38106450235187284, 0.19308205195064043, 5.890719211864193e-12, 0.2863835652413515, 5.39286307590777e-12, 0.6154345992408942, 1.4005176402929893e-13, 0.3014762941926431, 0.023728118446635218, 6.599252348212689e-13, 0.08905531067689303, 1.7910576723374872e-13, 1.5069250259313273e-13};

// Huber intercept by dense grid search and ternary refinement.
inline constexpr int kHuberN = 20;
inline constexpr double kHuberEps = 1.0;
inline constexpr double kHuberY[] = {-1.8217121279267774, 2.158435538423092, 1.7558195801968026, 3.396875391823382, 0.7796688427323575, 1.8920609128525625, 3.6242330494943165, 0.40598110381116154, -1.000445579718109, -2.901828641567804, 0.5729096028878216, -2.5344330743600523, 2.1953867175860298, 0.29433011783454816, 1.6221145331264417, 0.32542703450177346, 2.4766627199301006, -0.912709354166216, 0.10013544532653894, 2.8002299130580526};
inline constexpr double kHuberU[] = {-1.2583110321903825, 0.19252723035005864, 0.9752574099039509, -1.0635333890782235, -0.6997189554259344, -1.2499109994493884, 1.180755855958985, -0.18937950941760334, -0.3151526950576845, -1.4125440998120293, -1.0637880888392612, 0.9265324028169399, -0.1894662559146825, -0.4008865295361959, 0.7918978444233291, -0.9058702327124593, 1.6133774967039864, -0.36821453798861686, -0.5130431413146951, -0.2651651322617833};
inline constexpr double kHuberB = 1.0691111052719755;

// gamma constant of the p = 8, q = 3 grid with beta = 2.
inline constexpr double kGammaGrid8x3 = 37.481489169423874;

// Exact dual norm of scalar-per-vertex g on the p = 2, q = 2 grid, beta = 2,
// vertices in lexicographic order.
inline constexpr double kDualG[] = {0.03734160322850226, 0.7011685358520778, 0.6988357023991144, 0.8240273035749163, 0.038157318143834086, 0.338946480595799, 0.8772554573332024, 0.47675317335829226, 0.9670117114464462};
inline constexpr double kDualNorm = 0.285904964431219;

}  // namespace oracle
