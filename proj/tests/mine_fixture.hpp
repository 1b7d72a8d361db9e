#pragma once

// Synthetic stand-in for the mine injury file: same 20 columns, sparse hour
// compositions driven by mine type, negative binomial injury counts.

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

namespace coda::testing {

inline const char* kMineHeader =
    "YEAR,US_STATE,COMMODITY,PRIMARY,SEAM_HEIGHT,TYPE_OF_MINE,MINE_STATUS,AVG_EMP_TOTAL,EMP_HRS_TOTAL,"
    "PCT_HRS_UNDERGROUND,PCT_HRS_SURFACE,PCT_HRS_STRIP,PCT_HRS_AUGER,PCT_HRS_CULM_BANK,PCT_HRS_DREDGE,"
    "PCT_HRS_OTHER_SURFACE,PCT_HRS_SHOP_YARD,PCT_HRS_MILL_PREP,PCT_HRS_OFFICE,NUM_INJURIES";

inline std::string synthetic_mine_csv(std::size_t n, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::lognormal_distribution<double> emp(1.7, 1.1);
  const std::array<const char*, 4> types{"Mill", "Sand & gravel", "Surface", "Underground"};
  const std::array<double, 4> type_cdf{0.05, 0.52, 0.95, 1.0};
  // Parts each type tends to use, by column index.
  const std::array<std::array<int, 4>, 4> active{{{8, 9, 7, 2}, {2, 5, 9, 7}, {2, 9, 6, 3}, {0, 1, 9, 4}}};
  const std::array<double, 10> effect{0.4, 0.2, 0.0, 0.1, -0.3, 0.1, -0.2, -0.1, 0.1, -0.4};

  std::ostringstream os;
  os << kMineHeader << '\n';
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    const int year = 2013 + static_cast<int>(i % 4);
    const double t = u(rng);
    int type = 0;
    while (t > type_cdf[static_cast<std::size_t>(type)]) ++type;
    const double e = std::max(1.0, std::round(emp(rng)));

    std::array<double, 10> p{};
    const auto& act = active[static_cast<std::size_t>(type)];
    p[static_cast<std::size_t>(act[0])] = 1.0 + 4.0 * u(rng);
    for (std::size_t k = 1; k < act.size(); ++k) {
      if (u(rng) < 0.45) p[static_cast<std::size_t>(act[k])] = u(rng);
    }
    if (u(rng) < 0.03) p[static_cast<std::size_t>(u(rng) * 10.0)] += 0.2;
    double s = 0.0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;

    double eta = -3.0 + (type == 3 ? -0.5 : 0.0) + (type == 1 ? -0.2 : 0.0);
    for (std::size_t k = 0; k < 10; ++k) eta += effect[k] * std::log(p[k] + 1e-6) / 10.0;
    const double mu = e * std::exp(eta);
    std::gamma_distribution<double> g(1.5, mu / 1.5);
    std::poisson_distribution<long long> pois(g(rng));
    const long long y = pois(rng);

    os << year << ",ST,C,P,," << types[static_cast<std::size_t>(type)] << ",Active,";
    std::snprintf(buf, sizeof buf, "%g", e);
    os << buf << ',' << e * 2000.0;
    for (double v : p) {
      std::snprintf(buf, sizeof buf, ",%.12g", v);
      os << buf;
    }
    os << ',' << y << '\n';
  }
  return os.str();
}

}  // namespace coda::testing
