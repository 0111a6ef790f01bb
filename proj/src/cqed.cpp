#include "multimon/cqed.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <sstream>

#include "multimon/errors.hpp"

namespace multimon {

std::vector<double> direct_couplings(const ModeSolution& modes,
                                     int reference_mode, double g_ref_mhz) {
  const int n = static_cast<int>(modes.mode_matrix.rows());
  const auto ideal = symmetric_ring_modes(n);
  if (reference_mode < 0 || reference_mode >= static_cast<int>(ideal.size())) {
    throw ConfigError("reference mode index out of range");
  }
  const Eigen::VectorXd& u = ideal[reference_mode];
  // Overlap in the capacitance metric: the normal-mode vectors are
  // orthonormal there, so the symmetric device gives exactly {g_ref, 0, 0}.
  const double u_norm = std::sqrt((u.transpose() * modes.cmat * u)(0));
  std::vector<double> g;
  for (int mu = 0; mu < modes.mode_count(); ++mu) {
    const double ov =
        (modes.mode_matrix.col(mu).transpose() * modes.cmat * u)(0) / u_norm;
    g.push_back(g_ref_mhz * std::abs(ov));
  }
  return g;
}

namespace {

double guarded_inv(double den_ghz, const std::string& what) {
  if (std::abs(den_ghz) < 1e-3) {
    throw PhysicsError("near-resonant denominator (" + what +
                       " within 1 MHz of zero); dispersive model invalid");
  }
  return 1.0 / den_ghz;
}

}  // namespace

std::array<double, 3> trimon_dispersive_shifts(double g_a_mhz, double delta_a0_ghz,
                                               double j_a, double j_ab,
                                               double j_ca) {
  const double g2 = g_a_mhz * 1e-3 * g_a_mhz * 1e-3;  // GHz^2
  const double da = delta_a0_ghz;
  std::array<double, 3> chi;
  chi[0] = g2 * (1.0 / da - 1.0 / (da - 2.0 * j_a));
  chi[1] = 0.5 * g2 * (1.0 / da - 1.0 / (da - 2.0 * j_ab));
  chi[2] = 0.5 * g2 * (1.0 / da - 1.0 / (da - 2.0 * j_ca));
  for (double& c : chi) c *= 1e3;  // MHz
  return chi;
}

CavityModel dispersive_shifts(double omega_r_ghz,
                              const std::vector<double>& g_direct_mhz,
                              const KerrTensor& kerr,
                              const std::vector<double>& qubit_freqs) {
  if (kerr.mode_count() != 3 || g_direct_mhz.size() != 3 ||
      qubit_freqs.size() != 3) {
    throw ConfigError("dispersive_shifts expects a three-qubit device");
  }
  CavityModel cav;
  cav.omega_r_ghz = omega_r_ghz;
  cav.g_direct_mhz = g_direct_mhz;

  const double ja = kerr.self_kerr[0], jb = kerr.self_kerr[1],
               jc = kerr.self_kerr[2];
  const double jab = kerr.cross_kerr(0, 1), jbc = kerr.cross_kerr(1, 2),
               jca = kerr.cross_kerr(2, 0);
  const double da = qubit_freqs[0] - omega_r_ghz;
  const double db = qubit_freqs[1] - omega_r_ghz;
  const double dc = qubit_freqs[2] - omega_r_ghz;
  cav.detunings_ghz = {da, db, dc};

  for (int mu = 0; mu < 3; ++mu) {
    const double ratio = std::abs(cav.detunings_ghz[mu]) /
                         std::max(1e-12, g_direct_mhz[mu] * 1e-3);
    if (ratio < 10.0) {
      std::fprintf(stderr,
                   "warning: mode %c detuning/coupling ratio %.1f < 10; "
                   "dispersive approximation marginal\n",
                   'A' + mu, ratio);
    }
  }

  const double ga2 = g_direct_mhz[0] * g_direct_mhz[0] * 1e-6;  // GHz^2
  const double gb2 = g_direct_mhz[1] * g_direct_mhz[1] * 1e-6;
  const double gc2 = g_direct_mhz[2] * g_direct_mhz[2] * 1e-6;

  auto inv = [](double den, const char* what) { return guarded_inv(den, what); };

  // Seven eigenstate shifts from direct and indirect coupling.
  std::map<std::string, double> chi;
  chi["000"] = 0.0;
  chi["100"] = ga2 * (inv(da, "A0") - inv(da - 2 * ja, "A0-2JA")) +
               0.5 * gb2 * (inv(db, "B0") - inv(db - 2 * jab, "B0-2JAB")) +
               0.5 * gc2 * (inv(dc, "C0") - inv(dc - 2 * jca, "C0-2JCA"));
  chi["010"] = 0.5 * ga2 * (inv(da, "A0") - inv(da - 2 * jab, "A0-2JAB")) +
               gb2 * (inv(db, "B0") - inv(db - 2 * jb, "B0-2JB")) +
               0.5 * gc2 * (inv(dc, "C0") - inv(dc - 2 * jbc, "C0-2JBC"));
  chi["001"] = 0.5 * ga2 * (inv(da, "A0") - inv(da - 2 * jca, "A0-2JCA")) +
               0.5 * gb2 * (inv(db, "B0") - inv(db - 2 * jbc, "B0-2JBC")) +
               gc2 * (inv(dc, "C0") - inv(dc - 2 * jc, "C0-2JC"));
  chi["110"] =
      0.5 * ga2 * (inv(da, "A0") + inv(da - 2 * jab, "A0-2JAB") -
                   2 * inv(da - 2 * ja - 2 * jab, "A0-2JA-2JAB")) +
      0.5 * gb2 * (inv(db, "B0") + inv(db - 2 * jab, "B0-2JAB") -
                   2 * inv(db - 2 * jb - 2 * jab, "B0-2JB-2JAB")) +
      0.5 * gc2 * (inv(dc, "C0") - inv(dc - 2 * jca - 2 * jbc, "C0-2JCA-2JBC"));
  chi["011"] =
      0.5 * ga2 * (inv(da, "A0") - inv(da - 2 * jab - 2 * jca, "A0-2JAB-2JCA")) +
      0.5 * gb2 * (inv(db, "B0") + inv(db - 2 * jbc, "B0-2JBC") -
                   2 * inv(db - 2 * jb - 2 * jbc, "B0-2JB-2JBC")) +
      0.5 * gc2 * (inv(dc, "C0") + inv(dc - 2 * jbc, "C0-2JBC") -
                   2 * inv(dc - 2 * jc - 2 * jbc, "C0-2JC-2JBC"));
  chi["101"] =
      0.5 * ga2 * (inv(da, "A0") + inv(da - 2 * jca, "A0-2JCA") -
                   2 * inv(da - 2 * ja - 2 * jca, "A0-2JA-2JCA")) +
      0.5 * gb2 * (inv(db, "B0") - inv(db - 2 * jbc - 2 * jab, "B0-2JBC-2JAB")) +
      0.5 * gc2 * (inv(dc, "C0") + inv(dc - 2 * jca, "C0-2JCA") -
                   2 * inv(dc - 2 * jc - 2 * jca, "C0-2JC-2JCA"));
  chi["111"] =
      0.5 * ga2 * (inv(da, "A0") + inv(da - 2 * jab - 2 * jca, "A0-2JAB-2JCA") -
                   2 * inv(da - 2 * ja - 2 * jab - 2 * jca, "A0-2JA-2JAB-2JCA")) +
      0.5 * gb2 * (inv(db, "B0") + inv(db - 2 * jbc - 2 * jab, "B0-2JBC-2JAB") -
                   2 * inv(db - 2 * jb - 2 * jbc - 2 * jab, "B0-2JB-2JBC-2JAB")) +
      0.5 * gc2 * (inv(dc, "C0") + inv(dc - 2 * jca - 2 * jbc, "C0-2JCA-2JBC") -
                   2 * inv(dc - 2 * jc - 2 * jca - 2 * jbc, "C0-2JC-2JCA-2JBC"));
  for (auto& [label, value] : chi) value *= 1e3;  // GHz -> MHz
  cav.chi_mhz = chi;
  return cav;
}

ReadoutHistograms readout_histograms(const std::map<std::string, double>& chi_mhz,
                                     double drive_detuning_mhz,
                                     double noise_sigma, long shots,
                                     std::pair<double, double> demarcations,
                                     std::uint64_t seed, double kappa_mhz) {
  if (demarcations.first >= demarcations.second) {
    throw ConfigError("demarcation lines out of order");
  }
  if (shots <= 0) throw ConfigError("shots must be positive");
  if (!(noise_sigma > 0.0)) throw ConfigError("noise_sigma must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_sigma);

  ReadoutHistograms out;
  auto response = [&](double chi) {
    const std::complex<double> z =
        kappa_mhz /
        std::complex<double>(kappa_mhz, 2.0 * (drive_detuning_mhz - 2.0 * chi));
    return z.real();
  };

  for (const auto& [state, chi] : chi_mhz) {
    HistogramRow row;
    row.state = state;
    row.mean = response(chi);
    row.sigma = noise_sigma;
    for (long s = 0; s < shots; ++s) {
      const double x = row.mean + gauss(rng);
      if (x < demarcations.first) {
        ++row.count_below;
      } else if (x > demarcations.second) {
        ++row.count_above;
      } else {
        ++row.count_between;
      }
    }
    out.rows.push_back(row);
  }

  const HistogramRow* r000 = nullptr;
  const HistogramRow* r111 = nullptr;
  for (const auto& r : out.rows) {
    if (r.state == "000") r000 = &r;
    if (r.state == "111") r111 = &r;
  }
  if (r000 && r111) {
    out.state_000_below = r000->mean < r111->mean;
    const auto frac = [&](const HistogramRow& r, bool below) {
      return static_cast<double>(below ? r.count_below : r.count_above) / shots;
    };
    out.mis_000_as_111 = frac(*r000, !out.state_000_below);
    out.mis_111_as_000 = frac(*r111, out.state_000_below);
    out.discard_fraction =
        0.5 * (static_cast<double>(r000->count_between) / shots +
               static_cast<double>(r111->count_between) / shots);
  }
  return out;
}

std::string ReadoutHistograms::csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "state,label_mean,sigma,count_below,count_between,count_above\n";
  for (const auto& r : rows) {
    os << r.state << "," << r.mean << "," << r.sigma << "," << r.count_below
       << "," << r.count_between << "," << r.count_above << "\n";
  }
  return os.str();
}

}  // namespace multimon
