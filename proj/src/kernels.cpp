#include "doqkd/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef DOQKD_HAVE_OPENMP
#include <omp.h>
#endif

namespace doqkd {

namespace {

constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290,
                                            0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};
constexpr double kBandSigmas = 9.0;

// P(lo_z < Z < hi_z) for standard normal Z, accurate in both tails.
double normal_mass(double lo_z, double hi_z) {
  if (lo_z >= 0.0) {
    return 0.5 * (std::erfc(lo_z * M_SQRT1_2) - std::erfc(hi_z * M_SQRT1_2));
  }
  if (hi_z <= 0.0) {
    return 0.5 * (std::erfc(-hi_z * M_SQRT1_2) - std::erfc(-lo_z * M_SQRT1_2));
  }
  return 1.0 - 0.5 * (std::erfc(-lo_z * M_SQRT1_2) + std::erfc(hi_z * M_SQRT1_2));
}

struct SignalGeometry {
  double sd_a;
  double slope;
  double cond_sd;
  int panels;
};

SignalGeometry geometry(const SignalLaw& law, const BinGrid& grid) {
  if (!(law.var_a > 0.0) || !(law.var_b > 0.0)) {
    throw std::invalid_argument("joint_table: signal variances must be positive");
  }
  const double cond_var = law.var_b - law.cov * law.cov / law.var_a;
  if (!(cond_var > 0.0)) {
    throw std::invalid_argument("joint_table: signal law is degenerate");
  }
  SignalGeometry g;
  g.sd_a = std::sqrt(law.var_a);
  g.slope = law.cov / law.var_a;
  g.cond_sd = std::sqrt(cond_var);
  const double scale = std::min(g.cond_sd / std::max(std::abs(g.slope), 1e-300), g.sd_a);
  g.panels = std::max(1, static_cast<int>(std::ceil(grid.width / (0.5 * scale))));
  return g;
}

// Unnormalized signal mass of row i (Alice bin i) into out[0..count).
void signal_row(const SignalGeometry& g, const BinGrid& grid, int i, double* out) {
  std::fill(out, out + grid.count, 0.0);
  const double a0 = grid.edge(i);
  const double h = grid.width / g.panels;
  const double inv_sqrt_2pi = 0.3989422804014327;
  for (int panel = 0; panel < g.panels; ++panel) {
    const double mid = a0 + (panel + 0.5) * h;
    for (int q = 0; q < 8; ++q) {
      const double x = (q < 4 ? -kGlNodes[q] : kGlNodes[q - 4]) * 0.5 * h;
      const double w = kGlWeights[q < 4 ? q : q - 4] * 0.5 * h;
      const double a = mid + x;
      const double za = a / g.sd_a;
      const double density = inv_sqrt_2pi / g.sd_a * std::exp(-0.5 * za * za);
      const double mean_b = g.slope * a;
      int j_lo = static_cast<int>(std::floor((mean_b - kBandSigmas * g.cond_sd - grid.lo) / grid.width));
      int j_hi = static_cast<int>(std::ceil((mean_b + kBandSigmas * g.cond_sd - grid.lo) / grid.width));
      j_lo = std::max(j_lo, 0);
      j_hi = std::min(j_hi, grid.count - 1);
      for (int j = j_lo; j <= j_hi; ++j) {
        const double lo_z = (grid.edge(j) - mean_b) / g.cond_sd;
        const double hi_z = (grid.edge(j + 1) - mean_b) / g.cond_sd;
        out[j] += w * density * normal_mass(lo_z, hi_z);
      }
    }
  }
}

std::vector<double> window_marginal(double var, const BinGrid& grid) {
  const double sd = std::sqrt(var);
  std::vector<double> m(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    m[i] = normal_mass(grid.edge(i) / sd, grid.edge(i + 1) / sd);
  }
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("joint_table: window holds no signal mass");
  for (double& x : m) x /= total;
  return m;
}

MixtureWeights normalized(const MixtureWeights& w) {
  if (!(w.signal >= 0.0 && w.alice_signal_bob_dark >= 0.0 && w.alice_dark_bob_signal >= 0.0 &&
        w.dark_dark >= 0.0)) {
    throw std::invalid_argument("joint_table: mixture weights must be non-negative");
  }
  const double total = w.signal + w.alice_signal_bob_dark + w.alice_dark_bob_signal + w.dark_dark;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("joint_table: mixture weights sum to zero");
  }
  return {w.signal / total, w.alice_signal_bob_dark / total, w.alice_dark_bob_signal / total,
          w.dark_dark / total};
}

// Mix the normalized components into the signal table in place.
void mix_row(int i, const BinGrid& grid, const MixtureWeights& w, double signal_total,
             const std::vector<double>& marg_a, const std::vector<double>& marg_b, double* row) {
  const double k = grid.count;
  const double base = w.alice_signal_bob_dark * marg_a[i] / k + w.dark_dark / (k * k);
  for (int j = 0; j < grid.count; ++j) {
    const double sig = signal_total > 0.0 ? row[j] / signal_total : 0.0;
    row[j] = w.signal * sig + base + w.alice_dark_bob_signal * marg_b[j] / k;
  }
}

double row_information(const double* row, int k, double total, const double* pa_row,
                       const std::vector<double>& pb) {
  double acc = 0.0;
  for (int j = 0; j < k; ++j) {
    if (row[j] <= 0.0) continue;
    const double p = row[j] / total;
    acc += p * std::log2(p / (*pa_row * pb[j]));
  }
  return acc;
}

template <class T>
double mutual_information_impl(std::span<const T> table, int k, bool parallel) {
  if (k <= 0 || table.size() != static_cast<std::size_t>(k) * k) {
    throw std::invalid_argument("mutual information: table size does not match k");
  }
  std::vector<double> row_sum(k, 0.0);
  std::vector<double> col_sum(k, 0.0);
  std::vector<double> row_info(k, 0.0);
  std::vector<double> row(k);

  auto sum_row = [&](int i) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += static_cast<double>(table[static_cast<std::size_t>(i) * k + j]);
    row_sum[i] = s;
  };
  auto sum_col = [&](int j) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += static_cast<double>(table[static_cast<std::size_t>(i) * k + j]);
    col_sum[j] = s;
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < k; ++i) sum_row(i);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < k; ++j) sum_col(j);
  } else {
    for (int i = 0; i < k; ++i) sum_row(i);
    for (int j = 0; j < k; ++j) sum_col(j);
  }
  double total = 0.0;
  for (double s : row_sum) total += s;
  if (!(total > 0.0)) throw std::invalid_argument("mutual information: empty table");

  std::vector<double> pa(k), pb(k);
  for (int i = 0; i < k; ++i) pa[i] = row_sum[i] / total;
  for (int j = 0; j < k; ++j) pb[j] = col_sum[j] / total;

  auto info_row = [&](int i, double* scratch) {
    for (int j = 0; j < k; ++j) scratch[j] = static_cast<double>(table[static_cast<std::size_t>(i) * k + j]);
    row_info[i] = row_information(scratch, k, total, &pa[i], pb);
  };
  if (parallel) {
#pragma omp parallel
    {
      std::vector<double> scratch(k);
#pragma omp for schedule(static)
      for (int i = 0; i < k; ++i) info_row(i, scratch.data());
    }
  } else {
    for (int i = 0; i < k; ++i) info_row(i, row.data());
  }
  double info = 0.0;
  for (double x : row_info) info += x;
  return std::max(info, 0.0);
}

std::vector<double> joint_table_impl(const SignalLaw& law, const BinGrid& grid,
                                     const MixtureWeights& weights, bool parallel) {
  if (grid.count <= 0 || !(grid.width > 0.0)) {
    throw std::invalid_argument("joint_table: empty bin grid");
  }
  const MixtureWeights w = normalized(weights);
  const SignalGeometry g = geometry(law, grid);
  const int k = grid.count;
  std::vector<double> table(static_cast<std::size_t>(k) * k);
  std::vector<double> row_total(k, 0.0);

  auto fill = [&](int i) {
    double* row = table.data() + static_cast<std::size_t>(i) * k;
    signal_row(g, grid, i, row);
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += row[j];
    row_total[i] = s;
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < k; ++i) fill(i);
  } else {
    for (int i = 0; i < k; ++i) fill(i);
  }
  double signal_total = 0.0;
  for (double s : row_total) signal_total += s;
  if (w.signal > 0.0 && !(signal_total > 0.0)) {
    throw std::invalid_argument("joint_table: window holds no signal mass");
  }

  const auto marg_a = window_marginal(law.var_a, grid);
  const auto marg_b = window_marginal(law.var_b, grid);
  auto mix = [&](int i) {
    mix_row(i, grid, w, signal_total, marg_a, marg_b, table.data() + static_cast<std::size_t>(i) * k);
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < k; ++i) mix(i);
  } else {
    for (int i = 0; i < k; ++i) mix(i);
  }
  return table;
}

std::vector<std::uint64_t> histogram_impl(std::span<const double> t_a, std::span<const double> t_b,
                                          const BinGrid& grid, bool parallel) {
  if (t_a.size() != t_b.size()) throw std::invalid_argument("histogram2d: length mismatch");
  const int k = grid.count;
  const std::size_t cells = static_cast<std::size_t>(k) * k;
  std::vector<std::uint64_t> counts(cells, 0);
  const std::int64_t n = static_cast<std::int64_t>(t_a.size());
  auto bin = [&](std::int64_t s, std::vector<std::uint64_t>& into) {
    if (!grid.contains(t_a[s]) || !grid.contains(t_b[s])) return;
    into[static_cast<std::size_t>(grid.index(t_a[s])) * k + grid.index(t_b[s])] += 1;
  };
  if (!parallel) {
    for (std::int64_t s = 0; s < n; ++s) bin(s, counts);
    return counts;
  }
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(cells, 0);
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < n; ++s) bin(s, local);
#pragma omp critical
    for (std::size_t c = 0; c < cells; ++c) counts[c] += local[c];
  }
  return counts;
}

}  // namespace

BinGrid BinGrid::centered(double frame, double max_width) {
  if (!(frame > 0.0) || !(max_width > 0.0) || !std::isfinite(frame) || !std::isfinite(max_width)) {
    throw std::invalid_argument("BinGrid: frame and bin width must be positive");
  }
  const double ratio = frame / max_width;
  if (ratio > 1e5) throw std::invalid_argument("BinGrid: too many bins");
  BinGrid g;
  g.count = std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
  g.width = frame / g.count;
  g.lo = -0.5 * frame;
  return g;
}

int BinGrid::index(double t) const {
  const int i = static_cast<int>(std::floor((t - lo) / width));
  return std::clamp(i, 0, count - 1);
}

namespace serial {
std::vector<double> joint_table(const SignalLaw& law, const BinGrid& grid,
                                const MixtureWeights& weights) {
  return joint_table_impl(law, grid, weights, false);
}
double table_mutual_information(std::span<const double> table, int k) {
  return mutual_information_impl(table, k, false);
}
std::vector<std::uint64_t> histogram2d(std::span<const double> t_a, std::span<const double> t_b,
                                       const BinGrid& grid) {
  return histogram_impl(t_a, t_b, grid, false);
}
}  // namespace serial

namespace parallel {
std::vector<double> joint_table(const SignalLaw& law, const BinGrid& grid,
                                const MixtureWeights& weights) {
  return joint_table_impl(law, grid, weights, true);
}
double table_mutual_information(std::span<const double> table, int k) {
  return mutual_information_impl(table, k, true);
}
std::vector<std::uint64_t> histogram2d(std::span<const double> t_a, std::span<const double> t_b,
                                       const BinGrid& grid) {
  return histogram_impl(t_a, t_b, grid, true);
}
}  // namespace parallel

std::vector<double> joint_table(const SignalLaw& law, const BinGrid& grid,
                                const MixtureWeights& weights, Backend backend) {
  return joint_table_impl(law, grid, weights, backend == Backend::Parallel);
}

double table_mutual_information(std::span<const double> table, int k, Backend backend) {
  return mutual_information_impl(table, k, backend == Backend::Parallel);
}

double table_mutual_information(std::span<const std::uint64_t> counts, int k, Backend backend) {
  return mutual_information_impl(counts, k, backend == Backend::Parallel);
}

std::vector<std::uint64_t> histogram2d(std::span<const double> t_a, std::span<const double> t_b,
                                       const BinGrid& grid, Backend backend) {
  return histogram_impl(t_a, t_b, grid, backend == Backend::Parallel);
}

int max_threads() {
#ifdef DOQKD_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int k) {
#ifdef DOQKD_HAVE_OPENMP
  if (k > 0) omp_set_num_threads(k);
#else
  (void)k;
#endif
}

}  // namespace doqkd
