// Hot loops with a serial reference and an OpenMP variant. Both variants
// accumulate in the same order, so their results are bitwise identical.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace doqkd {

enum class Backend { Serial, Parallel };

/// Jointly Gaussian (t_a, t_b) of a signal coincidence, zero mean.
struct SignalLaw {
  double var_a = 1.0;
  double var_b = 1.0;
  double cov = 0.0;
};

/// count equal-width bins covering [lo, lo + count * width).
struct BinGrid {
  double lo = 0.0;
  double width = 1.0;
  int count = 1;

  /// Bins spanning the centered window [-frame/2, frame/2] with width no
  /// larger than max_width.
  static BinGrid centered(double frame, double max_width);
  double edge(int i) const { return lo + width * i; }
  double hi() const { return edge(count); }
  bool contains(double t) const { return t >= lo && t < hi(); }
  int index(double t) const;
};

/// Mixture weights of the four coincidence origins; normalized on use.
struct MixtureWeights {
  double signal = 1.0;
  double alice_signal_bob_dark = 0.0;
  double alice_dark_bob_signal = 0.0;
  double dark_dark = 0.0;
};

/// Row-major count x count probability table of binned (t_a, t_b), each
/// mixture component conditioned on the window.
std::vector<double> joint_table(const SignalLaw& law, const BinGrid& grid,
                                const MixtureWeights& weights, Backend backend);

/// Plug-in mutual information in bits of a row-major k x k table (need not be
/// normalized; zero cells are skipped).
double table_mutual_information(std::span<const double> table, int k, Backend backend);
double table_mutual_information(std::span<const std::uint64_t> counts, int k, Backend backend);

/// Accumulate (t_a, t_b) pairs into a k x k count table; samples outside the
/// grid are dropped.
std::vector<std::uint64_t> histogram2d(std::span<const double> t_a, std::span<const double> t_b,
                                       const BinGrid& grid, Backend backend);

namespace serial {
std::vector<double> joint_table(const SignalLaw& law, const BinGrid& grid,
                                const MixtureWeights& weights);
double table_mutual_information(std::span<const double> table, int k);
std::vector<std::uint64_t> histogram2d(std::span<const double> t_a, std::span<const double> t_b,
                                       const BinGrid& grid);
}  // namespace serial

namespace parallel {
std::vector<double> joint_table(const SignalLaw& law, const BinGrid& grid,
                                const MixtureWeights& weights);
double table_mutual_information(std::span<const double> table, int k);
std::vector<std::uint64_t> histogram2d(std::span<const double> t_a, std::span<const double> t_b,
                                       const BinGrid& grid);
}  // namespace parallel

/// Number of OpenMP threads in use (1 without OpenMP).
int max_threads();
/// Sets the OpenMP thread count; k <= 0 leaves the runtime default.
void set_threads(int k);

}  // namespace doqkd
