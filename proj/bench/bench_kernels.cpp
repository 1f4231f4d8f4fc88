// Serial reference against the OpenMP kernels: wall time and agreement.

#include "doqkd/info_rates.hpp"
#include "doqkd/kernels.hpp"
#include "doqkd/mc_oracle.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace doqkd;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

template <class T>
bool same(const T& a, const T& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(a[0])) == 0;
}

bool all_equal = true;

void row(const char* name, double ts, double tp, bool equal) {
  all_equal = all_equal && equal;
  std::printf("%-26s %12.4f %12.4f %9.2fx  %s\n", name, 1e3 * ts, 1e3 * tp, ts / tp, equal ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark"};
  int threads = 0, reps = 3;
  double d = 8.0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--reps", reps, "Timed repetitions per kernel");
  app.add_option("--d", d, "Dimension");
  CLI11_PARSE(app, argc, argv);
  set_threads(threads);

  const auto source = SourceParams::from_dimension(d);
  const auto detector = DetectorParams::defaults_for(source);
  const auto link = link_statistics(ChannelParams::defaults_for(source), detector);
  const auto law = arrival_time_law(source, 0.21, detector.jitter_rms);
  const auto grid = BinGrid::centered(link.frame_duration, detector.bin_width);
  const auto weights = coincidence_mixture(link);

  std::printf("threads=%d d=%g bins=%d\n", max_threads(), d, grid.count);
  std::printf("%-26s %12s %12s %10s  %s\n", "kernel", "serial ms", "parallel ms", "speedup", "result");

  std::vector<double> ts, tp;
  const double t1 = seconds([&] { ts = serial::joint_table(law, grid, weights); }, reps);
  const double t2 = seconds([&] { tp = parallel::joint_table(law, grid, weights); }, reps);
  row("joint_table", t1, t2, same(ts, tp));

  double ms = 0, mp = 0;
  const double t3 = seconds([&] { ms = serial::table_mutual_information(ts, grid.count); }, reps);
  const double t4 = seconds([&] { mp = parallel::table_mutual_information(tp, grid.count); }, reps);
  row("table_mutual_information", t3, t4, ms == mp);

  std::mt19937_64 r(1);
  std::normal_distribution<double> n(0.0, source.sigma_coh());
  std::vector<double> a(4000000), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = n(r);
    b[i] = a[i] + 0.3 * n(r);
  }
  std::vector<std::uint64_t> hs, hp;
  const double t5 = seconds([&] { hs = serial::histogram2d(a, b, grid); }, reps);
  const double t6 = seconds([&] { hp = parallel::histogram2d(a, b, grid); }, reps);
  row("histogram2d (4e6)", t5, t6, hs == hp);

  std::vector<double> etas(20001), cs(etas.size()), cp(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) etas[i] = eta_upper_bound(0.21, d) * i / (etas.size() - 1);
  const double t7 = seconds([&] { holevo_profile(source, 0.21, etas, cs, Backend::Serial); }, reps);
  const double t8 = seconds([&] { holevo_profile(source, 0.21, etas, cp, Backend::Parallel); }, reps);
  row("holevo_profile (20001)", t7, t8, same(cs, cp));

  SimConfig sim;
  sim.seed = 3;
  sim.trials = 2000;
  sim.frames_per_trial = 1000;
  sim.source = source;
  sim.detector = detector;
  sim.detector.jitter_rms = 0.0;
  sim.link = signal_only_link(link.frame_duration);
  CoverageResult vs, vp;
  const double t9 = seconds([&] { vs = coverage_test(sim, 0.05, BoundForm::Centered, 1.0, Backend::Serial); }, reps);
  const double t10 = seconds([&] { vp = coverage_test(sim, 0.05, BoundForm::Centered, 1.0, Backend::Parallel); }, reps);
  row("coverage_test (2e3 x 1e3)", t9, t10, vs.violations == vp.violations);

  SimConfig mi = sim;
  mi.detector = detector;
  mi.link = link;
  double es = 0, ep = 0;
  const double t11 = seconds([&] { es = empirical_mutual_information(mi, 2000000, Backend::Serial); }, reps);
  const double t12 = seconds([&] { ep = empirical_mutual_information(mi, 2000000, Backend::Parallel); }, reps);
  row("streamed MI (2e6)", t11, t12, es == ep);
  return all_equal ? 0 : 1;
}
