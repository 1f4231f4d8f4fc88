// Command-line front end: subcommands and CSV emission.

#pragma once

#include "doqkd/config.hpp"
#include "doqkd/optimizer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace doqkd {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNoKey = 3,
  kExitValidation = 4,
};

/// 9 significant digits; "inf" for an unbounded count.
std::string format_number(double x);

void write_sweep_n_csv(std::ostream& out, const std::vector<OperatingPoint>& points);
void write_sweep_distance_csv(std::ostream& out, const std::vector<DistanceRow>& rows);
void print_operating_point(std::ostream& out, const OperatingPoint& pt);

/// Empty out_path writes to `out`.
int cmd_rate(const RunConfig& cfg, double N, const std::string& out_path, std::ostream& out,
             std::ostream& err);
int cmd_sweep_n(const RunConfig& cfg, const std::string& out_path, std::ostream& out, std::ostream& err);
int cmd_sweep_distance(const RunConfig& cfg, const std::string& out_path, std::ostream& out,
                       std::ostream& err);
int cmd_mc_validate(const RunConfig& cfg, const std::string& out_path, std::ostream& out, std::ostream& err,
                    double margin_scale = 1.0);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace doqkd
