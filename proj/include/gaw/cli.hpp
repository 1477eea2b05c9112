#pragma once

// Argument parsing and dispatch for the `gaw` executable. Kept in a header so
// tests can drive it in-process.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gaw/commands.hpp"

namespace gaw {

namespace detail {

inline void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot write '" + path + "'");
  f << text;
}

inline std::vector<double> parse_times(const std::string& list) {
  std::vector<double> times;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used > 0 && used == item.size() && std::isfinite(v) && v >= 0.0 && v <= 1.0,
            ErrorKind::InvalidInput, "--times: '" + item + "' is not a number in [0,1]");
    times.push_back(v);
  }
  require(!times.empty(), ErrorKind::InvalidInput, "--times: empty list");
  return times;
}

}  // namespace detail

/// Runs the CLI on `args` (without the program name); returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropic adapted Wasserstein distance between Gaussian process laws", "gaw"};
  app.require_subcommand(1);

  std::string instance_path;
  std::string output;
  std::optional<double> lambda;
  std::string zero_mode = "one";
  bool with_w2 = false;
  std::string oracle = "param";
  std::optional<Index> grid;
  std::uint64_t seed = 1;
  std::string times;
  std::string which = "aw";

  const std::vector<std::string> zero_modes{"one", "zero"};
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("instance", instance_path, "instance JSON file")->required();
    sub->add_option("--lambda", lambda, "regularization strength (overrides the file)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--zero-mode", zero_mode, "D entries for zero singular values at lambda=0")
        ->check(CLI::IsMember(zero_modes));
    sub->add_option("--output", output, "write to this file instead of stdout");
  };

  CLI::App* solve = app.add_subcommand("solve", "closed-form value and optimal coupling");
  add_common(solve);
  solve->add_flag("--with-w2", with_w2, "also report the entropic W2 counterpart");

  CLI::App* verify = app.add_subcommand("verify", "compare the closed form with an oracle");
  add_common(verify);
  verify->add_flag("--with-w2", with_w2, "also report the entropic W2 counterpart");
  verify->add_option("--oracle", oracle, "param, dp or both")
      ->check(CLI::IsMember({"param", "dp", "both"}));
  verify->add_option("--grid", grid, "grid points per axis (param) and per stage (dp)")
      ->check(CLI::Range(3, 100000));
  verify->add_option("--seed", seed, "seed for randomized search");

  CLI::App* interp = app.add_subcommand("interpolate", "displacement interpolation as CSV");
  add_common(interp);
  interp->add_option("--times", times, "comma-separated times in [0,1]");
  interp->add_option("--which", which, "aw, aw-reg, w2 or w2-reg")
      ->check(CLI::IsMember({"aw", "aw-reg", "w2", "w2-reg"}));

  CLI::App* examples = app.add_subcommand("examples", "print the bundled instances");
  examples->add_option("--output", output, "directory to write ex1.json, ex2.json, ex3.json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    const ZeroMode zm = zero_mode == "zero" ? ZeroMode::zero : ZeroMode::one;
    if (*examples) {
      if (output.empty()) {
        Json all = Json::object();
        for (const InstanceFile& f : bundled_examples()) all[f.name] = instance_json(f);
        out << to_text(all);
      } else {
        std::filesystem::create_directories(output);
        for (const InstanceFile& f : bundled_examples()) {
          detail::write_output(to_text(instance_json(f)),
                               (std::filesystem::path(output) / (f.name + ".json")).string(), out);
        }
      }
      return kExitOk;
    }
    const InstanceFile inst = load_instance(instance_path);
    if (*solve) {
      detail::write_output(cmd_solve(inst, {lambda, zm, with_w2}).text(), output, out);
      return kExitOk;
    }
    if (*verify) {
      VerifyFlags flags;
      flags.solve = {lambda, zm, with_w2};
      flags.oracle = oracle == "dp" ? OracleChoice::dp
                     : oracle == "both" ? OracleChoice::both
                                        : OracleChoice::param;
      flags.grid = grid;
      flags.seed = seed;
      const VerifyOutcome v = cmd_verify(inst, flags);
      detail::write_output(v.result.text(), output, out);
      if (!v.within_tolerance) {
        err << "verification gap exceeds tolerance\n";
        return kExitGapExceeded;
      }
      return kExitOk;
    }
    InterpolateFlags flags;
    flags.lambda = lambda;
    flags.zero_mode = zm;
    if (!times.empty()) flags.times = detail::parse_times(times);
    const std::map<std::string, Which> kinds{
        {"aw", Which::aw}, {"aw-reg", Which::aw_reg}, {"w2", Which::w2}, {"w2-reg", Which::w2_reg}};
    flags.which = kinds.at(which);
    detail::write_output(cmd_interpolate(inst, flags), output, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace gaw
