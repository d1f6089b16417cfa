#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "frontctl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Feedback stabilisation of a planar activator-inhibitor front"};
  app.require_subcommand(1);

  std::string config_path;
  std::string chosen;
  for (const auto& name : frontctl::cli::subcommands()) {
    auto* sub = app.add_subcommand(name, "");
    sub->add_option("-c,--config", config_path, "JSON run configuration (defaults apply when omitted)");
    sub->callback([&chosen, name] { chosen = name; });
  }
  app.get_subcommand("spectrum")->description("Laplacian eigenpairs and the open-loop spectrum");
  app.get_subcommand("steady")->description("Stationary planar front profile");
  app.get_subcommand("assemble")->description("Galerkin matrices J, A, beta, H");
  app.get_subcommand("zeros")->description("Finite, decoupling and infinite zeros of the configured loop");
  app.get_subcommand("rootlocus")->description("Closed-loop eigenvalue branches over negative gains");
  app.get_subcommand("design")->description("Controller design (minimal number of channels unless sensors are given)");
  app.get_subcommand("simulate")->description("Nonlinear 2-D simulation, optionally under the designed controller");
  app.get_subcommand("reproduce")->description("Scenario suite with one PASS/FAIL line per criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return frontctl::cli::run(chosen, config_path, std::cout, std::cerr);
}
