#include <iostream>
#include <map>

#include "cli_common.hpp"
#include "tipcast/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tipcast: tipping-point dataset generation, baselines and evaluation"};
  app.require_subcommand(1);
  std::map<std::string, tipcast::cli::Runner> runners;
  runners["generate"] = tipcast::cli::add_generate(app);
  runners["simulate"] = tipcast::cli::add_simulate(app);
  runners["predict"] = tipcast::cli::add_predict(app);
  runners["evaluate"] = tipcast::cli::add_evaluate(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (auto* sub : app.get_subcommands()) return runners.at(sub->get_name())();
  } catch (const tipcast::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const tipcast::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
