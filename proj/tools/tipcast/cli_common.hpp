#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "CLI11.hpp"

namespace tipcast::cli {

/// Raised for bad flag combinations found after parsing; exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// TIPCAST_<NAME> with dashes turned into underscores.
std::string env_name(const std::string& flag);

/// Adds --name bound to `value`, mirrored by its environment variable.
template <class T>
CLI::Option* option(CLI::App& app, const std::string& name, T& value, const std::string& help) {
  return app.add_option("--" + name, value, help)->envname(env_name(name));
}

CLI::Option* flag(CLI::App& app, const std::string& name, bool& value, const std::string& help);

/// JSON object of every option of `app` with its effective value.
std::string config_echo(const CLI::App& app);
void write_config_echo(const CLI::App& app, const std::filesystem::path& dir);

using Runner = std::function<int()>;

Runner add_generate(CLI::App& root);
Runner add_simulate(CLI::App& root);
Runner add_predict(CLI::App& root);
Runner add_evaluate(CLI::App& root);

}  // namespace tipcast::cli
