#include "cli_common.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "tipcast/io.hpp"

namespace tipcast::cli {

std::string env_name(const std::string& flag) {
  std::string s = "TIPCAST_";
  for (char c : flag) s.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return s;
}

CLI::Option* flag(CLI::App& app, const std::string& name, bool& value, const std::string& help) {
  return app.add_flag("--" + name, value, help)->envname(env_name(name));
}

std::string config_echo(const CLI::App& app) {
  nlohmann::ordered_json j;
  j["command"] = app.get_name();
  nlohmann::ordered_json opts = nlohmann::ordered_json::object();
  for (const CLI::Option* o : app.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help") continue;
    if (o->count() > 0) {
      const auto& r = o->results();
      if (r.size() == 1 && o->get_expected_max() <= 1) {
        opts[name] = r.front();
      } else {
        opts[name] = r;
      }
    } else if (o->get_type_size() == 0) {
      opts[name] = "false";
    } else {
      opts[name] = o->get_default_str();
    }
  }
  j["options"] = opts;
  return j.dump(2) + "\n";
}

void write_config_echo(const CLI::App& app, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file_atomic(dir / "config_echo.json", config_echo(app));
}

}  // namespace tipcast::cli
