#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "uniqset/errors.hpp"
#include "uniqset/harness.hpp"

using nlohmann::json;

namespace {

json parse_value(const json& def, const std::string& raw) {
  if (def.is_number()) return json::parse(raw);
  if (def.is_array()) {
    json a = json::array();
    std::stringstream ss(raw);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        a.push_back(json::parse(tok));
      } catch (const json::exception&) {
        a.push_back(tok);
      }
    }
    return a;
  }
  return raw;
}

struct Sub {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> opts;
  std::string config_path, out;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uniqset: uniqueness sets, block certificates, densities, capacities and outer functions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", uniqset::kVersion);

  std::map<std::string, Sub> subs;
  for (const auto& name : uniqset::pipeline_names()) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, "run the " + name + " pipeline");
    s.app->add_option("--config", s.config_path, "JSON config file (keys as below)");
    s.app->add_option("--out", s.out, "run directory")->required();
    json def = uniqset::default_config(name);
    for (auto it = def.begin(); it != def.end(); ++it) {
      const std::string key = it.key();
      if (it.value().is_boolean()) {
        s.flags[key] = false;
        s.opts[key] = s.app->add_flag("--" + key + ",!--no-" + key, s.flags[key], "default " + it.value().dump());
      } else {
        s.values[key];
        s.opts[key] = s.app->add_option("--" + key, s.values[key], "default " + it.value().dump());
      }
    }
  }

  std::string plot_dir, plot_kind, plot_out;
  auto* plot = app.add_subcommand("plotdata", "long-format (x, y, series) CSV from a run directory");
  plot->add_option("run_dir", plot_dir, "run directory")->required();
  plot->add_option("--kind", plot_kind, "lq_partial, entropy_terms, ledger, capacity_trend or outer_decay")
      ->required()
      ->check(CLI::IsMember(uniqset::plot_kinds()));
  plot->add_option("--out", plot_out, "output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      std::string csv = uniqset::plotdata(plot_dir, plot_kind);
      if (plot_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream(plot_out, std::ios::binary) << csv;
      }
      return 0;
    }
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      json user = json::object();
      if (!s.config_path.empty()) {
        std::ifstream in(s.config_path);
        if (!in) throw uniqset::ParameterError("cannot read config " + s.config_path);
        user = json::parse(in);
      }
      json def = uniqset::default_config(name);
      for (auto& [k, v] : s.values)
        if (s.opts[k]->count()) user[k] = parse_value(def[k], v);
      for (auto& [k, v] : s.flags)
        if (s.opts[k]->count()) user[k] = v;
      auto r = uniqset::run_pipeline(name, user, s.out);
      std::cout << r.summary.dump(2) << "\n";
      return r.ok ? 0 : 1;
    }
  } catch (const uniqset::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
