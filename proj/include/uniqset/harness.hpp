// harness.hpp
// run directories, CSV/JSON emission, manifests and the named pipelines
#ifndef UNIQSET_HARNESS_HPP
#define UNIQSET_HARNESS_HPP

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

namespace uniqset {

inline constexpr const char* kVersion = "1.0.0";

// %.17g, round-trip safe; non-finite as nan/inf/-inf
std::string fmt(double x);
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  template <class... A>
  void row(const A&... a) {
    std::vector<std::string> r;
    (r.push_back(cell(a)), ...);
    rows_.push_back(std::move(r));
  }
  void row_vec(std::vector<std::string> r) { rows_.push_back(std::move(r)); }
  std::string str() const;
  std::size_t size() const { return rows_.size(); }

  template <class T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_floating_point_v<T>) {
      return fmt(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return std::string(v);
    }
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

class RunWriter {
 public:
  // creates dir (and parents)
  RunWriter(std::string dir, std::string command, nlohmann::json config);
  const std::string& dir() const { return dir_; }
  void csv(const std::string& name, const Table& t);
  void json(const std::string& name, const nlohmann::json& j);
  // writes summary.json, then manifest.json over every emitted file
  nlohmann::json finish(nlohmann::json summary, bool ok);

 private:
  void put(const std::string& name, const std::string& data);
  std::string dir_, command_;
  nlohmann::json config_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, sha256
};

// ---- pipelines

struct RunResult {
  bool ok = false;
  std::string dir;
  nlohmann::json summary;
  nlohmann::json manifest;
};

const std::vector<std::string>& pipeline_names();
nlohmann::json default_config(const std::string& command);
// defaults overlaid with user keys; unknown keys or type mismatches throw ParameterError
nlohmann::json merge_config(const std::string& command, const nlohmann::json& user);
RunResult run_pipeline(const std::string& command, const nlohmann::json& user_config, const std::string& out_dir);

// long-format (x, y, series) rows from a run directory
const std::vector<std::string>& plot_kinds();
std::string plotdata(const std::string& run_dir, const std::string& kind);

// minimal CSV reader for the tables this harness writes
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace uniqset

#endif
