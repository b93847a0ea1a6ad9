#pragma once

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dissip/admm.hpp"
#include "dissip/model.hpp"

namespace dissip {

using json = nlohmann::json;

/// Schema violation; `path` is the JSON pointer of the offending field.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Nested row arrays; shapes with a zero extent use {"rows","cols","data"}.
json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j, const std::string& path = "");

json problem_to_json(const Problem& p);
Problem problem_from_json(const json& j);
Problem load_problem(const std::string& path);
void save_problem(const Problem& p, const std::string& path);

struct RunConfig {
  std::string command = "certify";
  std::string problem, output;
  int max_iters = 500;
  int storage_degree = 4;
  int threads = 0;
  double tol_gap = 1e-8;
  int stall_window = 50;
  double gamma_lo = 0.0, gamma_hi = 2.0, tol_gamma = 0.01;
  bool direct = false;
  std::uint64_t seed = 0;

  AdmmOptions admm_options() const;
  json to_json() const;
};

/// Results document; `residual_csv` is recorded as given.
json results_to_json(const CertResult& r, const RunConfig& cfg, const std::string& residual_csv,
                     const std::optional<BisectResult>& bisect = std::nullopt,
                     const std::optional<DirectResult>& direct = std::nullopt, const std::string& note = "");

/// Cumulative fraction certified against iterations over results documents.
std::string cumulative_iterations_csv(const std::vector<json>& results);
/// ADMM and direct wall times, one row per results document.
std::string runtime_table_csv(const std::vector<json>& results);
std::string cumulative_iterations_svg(const std::vector<json>& results);
std::string runtime_table_svg(const std::vector<json>& results);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace dissip
