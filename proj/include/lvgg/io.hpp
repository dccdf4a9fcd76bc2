#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvgg/datagen.hpp"
#include "lvgg/evalcv.hpp"
#include "lvgg/model.hpp"
#include "lvgg/solver.hpp"

namespace lvgg::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.3.0";

/**
 * dense-csv:    "# lvgg dense-csv rows=R cols=C" then one comma-separated row
 *               per line, 17 significant digits.
 * dense-binary: 8-byte magic "LVGGMAT1", uint64 rows, uint64 cols, then
 *               rows·cols IEEE-754 doubles, row-major, little-endian.
 */
enum class MatrixFormat { kDenseCsv, kDenseBinary };

const char* to_string(MatrixFormat f);
MatrixFormat format_from_string(const std::string& name);  // "csv" | "bin"
const char* extension(MatrixFormat f);                      // ".csv" | ".bin"

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m, MatrixFormat format);
inline void write_matrix(const fs::path& path, const SymMatrix& m, MatrixFormat format) {
  write_matrix(path, m.dense(), format);
}

/**
 * Reads either format; binary is recognised by its magic. Text input may
 * omit the lvgg header, may carry '#' comment lines and a single
 * non-numeric column-name row, and may separate fields by commas,
 * whitespace or tabs.
 */
Eigen::MatrixXd read_matrix(const fs::path& path);
SymMatrix read_sym_matrix(const fs::path& path);

std::string sha256_file(const fs::path& path);
std::string sha256_string(const std::string& data);

// Hash of a file's content with timing fields removed: JSON / JSONL files
// are parsed and every key starting with "wall_time" dropped before
// hashing; other files are hashed raw.
std::string output_digest(const fs::path& path);

Json to_json(const SolverResult& r);
Json to_json(const IterationRecord& r);
Json to_json(const SolverConfig& c);
Json to_json(const LatentModelSpec& s);
Json to_json(const CvReport& r);
Json ground_truth_summary(const GroundTruth& gt);

// One row per grid cell: lambda1,lambda2,mean_nloglike,valid,unconverged_folds
std::string cv_grid_csv(const CvReport& r);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  std::vector<fs::path> inputs;
  Json seeds = Json::object();
  std::map<std::string, fs::path> outputs;  // logical name -> file
  // Outputs whose content depends on timing (skipped by replay).
  std::vector<std::string> timing_outputs;
  double wall_time_seconds = 0.0;
  Json extra = Json::object();

  // Hashes inputs (sha256) and outputs (output_digest) at write time.
  Json to_json() const;
};

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

}  // namespace lvgg::io
