#include "lvgg/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lvgg/error.hpp"

namespace lvgg::io {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'V', 'G', 'G', 'M', 'A', 'T', '1'};
constexpr const char* kCsvHeader = "# lvgg dense-csv";

static_assert(std::endian::native == std::endian::little,
              "dense-binary I/O assumes a little-endian host");

std::string to_chars17(double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

bool parse_double(std::string_view tok, double& out) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) {
    tok.remove_suffix(1);
  }
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  const bool has_comma = line.find(',') != std::string_view::npos;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    const bool sep = i == line.size() ||
                     (has_comma ? line[i] == ',' : (line[i] == ' ' || line[i] == '\t'));
    if (!sep) continue;
    std::string_view tok = line.substr(start, i - start);
    if (has_comma || !tok.empty()) out.push_back(tok);
    start = i + 1;
  }
  return out;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

Eigen::MatrixXd read_binary(std::ifstream& in, const fs::path& path) {
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in) throw IoError("truncated dense-binary header: " + path.string());
  const std::uint64_t count = rows * cols;
  std::vector<double> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || static_cast<std::uint64_t>(in.gcount()) != count * sizeof(double)) {
    throw IoError("dense-binary payload shorter than header dims: " + path.string());
  }
  in.peek();
  if (!in.eof()) throw IoError("dense-binary payload longer than header dims: " + path.string());
  Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint64_t j = 0; j < cols; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = payload[i * cols + j];
    }
  }
  return m;
}

Eigen::MatrixXd read_text(std::ifstream& in, const fs::path& path) {
  long header_rows = -1, header_cols = -1;
  std::vector<std::vector<double>> rows;
  bool allow_name_row = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (line[0] == '#') {
      if (line.rfind(kCsvHeader, 0) == 0) {
        std::istringstream hs(line.substr(std::strlen(kCsvHeader)));
        std::string kv;
        while (hs >> kv) {
          if (kv.rfind("rows=", 0) == 0) header_rows = std::stol(kv.substr(5));
          if (kv.rfind("cols=", 0) == 0) header_cols = std::stol(kv.substr(5));
        }
      }
      continue;
    }
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = !fields.empty();
    for (std::size_t k = 0; k < fields.size() && numeric; ++k) {
      numeric = parse_double(fields[k], values[k]);
    }
    if (!numeric) {
      if (allow_name_row && rows.empty()) {
        allow_name_row = false;
        continue;
      }
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    allow_name_row = false;
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw IoError("no numeric rows in " + path.string());
  const auto r = static_cast<Index>(rows.size());
  const auto c = static_cast<Index>(rows.front().size());
  if ((header_rows >= 0 && header_rows != r) || (header_cols >= 0 && header_cols != c)) {
    throw IoError("dense-csv header dims disagree with payload: " + path.string());
  }
  Eigen::MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void strip_timing(Json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (it.key().rfind("wall_time", 0) == 0) {
        it = j.erase(it);
      } else {
        strip_timing(it.value());
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

std::string hex(const unsigned char* data, unsigned int len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xF]);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// NaN / Inf have no JSON representation; they serialize as null.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

const char* to_string(MatrixFormat f) {
  return f == MatrixFormat::kDenseCsv ? "dense-csv" : "dense-binary";
}

MatrixFormat format_from_string(const std::string& name) {
  if (name == "csv" || name == "dense-csv") return MatrixFormat::kDenseCsv;
  if (name == "bin" || name == "dense-binary") return MatrixFormat::kDenseBinary;
  throw ConfigError("unknown matrix format '" + name + "' (expected csv or bin)");
}

const char* extension(MatrixFormat f) { return f == MatrixFormat::kDenseCsv ? ".csv" : ".bin"; }

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == MatrixFormat::kDenseBinary) {
    out.write(kMagic.data(), kMagic.size());
    const auto rows = static_cast<std::uint64_t>(m.rows());
    const auto cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  } else {
    out << kCsvHeader << " rows=" << m.rows() << " cols=" << m.cols() << '\n';
    std::string row;
    for (Index i = 0; i < m.rows(); ++i) {
      row.clear();
      for (Index j = 0; j < m.cols(); ++j) {
        if (j > 0) row.push_back(',');
        row += to_chars17(m(i, j));
      }
      row.push_back('\n');
      out << row;
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd read_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kMagic) {
    return read_binary(in, path);
  }
  in.clear();
  in.seekg(0);
  return read_text(in, path);
}

SymMatrix read_sym_matrix(const fs::path& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (m.rows() != m.cols()) {
    throw IoError(path.string() + " is not square (" + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()) + ")");
  }
  return SymMatrix::from_dense(m);
}

std::string sha256_string(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  return hex(md.data(), len);
}

std::string sha256_file(const fs::path& path) { return sha256_string(read_file(path)); }

std::string output_digest(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext != ".json" && ext != ".jsonl") return sha256_file(path);
  std::istringstream in(read_file(path));
  std::string canonical, line;
  if (ext == ".json") {
    Json j = Json::parse(in);
    strip_timing(j);
    canonical = j.dump();
  } else {
    while (std::getline(in, line)) {
      if (is_blank(line)) continue;
      Json j = Json::parse(line);
      strip_timing(j);
      canonical += j.dump();
      canonical.push_back('\n');
    }
  }
  return sha256_string(canonical);
}

Json to_json(const SolverResult& r) {
  Json j;
  j["dim"] = r.s_hat.dim();
  j["objective"] = number_or_null(r.objective);
  j["rank_l"] = r.rank_l;
  j["nnz_offdiag_s"] = r.nnz_offdiag_s;
  j["sparse_ratio_s"] = r.sparse_ratio_s;
  j["iters"] = r.iters;
  j["converged"] = r.converged;
  j["primal_residual"] = number_or_null(r.primal_residual);
  j["wall_time_seconds"] = r.wall_time.count();
  return j;
}

Json to_json(const IterationRecord& r) {
  Json j;
  j["iter"] = r.iter;
  j["objective"] = number_or_null(r.objective);
  j["primal_residual"] = number_or_null(r.primal_residual);
  j["rel_obj_change"] = number_or_null(r.rel_obj_change);
  j["wall_time_cumulative_seconds"] = r.wall_time_cumulative.count();
  return j;
}

Json to_json(const SolverConfig& c) {
  Json j;
  j["mu"] = c.mu;
  j["epsilon"] = c.epsilon;
  j["max_iters"] = c.max_iters;
  j["rank_tol"] = c.rank_tol;
  return j;
}

Json to_json(const LatentModelSpec& s) {
  Json j;
  j["p_obs"] = s.p_obs;
  j["p_hidden"] = s.p_hidden;
  j["target_sparsity"] = s.target_sparsity;
  j["seed"] = s.seed;
  j["cross_block_scale"] = s.cross_block_scale;
  return j;
}

Json to_json(const CvReport& r) {
  Json j;
  j["model"] = to_string(r.model);
  j["best_lambda1"] = r.best_lambda1;
  j["best_lambda2"] = r.best_lambda2;
  j["heldout_nloglike"] = number_or_null(r.heldout_nloglike);
  j["rank_l"] = r.rank_l;
  j["nnz_offdiag_s"] = r.nnz_offdiag_s;
  j["refit_converged"] = r.refit_converged;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["folds"] = r.folds;
  j["split_seed"] = r.split_seed;
  j["invalid_cells"] = r.invalid_cells;
  Json cells = Json::array();
  for (const CvCell& c : r.cells) {
    Json cj;
    cj["lambda1"] = c.lambda1;
    cj["lambda2"] = c.lambda2;
    cj["mean_nloglike"] = number_or_null(c.mean_nloglike);
    cj["valid"] = c.valid;
    cj["unconverged_folds"] = c.unconverged_folds;
    Json folds = Json::array();
    for (double v : c.fold_nloglike) folds.push_back(number_or_null(v));
    cj["fold_nloglike"] = folds;
    if (!c.valid) cj["failure"] = c.failure;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  return j;
}

Json ground_truth_summary(const GroundTruth& gt) {
  Json j;
  j["p_obs"] = gt.k_o.dim();
  j["p_hidden"] = gt.k_h.dim();
  j["factor_density"] = gt.factor_density;
  j["realized_sparsity"] = gt.realized_sparsity;
  j["low_rank_rank"] = gt.low_rank_rank;
  j["seed_used"] = gt.seed_used;
  j["attempts"] = gt.attempts;
  return j;
}

std::string cv_grid_csv(const CvReport& r) {
  std::string out = "lambda1,lambda2,mean_nloglike,valid,unconverged_folds\n";
  for (const CvCell& c : r.cells) {
    out += to_chars17(c.lambda1) + "," + to_chars17(c.lambda2) + "," +
           (c.valid ? to_chars17(c.mean_nloglike) : std::string("nan")) + "," +
           (c.valid ? "1" : "0") + "," + std::to_string(c.unconverged_folds) + "\n";
  }
  return out;
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["argv"] = argv;
  j["tool_version"] = kToolVersion;
  j["config"] = config;
  j["seeds"] = seeds;
  Json in = Json::array();
  for (const fs::path& p : inputs) {
    in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }
  j["inputs"] = in;
  Json out = Json::object();
  for (const auto& [name, p] : outputs) {
    const bool timed = std::find(timing_outputs.begin(), timing_outputs.end(), name) !=
                       timing_outputs.end();
    out[name] = {{"path", p.filename().string()},
                 {"digest", output_digest(p)},
                 {"deterministic", !timed}};
  }
  j["outputs"] = out;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  j["wall_time_seconds"] = wall_time_seconds;
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace lvgg::io
