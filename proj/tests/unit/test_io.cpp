#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "lvgg/error.hpp"
#include "lvgg/io.hpp"
#include "testkit.hpp"

using namespace lvgg;
namespace fs = std::filesystem;
using testkit::MatrixXd;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("lvgg_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

MatrixXd awkward_matrix() {
  MatrixXd m(3, 2);
  m << 0.1, -1e-300, 1.0 / 3.0, 6.02214076e23, -0.0, std::numeric_limits<double>::denorm_min();
  return m;
}

}  // namespace

TEST(MatrixIo, BinaryRoundTripIsBitwise) {
  TempDir dir;
  testkit::Gen gen(1);
  MatrixXd m = gen.gaussian(7, 4);
  m.topRows(3) = awkward_matrix().replicate(1, 2);
  io::write_matrix(dir / "m.bin", m, io::MatrixFormat::kDenseBinary);
  const MatrixXd back = io::read_matrix(dir / "m.bin");
  ASSERT_EQ(back.rows(), 7);
  ASSERT_EQ(back.cols(), 4);
  for (Index i = 0; i < m.size(); ++i) {
    EXPECT_EQ(std::memcmp(&m.data()[i], &back.data()[i], sizeof(double)), 0);
  }
  EXPECT_EQ(fs::file_size(dir / "m.bin"), 8u + 16u + 7u * 4u * 8u);
}

TEST(MatrixIo, CsvRoundTripIsExactAtSeventeenDigits) {
  TempDir dir;
  testkit::Gen gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd m = gen.gaussian(gen.integer(1, 9), gen.integer(1, 9)) * std::pow(10.0, gen.integer(-20, 20));
    io::write_matrix(dir / "m.csv", m, io::MatrixFormat::kDenseCsv);
    EXPECT_EQ(io::read_matrix(dir / "m.csv"), m);
  }
  io::write_matrix(dir / "a.csv", awkward_matrix(), io::MatrixFormat::kDenseCsv);
  EXPECT_EQ(io::read_matrix(dir / "a.csv"), awkward_matrix());
}

TEST(MatrixIo, CsvHeaderStatesDims) {
  TempDir dir;
  io::write_matrix(dir / "m.csv", MatrixXd::Zero(2, 5), io::MatrixFormat::kDenseCsv);
  std::ifstream in(dir / "m.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# lvgg dense-csv rows=2 cols=5");
}

TEST(MatrixIo, ForeignTextInputs) {
  TempDir dir;
  write_text(dir / "ws.txt", "# comment\n1 2\t3\n4 5 6\n");
  EXPECT_EQ(io::read_matrix(dir / "ws.txt"), (MatrixXd(2, 3) << 1, 2, 3, 4, 5, 6).finished());
  write_text(dir / "named.csv", "g1,g2\n1.5,2\n-3,4e-2\n");
  EXPECT_EQ(io::read_matrix(dir / "named.csv"), (MatrixXd(2, 2) << 1.5, 2, -3, 0.04).finished());
}

TEST(MatrixIo, MalformedInputsAreRejected) {
  TempDir dir;
  write_text(dir / "ragged.csv", "1,2\n3\n");
  EXPECT_THROW(io::read_matrix(dir / "ragged.csv"), IoError);
  write_text(dir / "lying.csv", "# lvgg dense-csv rows=3 cols=2\n1,2\n3,4\n");
  EXPECT_THROW(io::read_matrix(dir / "lying.csv"), IoError);
  write_text(dir / "text.csv", "a,b\nc,d\n");
  EXPECT_THROW(io::read_matrix(dir / "text.csv"), IoError);
  write_text(dir / "empty.csv", "");
  EXPECT_THROW(io::read_matrix(dir / "empty.csv"), IoError);
  EXPECT_THROW(io::read_matrix(dir / "missing.csv"), IoError);

  io::write_matrix(dir / "m.bin", MatrixXd::Ones(2, 2), io::MatrixFormat::kDenseBinary);
  const std::string bytes = testkit::slurp(dir / "m.bin");
  write_text(dir / "short.bin", bytes.substr(0, bytes.size() - 8));
  EXPECT_THROW(io::read_matrix(dir / "short.bin"), IoError);
  write_text(dir / "long.bin", bytes + std::string(8, '\0'));
  EXPECT_THROW(io::read_matrix(dir / "long.bin"), IoError);
  write_text(dir / "hdr.bin", bytes.substr(0, 12));
  EXPECT_THROW(io::read_matrix(dir / "hdr.bin"), IoError);
}

TEST(MatrixIo, SymmetricReaderChecksShape) {
  TempDir dir;
  io::write_matrix(dir / "r.csv", MatrixXd::Ones(2, 3), io::MatrixFormat::kDenseCsv);
  EXPECT_THROW(io::read_sym_matrix(dir / "r.csv"), IoError);
  io::write_matrix(dir / "i.csv", SymMatrix::identity(3), io::MatrixFormat::kDenseCsv);
  EXPECT_EQ(io::read_sym_matrix(dir / "i.csv"), SymMatrix::identity(3));
}

TEST(Formats, Names) {
  EXPECT_EQ(io::format_from_string("csv"), io::MatrixFormat::kDenseCsv);
  EXPECT_EQ(io::format_from_string("bin"), io::MatrixFormat::kDenseBinary);
  EXPECT_STREQ(io::extension(io::MatrixFormat::kDenseBinary), ".bin");
  EXPECT_THROW(io::format_from_string("hdf5"), ConfigError);
}

TEST(Digest, KnownSha256) {
  EXPECT_EQ(io::sha256_string(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_string("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, IgnoresWallTimeKeys) {
  TempDir dir;
  write_text(dir / "a.json", R"({"x":1,"wall_time_seconds":0.5,"n":{"wall_time":3}})");
  write_text(dir / "b.json", R"({"x":1,"wall_time_seconds":9.0,"n":{"wall_time":4}})");
  write_text(dir / "c.json", R"({"x":2,"wall_time_seconds":0.5})");
  EXPECT_EQ(io::output_digest(dir / "a.json"), io::output_digest(dir / "b.json"));
  EXPECT_NE(io::output_digest(dir / "a.json"), io::output_digest(dir / "c.json"));
  write_text(dir / "a.jsonl", "{\"iter\":1,\"wall_time_cumulative_seconds\":0.1}\n");
  write_text(dir / "b.jsonl", "{\"iter\":1,\"wall_time_cumulative_seconds\":0.2}\n");
  EXPECT_EQ(io::output_digest(dir / "a.jsonl"), io::output_digest(dir / "b.jsonl"));
  write_text(dir / "a.csv", "1\n");
  EXPECT_EQ(io::output_digest(dir / "a.csv"), io::sha256_string("1\n"));
}

TEST(Json, SolverResultSchema) {
  SolverResult r;
  r.s_hat = r.a_hat = SymMatrix::identity(3);
  r.l_hat = SymMatrix::zero(3);
  r.iters = 12;
  r.converged = true;
  const io::Json j = io::to_json(r);
  for (const char* key : {"dim", "objective", "rank_l", "nnz_offdiag_s", "sparse_ratio_s",
                          "iters", "converged", "primal_residual", "wall_time_seconds"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["dim"], 3);
  EXPECT_EQ(j["iters"], 12);
}

TEST(Manifest, HashesInputsAndMarksTimingOutputs) {
  TempDir dir;
  write_text(dir / "in.csv", "1,2\n");
  write_text(dir / "out.csv", "3\n");
  write_text(dir / "time.csv", "4\n");
  io::RunManifest m;
  m.command = "solve";
  m.argv = {"solve", "--cov", "in.csv"};
  m.inputs = {dir / "in.csv"};
  m.outputs["out"] = dir / "out.csv";
  m.outputs["time"] = dir / "time.csv";
  m.timing_outputs = {"time"};
  const io::Json j = m.to_json();
  EXPECT_EQ(j["tool_version"], io::kToolVersion);
  EXPECT_EQ(j["inputs"][0]["sha256"], io::sha256_string("1,2\n"));
  EXPECT_EQ(j["outputs"]["out"]["deterministic"], true);
  EXPECT_EQ(j["outputs"]["time"]["deterministic"], false);
  EXPECT_EQ(j["outputs"]["out"]["path"], "out.csv");

  io::write_json(dir / "m.json", j);
  EXPECT_EQ(io::read_json(dir / "m.json"), j);
  write_text(dir / "bad.json", "{");
  EXPECT_THROW(io::read_json(dir / "bad.json"), IoError);
}
