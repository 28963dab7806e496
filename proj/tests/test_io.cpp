#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "pinvpert/generators.hpp"
#include "pinvpert/matrix_market.hpp"
#include "pinvpert/report.hpp"
#include "pinvpert/verify.hpp"

using namespace pinvpert;
using namespace std::complex_literals;
using Kind = MatrixMarketError::Kind;

namespace {

Matrix parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

void expect_error(const std::string& text, Kind kind, std::size_t line) {
  try {
    parse(text);
    ADD_FAILURE() << "no error for:\n" << text;
  } catch (const MatrixMarketError& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos);
  }
}

}  // namespace

TEST(ReadMatrix, ArrayRealIsColumnMajor) {
  EXPECT_EQ(parse("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n"), Matrix::identity(2));
  EXPECT_EQ(parse("%%MatrixMarket matrix array real general\n% comment\n\n2 3\n1\n2\n3\n4\n5\n6\n"),
            (Matrix{{1, 3, 5}, {2, 4, 6}}));
}

TEST(ReadMatrix, CoordinateComplexSingleEntry) {
  const Matrix m = parse("%%MatrixMarket matrix coordinate complex general\n2 3 1\n1 1 2 3\n");
  Matrix expected(2, 3);
  expected(0, 0) = 2.0 + 3.0i;
  EXPECT_EQ(m, expected);
}

TEST(ReadMatrix, HeaderIsCaseInsensitiveAndDuplicatesAreSummed) {
  const Matrix m = parse("%%MatrixMarket MATRIX Coordinate Real General\n2 2 3\n1 2 1.5\n1 2 0.5\n2 1 -1\n");
  EXPECT_EQ(m, (Matrix{{0, 2}, {-1, 0}}));
}

TEST(ReadMatrix, DistinctDiagnosticsWithLineNumbers) {
  expect_error("%%NotMatrixMarket matrix array real general\n1 1\n1\n", Kind::malformed_header, 1);
  expect_error("%%MatrixMarket matrix array real symmetric\n2 2\n1\n0\n1\n", Kind::unsupported_symmetry, 1);
  expect_error("%%MatrixMarket matrix array pattern general\n2 2\n", Kind::unsupported_field, 1);
  expect_error("%%MatrixMarket matrix list real general\n2 2\n", Kind::unsupported_format, 1);
  expect_error("%%MatrixMarket matrix array real general\n2\n1\n", Kind::malformed_size, 2);
  expect_error("%%MatrixMarket matrix array real general\n2 1\n1\nabc\n", Kind::non_numeric_token, 4);
  expect_error("%%MatrixMarket matrix array complex general\n1 1\n1\n", Kind::wrong_token_count, 3);
  expect_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", Kind::index_out_of_range, 3);
  expect_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n", Kind::index_out_of_range, 3);
  expect_error("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n", Kind::entry_count_mismatch, 5);
}

TEST(ReadMatrix, MissingFileIsAnIoError) {
  try {
    read_matrix(std::string("/nonexistent/dir/x.mtx"));
    FAIL();
  } catch (const MatrixMarketError& e) {
    EXPECT_EQ(e.kind(), Kind::io);
  }
}

TEST(WriteMatrix, ZeroMatrixCoordinateHasNoEntryLines) {
  std::ostringstream out;
  write_matrix(Matrix::zeros(3, 2), out, MatrixMarketFormat::coordinate);
  EXPECT_EQ(out.str(), "%%MatrixMarket matrix coordinate real general\n3 2 0\n");
  EXPECT_EQ(parse(out.str()), Matrix::zeros(3, 2));
}

TEST(WriteMatrix, IdentityArrayParses) {
  std::ostringstream out;
  write_matrix(Matrix::identity(3), out);
  EXPECT_EQ(out.str().substr(0, 41), "%%MatrixMarket matrix array real general\n");
  EXPECT_EQ(parse(out.str()), Matrix::identity(3));
}

TEST(WriteMatrix, FieldIsComplexOnlyWhenNeeded) {
  std::ostringstream real, cplx;
  write_matrix(Matrix{{1, 2}}, real);
  write_matrix(Matrix{{1, 2.0 + 1e-300i}}, cplx);
  EXPECT_NE(real.str().find(" real "), std::string::npos);
  EXPECT_NE(cplx.str().find(" complex "), std::string::npos);
}

TEST(WriteMatrix, RoundTripIsExact) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix m = gaussian_matrix(1 + trial % 5, 1 + trial % 4, rng) * (trial % 2 ? 1e-7 : 3e5);
    for (auto format : {MatrixMarketFormat::array, MatrixMarketFormat::coordinate}) {
      std::stringstream io;
      write_matrix(m, io, format);
      EXPECT_EQ(read_matrix(io), m);
    }
  }
  const Matrix four = gaussian_matrix(4, 4, rng);
  std::stringstream io;
  write_matrix(four, io);
  EXPECT_LE(max_abs_entry(read_matrix(io) - four), 1e-15);
}

TEST(WriteMatrix, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "pinvpert_io_test.mtx";
  const Matrix m = random_operator({3, 4, 2, 0.5, 1.5, 7});
  write_matrix(m, path.string(), MatrixMarketFormat::coordinate);
  EXPECT_EQ(read_matrix(path.string()), m);
  std::filesystem::remove(path);
}

TEST(Report, SerializationRoundTrips) {
  Report r;
  r.command = "check";
  r.inputs = {{"T", "t.mtx"}, {"S", "s.mtx"}};
  const Matrix t = random_operator({4, 3, 2, 0.3, 1.7, 2});
  r.verdicts["hypotheses"] = to_json(check_stewart_hypotheses(t, s_alpha(t, 0.1), {}));
  r.verdicts["third"] = 1.0 / 3.0;
  r.verdicts["tiny"] = 4.9406564584124654e-324;
  r.verdicts["missing"] = number(std::optional<double>{});
  r.verdicts["nan"] = number(std::nan(""));
  r.timings = {{"read", 0.125}, {"check", 1.0 / 7.0}};
  r.tolerances_used.eq_abs = 3e-11;

  const std::string text = serialize(r);
  const Report back = parse_report(text);
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize(back), text);
  EXPECT_TRUE(back.verdicts["nan"].is_null());
  EXPECT_EQ(back.verdicts["third"].get<double>(), 1.0 / 3.0);
}

TEST(Report, FloatsCarrySeventeenSignificantDigits) {
  EXPECT_EQ(dump_json(Json(0.1), 0), "1.0000000000000001e-01");
  EXPECT_EQ(dump_json(Json(-2.5), 0), "-2.5000000000000000e+00");
  EXPECT_EQ(dump_json(Json(42), 0), "42");
}

TEST(Report, VerifySummaryIsJobCountIndependent) {
  VerifyOptions o;
  o.trials = 12;
  o.seed = 42;
  o.max_dim = 6;
  const std::string one = dump_json(to_json(run_verification(o)));
  o.jobs = 3;
  EXPECT_EQ(dump_json(to_json(run_verification(o))), one);
}
