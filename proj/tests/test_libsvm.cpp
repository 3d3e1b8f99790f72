#include "shufflebench/libsvm.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shufflebench/rng.hpp"
#include "test_support.hpp"

using namespace shufflebench;
namespace ts = shufflebench::testing;

namespace {

Dataset random_dataset(int n, int d, std::uint64_t seed) {
  rng::Stream stream(seed);
  Dataset ds;
  ds.d = d;
  for (int i = 0; i < n; ++i) {
    Dataset::Row row;
    row.label = stream.next_double() < 0.5 ? -1 : 1;
    int index = 0;
    while (true) {
      index += 1 + static_cast<int>(stream.next_below(4));
      if (index > d) break;
      double value = stream.next_gaussian();
      if (stream.next_double() < 0.1) value = stream.next_double() * 1e-7;
      if (stream.next_double() < 0.1) value *= 1e9;
      row.features.push_back({index, value});
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

}  // namespace

TEST_CASE("basic row parses with indices, values and d") {
  const Dataset ds = parse_libsvm(std::string("+1 3:0.5 7:1.0\n"));
  REQUIRE(ds.n() == 1);
  CHECK(ds.d == 7);
  CHECK(ds.rows[0].label == 1);
  REQUIRE(ds.rows[0].features.size() == 2);
  CHECK(ds.rows[0].features[0] == Dataset::Feature{3, 0.5});
  CHECK(ds.rows[0].features[1] == Dataset::Feature{7, 1.0});

  const DatasetStats st = dataset_stats(ds);
  CHECK(st.nnz == 2);
  CHECK(st.max_row_norm_sq == doctest::Approx(1.25));
}

TEST_CASE("label mapping covers the binary-set conventions") {
  const Dataset ds =
      parse_libsvm(std::string("0 1:2.0\n1 1:1\n-1 1:1\n2 1:1\n+1 1:1\n"));
  CHECK(ds.rows[0].label == -1);
  CHECK(ds.rows[1].label == 1);
  CHECK(ds.rows[2].label == -1);
  CHECK(ds.rows[3].label == -1);
  CHECK(ds.rows[4].label == 1);
  CHECK_THROWS_AS(parse_libsvm(std::string("3 1:1\n")), libsvm_error);
}

TEST_CASE("comments, blank lines and CRLF endings are tolerated") {
  const std::string text =
      "# header comment\n"
      "\n"
      "+1 1:1.0 2:2.0 # trailing comment\r\n"
      "   \n"
      "-1 2:0.25\n";
  const Dataset ds = parse_libsvm(text);
  CHECK(ds.n() == 2);
  CHECK(ds.d == 2);
  CHECK(ds.rows[0].features.size() == 2);
}

TEST_CASE("parse errors carry line and column positions") {
  try {
    parse_libsvm(std::string("+1 1:1.0\n-1 5:bad\n"));
    FAIL("expected libsvm_error");
  } catch (const libsvm_error& e) {
    CHECK(e.kind() == libsvm_error::Kind::Malformed);
    CHECK(e.line() == 2);
    CHECK(e.column() == 4);
  }
}

TEST_CASE("non-increasing indices are rejected, never reordered") {
  CHECK_THROWS_AS(parse_libsvm(std::string("+1 3:1 2:1\n")), libsvm_error);
  CHECK_THROWS_AS(parse_libsvm(std::string("+1 3:1 3:2\n")), libsvm_error);
  try {
    parse_libsvm(std::string("+1 3:1 2:1\n"));
  } catch (const libsvm_error& e) {
    CHECK(e.kind() == libsvm_error::Kind::NonMonotonicIndex);
  }
}

TEST_CASE("empty input is an error") {
  CHECK_THROWS_AS(parse_libsvm(std::string("")), libsvm_error);
  CHECK_THROWS_AS(parse_libsvm(std::string("# only comments\n\n")),
                  libsvm_error);
}

TEST_CASE("serialization round-trips the documented edge cases") {
  const Dataset ds = parse_libsvm(std::string("+1 3:0.5 7:1.0\n"));
  CHECK(parse_libsvm(serialize_libsvm(ds)) == ds);

  // a feature-free row serializes to the bare label and re-parses empty
  Dataset bare;
  bare.d = 1;
  bare.rows.push_back({1, {}});
  bare.rows.push_back({-1, {{1, 2.5}}});
  const std::string text = serialize_libsvm(bare);
  CHECK(text.substr(0, 3) == "+1\n");
  const Dataset back = parse_libsvm(text);
  CHECK(back.rows[0].features.empty());
  CHECK(back == bare);
}

TEST_CASE("round-trip is field-exact on 1000 random sparse rows") {
  const Dataset ds = random_dataset(1000, 60, 0xABCDEF);
  const Dataset back = parse_libsvm(serialize_libsvm(ds));
  REQUIRE(back.n() == ds.n());
  CHECK(back == ds);
  // serialize is canonical: a second trip is byte-identical
  CHECK(serialize_libsvm(back) == serialize_libsvm(ds));
}

TEST_CASE("dataset stats count balance and norms") {
  const Dataset ds = parse_libsvm(std::string("+1 1:3\n-1 2:4\n"));
  const DatasetStats st = dataset_stats(ds);
  CHECK(st.n == 2);
  CHECK(st.d == 2);
  CHECK(st.class_balance == doctest::Approx(0.5));
  CHECK(st.max_row_norm_sq == doctest::Approx(16.0));
}

TEST_CASE("the w1a-style fixture has the documented shape") {
  const Dataset ds =
      load_libsvm(ts::repo_root() + "/data/w1a_fixture.libsvm");
  const DatasetStats st = dataset_stats(ds);
  CHECK(st.n == 500);
  CHECK(st.d == 300);
}

TEST_CASE("gzip-compressed files load transparently") {
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string plain = dir + "/shufflebench_gz_test.libsvm";
  const std::string gz = plain + ".gz";
  {
    std::ofstream out(plain);
    out << "+1 1:0.5 4:2\n-1 2:1\n";
  }
  REQUIRE(std::system(("gzip -kf " + plain).c_str()) == 0);
  const Dataset a = load_libsvm(plain);
  const Dataset b = load_libsvm(gz);
  CHECK(a == b);
  std::remove(plain.c_str());
  std::remove(gz.c_str());
}

TEST_CASE("row subsampling is deterministic, ordered, and keeps d") {
  const Dataset ds = random_dataset(50, 40, 0x1234);
  const Dataset sub1 = subsample_rows(ds, 20, 7);
  const Dataset sub2 = subsample_rows(ds, 20, 7);
  CHECK(sub1 == sub2);
  CHECK(sub1.n() == 20);
  CHECK(sub1.d == ds.d);
  const Dataset sub3 = subsample_rows(ds, 20, 8);
  CHECK(sub1.rows != sub3.rows);
  CHECK_THROWS_AS(subsample_rows(ds, 0, 1), libsvm_error);
  CHECK_THROWS_AS(subsample_rows(ds, 51, 1), libsvm_error);
}

TEST_CASE("max-abs scaling maps the largest magnitude per feature to 1") {
  const Dataset ds = parse_libsvm(std::string("+1 1:-4 2:1\n-1 1:2 2:0.5\n"));
  const Dataset scaled = scale_max_abs(ds);
  CHECK(scaled.rows[0].features[0].value == doctest::Approx(-1.0));
  CHECK(scaled.rows[1].features[0].value == doctest::Approx(0.5));
  CHECK(scaled.rows[0].features[1].value == doctest::Approx(1.0));
}
