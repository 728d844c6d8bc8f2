#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "estseq/dataset.hpp"
#include "estseq/rng.hpp"

using namespace estseq;

namespace {

Dataset parse(const std::string& text, std::int64_t dim = -1) {
  std::istringstream in(text);
  return parse_libsvm(in, dim);
}

}  // namespace

TEST(Libsvm, ParsesSparseRow) {
  const auto d = parse("+1 1:0.5 3:0.5\n");
  ASSERT_EQ(d.rows(), 1u);
  EXPECT_EQ(d.row(0).nnz(), 2u);
  EXPECT_GE(d.dim(), 3);
  EXPECT_EQ(d.row(0).indices[1], 2);  // 0-based internally
  EXPECT_EQ(d.label(0), 1.0);
}

TEST(Libsvm, ZeroLabelMapsToMinusOne) {
  EXPECT_EQ(parse("0 2:1\n").label(0), -1.0);
  EXPECT_EQ(parse("-1 2:1\n").label(0), -1.0);
  EXPECT_EQ(parse("1 2:1\n").label(0), 1.0);
}

TEST(Libsvm, SkipsCommentsAndBlankLines) {
  const auto d = parse("# header\n\n+1 1:1\n# note\n-1 2:2\n");
  EXPECT_EQ(d.rows(), 2u);
}

TEST(Libsvm, EmptyRowAllowed) {
  const auto d = parse("+1\n-1 1:2\n");
  EXPECT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.row(0).nnz(), 0u);
}

TEST(Libsvm, DimensionOverride) {
  EXPECT_EQ(parse("+1 1:1\n", 10).dim(), 10);
  EXPECT_THROW(parse("+1 5:1\n", 3), std::invalid_argument);
}

TEST(Libsvm, RoundTripIsExact) {
  Dataset d = synthesize(50, 9, 3, 0.1);
  std::ostringstream out;
  write_libsvm(out, d);
  std::istringstream in(out.str());
  const Dataset e = parse_libsvm(in, d.dim());
  ASSERT_EQ(e.rows(), d.rows());
  EXPECT_EQ(e.values(), d.values());
  EXPECT_EQ(e.indices(), d.indices());
  EXPECT_EQ(e.labels(), d.labels());
}

TEST(Libsvm, ErrorsCarryLineNumbers) {
  const std::vector<std::pair<std::string, std::size_t>> bad = {
      {"+1 1:1\n2 1:1\n", 2},          // non-binary label
      {"+1 1:1\nx 1:1\n", 2},          // malformed label
      {"+1 1:1\n+1 1:1\n+1 a:1\n", 3},  // malformed index
      {"+1 0:1\n", 1},                 // 0 index
      {"+1 3:1 2:1\n", 1},             // decreasing indices
      {"+1 1:\n", 1},                  // missing value
      {"+1 1-1\n", 1},                 // missing colon
  };
  for (const auto& [text, line] : bad) {
    try {
      parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_GE(e.column(), 1u);
    }
  }
}

TEST(Libsvm, FuzzValidLinesNeverFail) {
  RandomStream rng(77);
  for (int t = 0; t < 300; ++t) {
    std::ostringstream os;
    const int rows = 1 + static_cast<int>(rng.uniform_index(5));
    for (int r = 0; r < rows; ++r) {
      const char* labels[] = {"+1", "-1", "0", "1"};
      os << labels[rng.uniform_index(4)];
      int idx = 0;
      const int nnz = static_cast<int>(rng.uniform_index(6));
      for (int k = 0; k < nnz; ++k) {
        idx += 1 + static_cast<int>(rng.uniform_index(4));
        os << (rng.bernoulli(0.5) ? " " : "\t") << idx << ':' << rng.normal() * 10.0;
      }
      os << (rng.bernoulli(0.3) ? "  \n" : "\n");
    }
    EXPECT_NO_THROW(parse(os.str())) << os.str();
  }
}

TEST(Normalize, ScalesRowsToUnitNorm) {
  const auto d = normalize_rows(parse("+1 1:3 2:4\n-1\n"));
  EXPECT_DOUBLE_EQ(d.row(0).values[0], 0.6);
  EXPECT_DOUBLE_EQ(d.row(0).values[1], 0.8);
  EXPECT_EQ(d.row(1).nnz(), 0u);
  EXPECT_TRUE(d.normalized());
}

TEST(Normalize, IsIdempotent) {
  const auto once = normalize_rows(parse("+1 1:3 2:4 5:-1\n-1 2:0.1\n"));
  const auto twice = normalize_rows(once);
  for (std::size_t k = 0; k < once.values().size(); ++k)
    EXPECT_NEAR(once.values()[k], twice.values()[k], 1e-15);
  for (std::size_t i = 0; i < once.rows(); ++i) EXPECT_NEAR(once.row_norm(i), 1.0, 1e-9);
}

TEST(Synthesize, Deterministic) {
  const auto a = synthesize(100, 5, 9, 0.1);
  const auto b = synthesize(100, 5, 9, 0.1);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_EQ(a.labels(), b.labels());
  EXPECT_NE(synthesize(100, 5, 10, 0.1).values(), a.values());
}

TEST(Synthesize, UnitRowsAndSeparable) {
  const auto d = synthesize(2000, 10, 4, 0.0);
  const Vec w = synthetic_separator(10, 4);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_NEAR(d.row_norm(i), 1.0, 1e-9);
    EXPECT_GT(d.label(i) * d.row(i).dot(w), 0.0);
  }
}

TEST(Synthesize, LabelBalance) {
  const auto d = synthesize(10000, 20, 5, 0.1);
  double pos = 0.0;
  for (double b : d.labels()) pos += b > 0.0;
  EXPECT_NEAR(pos / 10000.0, 0.5, 0.05);
}

TEST(Synthesize, RejectsBadArguments) {
  EXPECT_THROW(synthesize(0, 5, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(synthesize(5, 5, 1, 0.5), std::invalid_argument);
}

TEST(Dataset, RejectsBrokenCsr) {
  EXPECT_THROW(Dataset(3, {0, 1}, {5}, {1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(Dataset(3, {0, 2}, {1, 1}, {1.0, 1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(Dataset(3, {0, 1}, {1}, {1.0}, {2.0}), std::invalid_argument);
}
