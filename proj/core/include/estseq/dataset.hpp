#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace estseq {

using Vec = Eigen::VectorXd;

// Non-owning view of one sparse row. Indices are 0-based and strictly
// increasing.
struct SparseRowView {
  std::span<const std::int32_t> indices;
  std::span<const double> values;

  std::size_t nnz() const { return indices.size(); }

  double dot(const Vec& x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) acc += values[k] * x[indices[k]];
    return acc;
  }

  // out += scale * row
  void axpy(double scale, Vec& out) const {
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] += scale * values[k];
  }

  double squared_norm() const {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return acc;
  }
};

// Owning sparse row, produced e.g. by applying a DropOut mask.
struct SparseRow {
  std::vector<std::int32_t> indices;
  std::vector<double> values;

  SparseRowView view() const { return {indices, values}; }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Immutable labelled sparse design matrix in CSR layout.
class Dataset {
 public:
  Dataset() = default;

  // Validates the CSR invariants; throws std::invalid_argument on violation.
  Dataset(std::int64_t dim, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> indices,
          std::vector<double> values, std::vector<double> labels, bool normalized = false,
          std::string provenance = {});

  std::size_t rows() const { return labels_.size(); }
  std::int64_t dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }

  SparseRowView row(std::size_t i) const {
    const auto begin = static_cast<std::size_t>(row_ptr_[i]);
    const auto end = static_cast<std::size_t>(row_ptr_[i + 1]);
    return {std::span(indices_).subspan(begin, end - begin),
            std::span(values_).subspan(begin, end - begin)};
  }

  double label(std::size_t i) const { return labels_[i]; }
  double row_norm(std::size_t i) const { return row_norms_[i]; }
  const std::vector<double>& labels() const { return labels_; }
  const std::vector<double>& row_norms() const { return row_norms_; }
  bool normalized() const { return normalized_; }
  const std::string& provenance() const { return provenance_; }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  // Fraction of stored entries over n * p.
  double density() const;

 private:
  std::int64_t dim_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> indices_;
  std::vector<double> values_;
  std::vector<double> labels_;
  std::vector<double> row_norms_;
  bool normalized_ = false;
  std::string provenance_;
};

// libsvm text format: "label idx:val idx:val ...", 1-based indices, '#'
// comment lines. Labels {0,1} and {-1,+1} are accepted, 0 maps to -1.
// dim_override < 0 infers the dimension from the largest index; a positive
// override must be at least that large.
Dataset parse_libsvm(std::istream& in, std::int64_t dim_override = -1,
                     const std::string& provenance = "stream");
Dataset read_libsvm(const std::filesystem::path& path, std::int64_t dim_override = -1);

// Writes values with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& data);
void write_libsvm(const std::filesystem::path& path, const Dataset& data);

// Scales each nonzero row to unit Euclidean norm; zero rows are left as-is.
Dataset normalize_rows(const Dataset& data);

// Gaussian rows normalized to unit norm, labels sign(a^T w*) for a seeded w*,
// each label flipped independently with probability flip_prob.
Dataset synthesize(std::size_t n, std::int64_t p, std::uint64_t seed, double flip_prob);

// The generator's planted separator, exposed for tests.
Vec synthetic_separator(std::int64_t p, std::uint64_t seed);

}  // namespace estseq
