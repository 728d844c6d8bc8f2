#include "estseq/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "estseq/rng.hpp"

namespace estseq {

Dataset::Dataset(std::int64_t dim, std::vector<std::int64_t> row_ptr,
                 std::vector<std::int32_t> indices, std::vector<double> values,
                 std::vector<double> labels, bool normalized, std::string provenance)
    : dim_(dim),
      row_ptr_(std::move(row_ptr)),
      indices_(std::move(indices)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      normalized_(normalized),
      provenance_(std::move(provenance)) {
  if (dim_ < 0) throw std::invalid_argument("dataset dimension must be non-negative");
  if (row_ptr_.size() != labels_.size() + 1 || row_ptr_.front() != 0 ||
      static_cast<std::size_t>(row_ptr_.back()) != values_.size() ||
      indices_.size() != values_.size()) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
  row_norms_.resize(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1.0 && labels_[i] != -1.0)
      throw std::invalid_argument("labels must be -1 or +1");
    if (row_ptr_[i + 1] < row_ptr_[i]) throw std::invalid_argument("row pointers must not decrease");
    const auto r = row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      if (r.indices[k] < 0 || r.indices[k] >= dim_)
        throw std::invalid_argument("column index out of range in row " + std::to_string(i));
      if (k > 0 && r.indices[k] <= r.indices[k - 1])
        throw std::invalid_argument("column indices not strictly increasing in row " +
                                    std::to_string(i));
      if (!std::isfinite(r.values[k]))
        throw std::invalid_argument("non-finite value in row " + std::to_string(i));
    }
    row_norms_[i] = std::sqrt(r.squared_norm());
  }
}

double Dataset::density() const {
  const double cells = static_cast<double>(rows()) * static_cast<double>(dim_);
  return cells > 0 ? static_cast<double>(nnz()) / cells : 0.0;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

template <typename T>
bool parse_number(std::string_view token, T& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::int64_t dim_override, const std::string& provenance) {
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> indices;
  std::vector<double> values;
  std::vector<double> labels;
  std::int64_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t pos = 0;
    while (pos < line.size() && is_space(line[pos])) ++pos;
    if (pos == line.size() || line[pos] == '#') continue;

    auto next_token = [&](std::size_t& start) {
      while (pos < line.size() && is_space(line[pos])) ++pos;
      start = pos;
      while (pos < line.size() && !is_space(line[pos])) ++pos;
      return std::string_view(line).substr(start, pos - start);
    };

    std::size_t start = 0;
    const auto label_tok = next_token(start);
    double label = 0.0;
    if (!parse_number(label_tok, label))
      throw ParseError(line_no, start + 1, "malformed label '" + std::string(label_tok) + "'");
    if (label == 0.0) {
      label = -1.0;
    } else if (label != 1.0 && label != -1.0) {
      throw ParseError(line_no, start + 1,
                       "non-binary label '" + std::string(label_tok) + "' (expected 0/1 or -1/+1)");
    }

    std::int64_t prev = 0;
    while (true) {
      const auto tok = next_token(start);
      if (tok.empty()) break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, start + 1, "expected idx:val, got '" + std::string(tok) + "'");
      std::int64_t idx = 0;
      double val = 0.0;
      if (!parse_number(tok.substr(0, colon), idx))
        throw ParseError(line_no, start + 1, "malformed index in '" + std::string(tok) + "'");
      if (!parse_number(tok.substr(colon + 1), val) || !std::isfinite(val))
        throw ParseError(line_no, start + colon + 2,
                         "malformed value in '" + std::string(tok) + "'");
      if (idx < 1) throw ParseError(line_no, start + 1, "indices are 1-based");
      if (idx <= prev)
        throw ParseError(line_no, start + 1, "indices must be strictly increasing");
      if (idx > std::numeric_limits<std::int32_t>::max())
        throw ParseError(line_no, start + 1, "index too large");
      prev = idx;
      max_index = std::max(max_index, idx);
      indices.push_back(static_cast<std::int32_t>(idx - 1));
      values.push_back(val);
    }
    labels.push_back(label);
    row_ptr.push_back(static_cast<std::int64_t>(values.size()));
  }

  std::int64_t dim = max_index;
  if (dim_override >= 0) {
    if (dim_override < max_index)
      throw std::invalid_argument("dimension override " + std::to_string(dim_override) +
                                  " is smaller than the largest index " +
                                  std::to_string(max_index));
    dim = dim_override;
  }
  return Dataset(dim, std::move(row_ptr), std::move(indices), std::move(values),
                 std::move(labels), false, provenance);
}

Dataset read_libsvm(const std::filesystem::path& path, std::int64_t dim_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file " + path.string());
  return parse_libsvm(in, dim_override, path.string());
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out << (data.label(i) > 0 ? "+1" : "-1");
    const auto r = data.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g", r.indices[k] + 1, r.values[k]);
      out << buf;
    }
    out << '\n';
  }
}

void write_libsvm(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
  write_libsvm(out, data);
}

Dataset normalize_rows(const Dataset& data) {
  std::vector<double> values = data.values();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double norm = data.row_norm(i);
    if (norm == 0.0) continue;
    for (auto k = data.row_ptr()[i]; k < data.row_ptr()[i + 1]; ++k)
      values[static_cast<std::size_t>(k)] /= norm;
  }
  return Dataset(data.dim(), data.row_ptr(), data.indices(), std::move(values), data.labels(),
                 true, data.provenance());
}

Vec synthetic_separator(std::int64_t p, std::uint64_t seed) {
  RandomStream rng(mix_seed(seed, hash_tag("separator")));
  Vec w(p);
  for (std::int64_t j = 0; j < p; ++j) w[j] = rng.normal();
  return w;
}

Dataset synthesize(std::size_t n, std::int64_t p, std::uint64_t seed, double flip_prob) {
  if (n < 1 || p < 1) throw std::invalid_argument("synthesize: n and p must be at least 1");
  if (!(flip_prob >= 0.0 && flip_prob < 0.5))
    throw std::invalid_argument("synthesize: flip probability must lie in [0, 0.5)");

  const Vec w = synthetic_separator(p, seed);
  RandomStream rows_rng(mix_seed(seed, hash_tag("rows")));
  RandomStream flip_rng(mix_seed(seed, hash_tag("flips")));

  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> indices;
  std::vector<double> values;
  std::vector<double> labels;
  row_ptr.reserve(n + 1);
  indices.reserve(n * static_cast<std::size_t>(p));
  values.reserve(n * static_cast<std::size_t>(p));
  labels.reserve(n);

  Vec a(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < p; ++j) a[j] = rows_rng.normal();
    a /= a.norm();
    double label = a.dot(w) >= 0.0 ? 1.0 : -1.0;
    if (flip_rng.bernoulli(flip_prob)) label = -label;
    for (std::int64_t j = 0; j < p; ++j) {
      indices.push_back(static_cast<std::int32_t>(j));
      values.push_back(a[j]);
    }
    labels.push_back(label);
    row_ptr.push_back(static_cast<std::int64_t>(values.size()));
  }

  std::ostringstream tag;
  tag << "synthetic(n=" << n << ",p=" << p << ",seed=" << seed << ",flip=" << flip_prob << ")";
  return Dataset(p, std::move(row_ptr), std::move(indices), std::move(values), std::move(labels),
                 true, tag.str());
}

}  // namespace estseq
