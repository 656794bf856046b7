#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "revtrace/errors.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

// Word vectors keyed by lowercased surface form.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {
    if (dimension == 0) throw FormatError("embedding dimension must be positive");
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, std::vector<double>>& entries() const noexcept { return entries_; }

  // Later additions of the same (lowercased) word replace earlier ones.
  void add(std::string_view word, std::vector<double> vec) {
    if (vec.size() != dim_)
      throw FormatError("vector for '" + std::string(word) + "' has " + std::to_string(vec.size()) +
                        " components, expected " + std::to_string(dim_));
    entries_[to_lower(word)] = std::move(vec);
  }

  const std::vector<double>* find(std::string_view word) const {
    auto it = entries_.find(to_lower(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool contains(std::string_view word) const { return find(word) != nullptr; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> entries_;
};

// word2vec text format: optional "count dim" header, then "word v1 .. vd".
inline EmbeddingTable load_embeddings(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  EmbeddingTable table;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0, header_dim = 0;
      if (fields.size() == 2 && detail::parse_number(fields[0], count) && detail::parse_number(fields[1], header_dim)) {
        if (header_dim == 0) throw FormatError("line 1: header declares dimension 0");
        dim = header_dim;
        table = EmbeddingTable(dim);
        continue;
      }
    }
    if (fields.size() < 2) throw FormatError("line " + std::to_string(lineno) + ": word without vector");
    if (dim == 0) {
      dim = fields.size() - 1;
      table = EmbeddingTable(dim);
    }
    if (fields.size() - 1 != dim)
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim) + " values, got " +
                        std::to_string(fields.size() - 1));
    std::vector<double> vec(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!detail::parse_number(fields[k + 1], vec[k]) || !std::isfinite(vec[k]))
        throw FormatError("line " + std::to_string(lineno) + ": bad number '" + std::string(fields[k + 1]) + "'");
    }
    table.add(fields[0], std::move(vec));
  }
  if (table.size() == 0) throw FormatError("no embedding vectors in input");
  return table;
}

inline EmbeddingTable load_embeddings(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_embeddings(in);
}

}  // namespace revtrace
