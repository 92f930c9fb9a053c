#include <cmath>

#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"

namespace socialgat::embed {

EmbeddingTable::EmbeddingTable(std::size_t dim, bool trainable) : dim_(dim), trainable_(trainable) {
  if (dim == 0) throw ParameterError("embedding dimension must be positive");
}

void EmbeddingTable::set(const std::string& id, std::span<const double> values) {
  if (values.size() != dim_) {
    throw ShapeError("vector for '" + id + "' has " + std::to_string(values.size()) +
                     " values, table dimension is " + std::to_string(dim_));
  }
  const auto it = index_.find(id);
  if (it != index_.end()) {
    std::copy(values.begin(), values.end(), data_.begin() + it->second * dim_);
    return;
  }
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
  data_.insert(data_.end(), values.begin(), values.end());
}

bool EmbeddingTable::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

std::span<const double> EmbeddingTable::vector(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) throw LookupError("no embedding for '" + std::string(id) + "'");
  return std::span<const double>(data_).subspan(it->second * dim_, dim_);
}

num::Tensor EmbeddingTable::tensor(std::string_view id) const {
  const auto v = vector(id);
  return num::Tensor::vector({v.begin(), v.end()});
}

num::Tensor EmbeddingTable::lookup_or_centroid(std::string_view id) const {
  if (contains(id)) return tensor(id);
  return centroid_fallback(*this);
}

num::Tensor centroid_fallback(const EmbeddingTable& table) {
  if (table.empty()) throw StateError("centroid of an empty embedding table");
  num::Tensor c(num::Shape::vector(table.dim()));
  for (const auto& id : table.ids()) {
    const auto v = table.vector(id);
    for (std::size_t i = 0; i < v.size(); ++i) c[i] += v[i];
  }
  const double n = static_cast<double>(table.size());
  for (double& x : c.data()) x /= n;
  return c;
}

EmbeddingTable uniform_table(std::span<const std::string> ids, std::size_t dim, num::Rng& rng) {
  EmbeddingTable table(dim);
  const double half = 0.5 / static_cast<double>(dim);
  std::vector<double> v(dim);
  for (const auto& id : ids) {
    for (double& x : v) x = rng.uniform(-half, half);
    table.set(id, v);
  }
  return table;
}

EmbeddingTable random_author_embeddings(std::span<const std::string> ids, std::size_t dim,
                                        num::Rng& rng) {
  EmbeddingTable table = uniform_table(ids, dim, rng);
  table.set_trainable(true);
  return table;
}

std::string format_embeddings(const EmbeddingTable& table) {
  std::string out;
  for (const auto& id : table.ids()) {
    if (id.find_first_of(" \t\n") != std::string::npos) {
      throw ParameterError("embedding id '" + id + "' contains whitespace");
    }
    out += id;
    for (double x : table.vector(id)) {
      out += ' ';
      io::append_double(out, x);
    }
    out += '\n';
  }
  return out;
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  io::write_file_atomic(path, format_embeddings(table));
}

EmbeddingTable load_word_vectors(const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  std::optional<EmbeddingTable> table;
  std::vector<double> values;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto parts = io::split_whitespace(lines[i]);
    if (parts.empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (parts.size() < 2) throw ParseError(where + ": expected 'token v1 ... vd'");
    values.clear();
    for (std::size_t k = 1; k < parts.size(); ++k) {
      try {
        values.push_back(io::parse_double(parts[k]));
      } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
    if (!table) table.emplace(values.size());
    if (values.size() != table->dim()) {
      throw ParseError(where + ": has " + std::to_string(values.size()) +
                       " values, expected " + std::to_string(table->dim()));
    }
    table->set(std::string(parts[0]), values);
  }
  if (!table) throw ParseError(path.string() + ": no vectors found");
  return *std::move(table);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace socialgat::embed
