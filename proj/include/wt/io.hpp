#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wt/analysis.hpp"
#include "wt/metric_space.hpp"

namespace wt {

namespace io {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes via a sibling temp file and renames into place, so readers never
/// observe a partially written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct CsvTable {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;  // nonempty iff a trailing non-numeric column
  std::size_t cols = 0;             // numeric columns
};

inline bool parse_double(const std::string& tok, double& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t' || *(e - 1) == '\r')) --e;
  if (b == e) return false;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

/// Reads a numeric CSV; a trailing non-numeric column on every row is taken
/// as labels. Malformed rows are reported with their line number.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool has_labels = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> toks;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.empty()) continue;

    std::vector<double> vals;
    vals.reserve(toks.size());
    std::string label;
    for (std::size_t t = 0; t < toks.size(); ++t) {
      double v;
      if (parse_double(toks[t], v)) {
        vals.push_back(v);
      } else if (t + 1 == toks.size()) {
        label = toks[t];
      } else {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": unparseable value '" + toks[t] + "'");
      }
    }
    if (table.rows.empty()) {
      table.cols = vals.size();
      has_labels = !label.empty();
    } else if (vals.size() != table.cols || (!label.empty()) != has_labels) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(table.cols) +
                               " numeric columns, got " + std::to_string(vals.size()));
    }
    table.rows.push_back(std::move(vals));
    if (has_labels) table.labels.push_back(label);
  }
  if (table.rows.empty()) throw std::runtime_error("empty input: " + path.string());
  return table;
}

inline std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  atomic_write(path, matrix_csv(m));
}

inline void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::string out;
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index j = 0; j < cloud.dim(); ++j) {
      if (j) out += ',';
      out += format_double(cloud.coords(i, j));
    }
    if (!cloud.labels.empty()) {
      out += ',';
      out += cloud.labels[i];
    }
    out += '\n';
  }
  atomic_write(path, out);
}

inline void write_weights(const std::filesystem::path& path, const Vector& w) {
  std::string out;
  for (Index i = 0; i < w.size(); ++i) {
    out += format_double(w(i));
    out += '\n';
  }
  atomic_write(path, out);
}

inline Vector read_weights(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.cols != 1)
    throw std::runtime_error("weights file must have one value per line: " + path.string());
  Vector w(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) w(i) = t.rows[i][0];
  return w;
}

inline Matrix to_matrix(const CsvTable& t) {
  Matrix m(t.rows.size(), t.cols);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.cols; ++j) m(i, j) = t.rows[i][j];
  return m;
}

inline PointCloud to_cloud(const CsvTable& t) {
  PointCloud cloud;
  cloud.coords = to_matrix(t);
  cloud.labels = t.labels;
  return cloud;
}

inline void write_dendrogram(const std::filesystem::path& path, const Dendrogram& d) {
  std::string out = "left,right,height,size\n";
  for (const Merge& m : d.merges) {
    out += std::to_string(m.left) + ',' + std::to_string(m.right) + ',' +
           format_double(m.height) + ',' + std::to_string(m.size) + '\n';
  }
  atomic_write(path, out);
}

inline void write_embedding(const std::filesystem::path& path, const Embedding& e) {
  std::string out = "# eigenvalues:";
  for (Index i = 0; i < e.eigenvalues.size(); ++i) {
    out += i ? ',' : ' ';
    out += format_double(e.eigenvalues(i));
  }
  out += '\n';
  out += matrix_csv(e.coords);
  atomic_write(path, out);
}

}  // namespace io

}  // namespace wt
