#include "sfgm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sfgm {

namespace {

// Accepts comma or whitespace separated values.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!field.empty()) out.push_back(field);
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  if (!field.empty()) out.push_back(field);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::DataFormatError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::DataFormatError, "cannot write " + path.string());
  return out;
}

}  // namespace

MatrixXd load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      double v;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header line
      }
      fail(ErrorCode::DataFormatError, "non-numeric row in " + path.string());
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size())
      fail(ErrorCode::DataFormatError, "ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::DataFormatError, "empty matrix in " + path.string());
  MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void save_csv_matrix(const std::filesystem::path& path, const MatrixXd& m,
                     const std::vector<std::string>& header) {
  std::ofstream out = open_output(path);
  if (!header.empty()) {
    for (size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << header[i];
    out << "\n";
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
}

UndirectedGraph load_graph(std::istream& in) {
  std::string tag;
  int p = 0;
  if (!(in >> tag >> p) || tag != "p" || p < 1)
    fail(ErrorCode::DataFormatError, "graph file must start with 'p <int>'");
  UndirectedGraph g(p);
  int v, w;
  while (in >> v >> w) {
    if (v < 1 || w < 1 || v > p || w > p || v == w)
      fail(ErrorCode::DataFormatError, "graph file: bad edge");
    g.set_edge(v - 1, w - 1, true);
  }
  return g;
}

UndirectedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return load_graph(in);
}

void save_graph(std::ostream& out, const UndirectedGraph& g) {
  out << "p " << g.p() << "\n";
  for (const auto& [v, w] : g.edges()) out << v + 1 << " " << w + 1 << "\n";
}

ContingencyTable load_contingency_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::DataFormatError, "contingency table: empty input");
  auto fields = split_fields(line);
  if (fields.empty() || fields.front() != "vars:")
    fail(ErrorCode::DataFormatError, "contingency table: expected 'vars:' header");
  ContingencyTable table;
  table.vars.assign(fields.begin() + 1, fields.end());
  long value;
  while (in >> value) {
    if (value < 0) fail(ErrorCode::DataFormatError, "contingency table: negative count");
    table.counts.push_back(value);
  }
  if (table.counts.size() != (1u << table.vars.size()))
    fail(ErrorCode::DataFormatError, "contingency table: expected 2^p counts");
  return table;
}

ContingencyTable load_contingency_table(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return load_contingency_table(in);
}

void save_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out = open_output(path);
  const int p = trace.p;
  for (int v = 0; v < p; ++v) out << "alpha_" << v + 1 << ",";
  for (int v = 0; v < p; ++v) out << "lambda_" << v + 1 << ",";
  out << "Delta";
  for (const auto& [v, w] : trace.pairs) out << ",e_" << v + 1 << "_" << w + 1;
  out << "\n";
  for (int i = 0; i < trace.iterations(); ++i) {
    for (int v = 0; v < p; ++v) out << format_double(trace.alpha(i, v)) << ",";
    for (int v = 0; v < p; ++v) out << format_double(trace.lambda(i, v)) << ",";
    out << format_double(trace.delta(i));
    for (int e = 0; e < static_cast<int>(trace.pairs.size()); ++e)
      out << "," << static_cast<int>(trace.edges(i, e));
    out << "\n";
  }
}

void save_trace_k_sidecar(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out = open_output(path);
  out << "iteration,v,w,value\n";
  for (int i = 0; i < trace.iterations(); ++i) {
    int idx = 0;
    for (int v = 0; v < trace.p; ++v)
      for (int w = 0; w <= v; ++w) {
        const double value = trace.ktri(i, idx++);
        if (value != 0.0)
          out << i + 1 << "," << w + 1 << "," << v + 1 << ","
              << format_double(value) << "\n";
      }
  }
}

Trace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::DataFormatError, "trace: empty file " + path.string());
  const auto header = split_fields(line);
  int p = 0;
  while (p < static_cast<int>(header.size()) &&
         header[p] == "alpha_" + std::to_string(p + 1))
    ++p;
  if (p == 0) fail(ErrorCode::SchemaMismatch, "trace: missing alpha columns");
  const int m = p * (p - 1) / 2;
  const size_t expected = 2 * p + 1 + m;
  if (header.size() != expected)
    fail(ErrorCode::SchemaMismatch, "trace: unexpected column count");
  for (int v = 0; v < p; ++v)
    if (header[p + v] != "lambda_" + std::to_string(v + 1))
      fail(ErrorCode::SchemaMismatch, "trace: missing lambda columns");
  if (header[2 * p] != "Delta") fail(ErrorCode::SchemaMismatch, "trace: missing Delta");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != expected)
      fail(ErrorCode::SchemaMismatch, "trace: ragged row");
    std::vector<double> row(expected);
    for (size_t i = 0; i < expected; ++i)
      if (!parse_double(fields[i], row[i]))
        fail(ErrorCode::DataFormatError, "trace: non-numeric value");
    rows.push_back(std::move(row));
  }
  Trace t = Trace::allocate(p, static_cast<int>(rows.size()), 0);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int v = 0; v < p; ++v) {
      t.alpha(i, v) = rows[i][v];
      t.lambda(i, v) = rows[i][p + v];
    }
    t.delta(i) = rows[i][2 * p];
    for (int e = 0; e < m; ++e)
      t.edges(i, e) = rows[i][2 * p + 1 + e] > 0.5 ? 1 : 0;
  }
  t.ktri.setZero();
  return t;
}

void save_cumulative_edges(const std::filesystem::path& path, const VectorXd& series) {
  std::ofstream out = open_output(path);
  out << "iteration,cumulative_expected_edges\n";
  for (Eigen::Index i = 0; i < series.size(); ++i)
    out << i + 1 << "," << format_double(series(i)) << "\n";
}

}  // namespace sfgm
