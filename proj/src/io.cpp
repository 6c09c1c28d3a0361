#include "leap/io.hpp"

#include "leap/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace leap {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(const std::string& source, int line, const std::string& column) {
  return source + ": line " + std::to_string(line) + ", column '" + column + "'";
}

struct Layout {
  int y = -1;
  int z = -1;
  std::vector<int> x;
};

Layout layout_of(const CsvTable& t, DataRole role, ModelKind kind, const std::string& source) {
  Layout l;
  for (int j = 0; j < static_cast<int>(t.header.size()); ++j) {
    const auto& name = t.header[static_cast<std::size_t>(j)];
    if (name == "y") {
      l.y = j;
    } else if (name == "z") {
      if (role == DataRole::historical)
        throw validation_error(source + ": historical data must not carry a 'z' column");
      l.z = j;
    } else {
      l.x.push_back(j);
    }
  }
  if (l.y < 0) throw validation_error(source + ": missing required column 'y'");
  if (t.rows.empty()) throw validation_error(source + ": n >= 1 required (no data rows)");
  if (kind == ModelKind::poisson) {
    l.z = -1;
    l.x.clear();
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (!is_nonnegative_integer(t.rows[r][static_cast<std::size_t>(l.y)]))
        throw validation_error(where(source, t.lines[r], "y") +
                               ": Poisson outcome must be a nonnegative integer, got " +
                               format_double(t.rows[r][static_cast<std::size_t>(l.y)]));
  }
  if (l.z >= 0)
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double v = t.rows[r][static_cast<std::size_t>(l.z)];
      if (v != 0.0 && v != 1.0)
        throw validation_error(where(source, t.lines[r], "z") +
                               ": treatment indicator must be 0 or 1, got " + format_double(v));
    }
  return l;
}

Eigen::MatrixXd design_of(const CsvTable& t, const Layout& l, bool intercept) {
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const int off = intercept ? 1 : 0;
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(l.x.size()) + off);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (intercept) X(i, 0) = 1.0;
    for (std::size_t j = 0; j < l.x.size(); ++j)
      X(i, static_cast<Eigen::Index>(j) + off) =
          t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l.x[j])];
  }
  return X;
}

Eigen::VectorXd column_of(const CsvTable& t, int j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = t.rows[i][static_cast<std::size_t>(j)];
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      double probe = 0.0;
      if (std::all_of(cells.begin(), cells.end(),
                      [&](const std::string& c) { return parse_number(c, probe); }))
        throw validation_error(source + ": missing header row (line " +
                               std::to_string(lineno) + " is numeric)");
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (cells[j].empty())
          throw validation_error(source + ": empty column name at position " +
                                 std::to_string(j + 1));
        if (std::count(cells.begin(), cells.end(), cells[j]) > 1)
          throw validation_error(source + ": duplicate column '" + cells[j] + "'");
      }
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw validation_error(source + ": line " + std::to_string(lineno) + " has " +
                             std::to_string(cells.size()) + " fields, header has " +
                             std::to_string(t.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_number(cells[j], row[j]))
        throw validation_error(where(source, lineno, t.header[j]) + ": non-numeric value '" +
                               cells[j] + "'");
      if (!std::isfinite(row[j]))
        throw validation_error(where(source, lineno, t.header[j]) + ": non-finite value");
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw validation_error(source + ": missing header row (empty input)");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  auto in = open_input(path);
  return parse_csv(in, path);
}

Dataset current_from_csv(const CsvTable& t, ModelKind kind, bool intercept,
                         const std::string& source) {
  const Layout l = layout_of(t, DataRole::current, kind, source);
  if (kind == ModelKind::poisson) {
    const Eigen::VectorXd y = column_of(t, l.y);
    return Dataset::counts(std::vector<double>(y.data(), y.data() + y.size()));
  }
  std::optional<Eigen::VectorXd> z;
  if (l.z >= 0) z = column_of(t, l.z);
  return Dataset::make(column_of(t, l.y), design_of(t, l, intercept), z);
}

HistoricalDataset historical_from_csv(const CsvTable& t, ModelKind kind, bool intercept,
                                      const std::string& source) {
  const Layout l = layout_of(t, DataRole::historical, kind, source);
  if (kind == ModelKind::poisson) {
    const Eigen::VectorXd y = column_of(t, l.y);
    return HistoricalDataset::counts(std::vector<double>(y.data(), y.data() + y.size()));
  }
  return HistoricalDataset::make(column_of(t, l.y), design_of(t, l, intercept));
}

Dataset read_current_csv(const std::string& path, ModelKind kind, bool intercept) {
  return current_from_csv(read_csv_file(path), kind, intercept, path);
}

HistoricalDataset read_historical_csv(const std::string& path, ModelKind kind, bool intercept) {
  return historical_from_csv(read_csv_file(path), kind, intercept, path);
}

void write_draws_csv(std::ostream& out, const DrawsMatrix& draws) {
  out << "chain";
  for (const auto& c : draws.columns()) out << ',' << c;
  out << '\n';
  for (int r = 0; r < draws.rows(); ++r) {
    out << draws.chain_of(r) + 1;
    for (int j = 0; j < draws.cols(); ++j) out << ',' << format_double(draws.at(r, j));
    out << '\n';
  }
}

DrawsMatrix read_draws_csv(std::istream& in, const std::string& source) {
  const CsvTable t = parse_csv(in, source);
  const bool has_chain = !t.header.empty() && t.header.front() == "chain";
  const std::size_t first = has_chain ? 1 : 0;
  if (t.header.size() <= first) throw validation_error(source + ": no parameter columns");
  DrawsMatrix draws(std::vector<std::string>(t.header.begin() + static_cast<std::ptrdiff_t>(first),
                                             t.header.end()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    int chain = 0;
    if (has_chain) {
      const double c = t.rows[r][0];
      if (!(c >= 1.0) || std::floor(c) != c)
        throw validation_error(where(source, t.lines[r], "chain") +
                               ": chain must be a positive integer");
      chain = static_cast<int>(c) - 1;
    }
    draws.add_row(std::vector<double>(t.rows[r].begin() + static_cast<std::ptrdiff_t>(first),
                                      t.rows[r].end()),
                  chain);
  }
  if (draws.empty()) throw validation_error(source + ": no draws");
  return draws;
}

DrawsMatrix read_draws_file(const std::string& path) {
  auto in = open_input(path);
  return read_draws_csv(in, path);
}

}  // namespace leap
