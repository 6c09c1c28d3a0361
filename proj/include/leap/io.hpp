#pragma once

#include "leap/model.hpp"

#include <iosfwd>
#include <string>

namespace leap {

enum class DataRole { current, historical };

/// Raw numeric table from a CSV file with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;  // source line of each row
};

/// Parses a header + numeric rows. `source` names the input in error messages.
CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

/// Builds model data from a parsed table. `y` is required; `z` is accepted
/// for current data only; remaining columns form X in header order, preceded
/// by a column of ones when `intercept` is set (linear model only). For the
/// Poisson model only `y` is read and must hold nonnegative integers.
Dataset current_from_csv(const CsvTable& t, ModelKind kind, bool intercept,
                         const std::string& source);
HistoricalDataset historical_from_csv(const CsvTable& t, ModelKind kind, bool intercept,
                                      const std::string& source);

Dataset read_current_csv(const std::string& path, ModelKind kind, bool intercept = true);
HistoricalDataset read_historical_csv(const std::string& path, ModelKind kind,
                                      bool intercept = true);

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

/// Draws CSV: header "chain,<columns>", one row per draw, chains numbered from 1.
void write_draws_csv(std::ostream& out, const DrawsMatrix& draws);
DrawsMatrix read_draws_csv(std::istream& in, const std::string& source);
DrawsMatrix read_draws_file(const std::string& path);

}  // namespace leap
