/*
* Copyright (C) 2026 epildp contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef EPILDP_IO_HPP
#define EPILDP_IO_HPP

#include "epildp/model.hpp"
#include "epildp/simulation.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace epildp
{

/// Shortest text with 17 significant digits ("%.17g").
std::string format_double(double value);

/// CSV file with a header row, '.' as decimal separator and 17 significant digits.
class CsvWriter
{
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&)            = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(std::span<const double> values);
    /// Flushes and closes; throws IoError if anything failed to write.
    void close();

private:
    std::FILE* m_file = nullptr;
    std::size_t m_columns;
    std::filesystem::path m_path;
};

/// Columns t, then one per compartment.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const std::vector<std::string>& names);

/// Columns t, then mean_X, var_X, min_X, max_X for each compartment X.
void write_summary_csv(const std::filesystem::path& path, const EnsembleSummary& summary,
                       const std::vector<std::string>& names);

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// Parses "k=v,k=v" into a map; throws ConfigError on malformed input or repeated keys.
std::map<std::string, double> parse_overrides(const std::string& text);

/// Model from JSON text. Keys: name, dimension (optional), compartments, jumps
/// [{direction, rate: {monomials: [{coefficient, exponents}]}, label}], domain {lower, upper, sum},
/// parameters, infected (optional), dependent (optional). A coefficient is a number or a product
/// such as "-sigma*beta" or "0.5*gamma" over numbers and parameter names. Overrides replace
/// declared parameters. Unknown keys raise ParseError.
CompartmentalModel parse_model_json(const std::string& text, const std::map<std::string, double>& overrides = {});

/// Reads a model file; IoError if it cannot be read.
CompartmentalModel load_model_file(const std::filesystem::path& path,
                                   const std::map<std::string, double>& overrides = {});

/// JSON text for a polynomial model, with numeric coefficients. Round-trips through parse_model_json.
std::string model_to_json(const CompartmentalModel& model);

/// Built-in name ("sis", "siv", "siv_printed") or path to a model file.
CompartmentalModel resolve_model(const std::string& selector, const std::map<std::string, double>& overrides = {});

} // namespace epildp

#endif // EPILDP_IO_HPP
