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
#include "epildp/io.hpp"
#include "epildp/errors.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace epildp
{

using nlohmann::json;

std::string format_double(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : m_columns(header.size())
    , m_path(path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    m_file = std::fopen(path.string().c_str(), "w");
    if (!m_file) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::fputs(header[c].c_str(), m_file);
        std::fputc(c + 1 < header.size() ? ',' : '\n', m_file);
    }
}

CsvWriter::~CsvWriter()
{
    if (m_file) {
        std::fclose(m_file);
    }
}

void CsvWriter::row(std::span<const double> values)
{
    if (!m_file) {
        throw IoError("CSV writer for '" + m_path.string() + "' is closed");
    }
    if (values.size() != m_columns) {
        throw IoError("row has " + std::to_string(values.size()) + " values, header has " +
                      std::to_string(m_columns));
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
        std::fprintf(m_file, "%.17g", values[c]);
        std::fputc(c + 1 < values.size() ? ',' : '\n', m_file);
    }
}

void CsvWriter::close()
{
    if (!m_file) {
        return;
    }
    const bool failed = std::ferror(m_file) != 0;
    const bool closed = std::fclose(m_file) == 0;
    m_file            = nullptr;
    if (failed || !closed) {
        throw IoError("failed writing '" + m_path.string() + "'");
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const std::vector<std::string>& names)
{
    std::vector<std::string> header = {"t"};
    header.insert(header.end(), names.begin(), names.end());
    CsvWriter csv(path, header);
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        row[0]     = trajectory.times[k];
        const auto z = trajectory.state(k);
        std::copy(z.begin(), z.end(), row.begin() + 1);
        csv.row(row);
    }
    csv.close();
}

void write_summary_csv(const std::filesystem::path& path, const EnsembleSummary& summary,
                       const std::vector<std::string>& names)
{
    std::vector<std::string> header = {"t"};
    for (const auto& name : names) {
        for (const char* stat : {"mean_", "var_", "min_", "max_"}) {
            header.push_back(stat + name);
        }
    }
    CsvWriter csv(path, header);
    std::vector<double> row(header.size());
    const auto d = summary.dimension;
    for (std::size_t k = 0; k < summary.times.size(); ++k) {
        row[0] = summary.times[k];
        for (std::size_t i = 0; i < d; ++i) {
            const auto c       = k * d + i;
            row[1 + 4 * i]     = summary.mean[c];
            row[1 + 4 * i + 1] = summary.variance[c];
            row[1 + 4 * i + 2] = summary.min[c];
            row[1 + 4 * i + 3] = summary.max[c];
        }
        csv.row(row);
    }
    csv.close();
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows)
{
    CsvWriter csv(path, header);
    for (const auto& r : rows) {
        csv.row(r);
    }
    csv.close();
}

namespace
{

std::string trim(const std::string& text)
{
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = text.find_last_not_of(" \t");
    return text.substr(first, last - first + 1);
}

bool parse_number(const std::string& text, double& value)
{
    if (text.empty()) {
        return false;
    }
    std::size_t used = 0;
    try {
        value = std::stod(text, &used);
    }
    catch (const std::exception&) {
        return false;
    }
    return used == text.size() && std::isfinite(value);
}

void check_keys(const json& object, const std::set<std::string>& allowed, const std::string& where)
{
    if (!object.is_object()) {
        throw ParseError(where + " must be an object");
    }
    for (const auto& item : object.items()) {
        if (!allowed.count(item.key())) {
            throw ParseError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

const json& require(const json& object, const std::string& key, const std::string& where)
{
    if (!object.contains(key)) {
        throw ParseError("missing key '" + key + "' in " + where);
    }
    return object.at(key);
}

double coefficient_value(const json& value, const std::map<std::string, double>& parameters)
{
    if (value.is_number()) {
        return value.get<double>();
    }
    if (!value.is_string()) {
        throw ParseError("coefficient must be a number or a string");
    }
    std::string text = trim(value.get<std::string>());
    double sign      = 1.0;
    if (!text.empty() && text[0] == '-') {
        sign = -1.0;
        text = trim(text.substr(1));
    }
    if (text.empty()) {
        throw ParseError("empty coefficient");
    }
    double product = sign;
    std::stringstream stream(text);
    std::string factor;
    while (std::getline(stream, factor, '*')) {
        factor = trim(factor);
        double number = 0.0;
        if (parse_number(factor, number)) {
            product *= number;
            continue;
        }
        const auto it = parameters.find(factor);
        if (it == parameters.end()) {
            throw ParseError("unknown parameter '" + factor + "' in coefficient '" + value.get<std::string>() + "'");
        }
        product *= it->second;
    }
    return product;
}

SumConstraint parse_sum(const std::string& text)
{
    if (text == "none") {
        return SumConstraint::none;
    }
    if (text == "at_most_one") {
        return SumConstraint::at_most_one;
    }
    if (text == "equal_one") {
        return SumConstraint::equal_one;
    }
    throw ParseError("unknown sum constraint '" + text + "'");
}

std::string sum_name(SumConstraint sum)
{
    switch (sum) {
    case SumConstraint::none:
        return "none";
    case SumConstraint::at_most_one:
        return "at_most_one";
    case SumConstraint::equal_one:
        return "equal_one";
    }
    return "none";
}

template <class T>
T get_as(const json& value, const std::string& where)
{
    try {
        return value.get<T>();
    }
    catch (const json::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
}

} // namespace

std::map<std::string, double> parse_overrides(const std::string& text)
{
    std::map<std::string, double> result;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("parameter override '" + item + "' is not of the form key=value");
        }
        const auto key = trim(item.substr(0, eq));
        double value   = 0.0;
        if (key.empty() || !parse_number(trim(item.substr(eq + 1)), value)) {
            throw ConfigError("parameter override '" + item + "' is not of the form key=value");
        }
        if (!result.emplace(key, value).second) {
            throw ConfigError("parameter '" + key + "' given twice");
        }
    }
    return result;
}

CompartmentalModel parse_model_json(const std::string& text, const std::map<std::string, double>& overrides)
{
    json doc;
    try {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    check_keys(doc, {"name", "dimension", "compartments", "jumps", "domain", "parameters", "infected", "dependent"},
               "model");

    ModelDefinition def;
    def.name         = doc.contains("name") ? get_as<std::string>(doc.at("name"), "name") : "custom";
    def.compartments = get_as<std::vector<std::string>>(require(doc, "compartments", "model"), "compartments");
    const auto d     = def.compartments.size();
    if (doc.contains("dimension") && get_as<std::size_t>(doc.at("dimension"), "dimension") != d) {
        throw ParseError("dimension does not match the number of compartments");
    }

    if (doc.contains("parameters")) {
        const auto& params = doc.at("parameters");
        if (!params.is_object()) {
            throw ParseError("parameters must be an object");
        }
        for (const auto& item : params.items()) {
            def.parameters[item.key()] = get_as<double>(item.value(), "parameter " + item.key());
        }
    }
    for (const auto& [key, value] : overrides) {
        if (!def.parameters.count(key)) {
            throw ConfigError("unknown parameter '" + key + "' for model '" + def.name + "'");
        }
        def.parameters[key] = value;
    }

    const auto& jumps = require(doc, "jumps", "model");
    if (!jumps.is_array()) {
        throw ParseError("jumps must be an array");
    }
    for (std::size_t j = 0; j < jumps.size(); ++j) {
        const auto where = "jump " + std::to_string(j);
        check_keys(jumps[j], {"direction", "rate", "label"}, where);
        Jump jump{get_as<std::vector<int>>(require(jumps[j], "direction", where), where + " direction"),
                  Polynomial(), jumps[j].contains("label") ? get_as<std::string>(jumps[j].at("label"), where) : ""};
        const auto& rate = require(jumps[j], "rate", where);
        check_keys(rate, {"monomials"}, where + " rate");
        std::vector<Monomial> terms;
        for (const auto& mono : require(rate, "monomials", where + " rate")) {
            check_keys(mono, {"coefficient", "exponents"}, where + " monomial");
            terms.push_back({coefficient_value(require(mono, "coefficient", where), def.parameters),
                             get_as<std::vector<int>>(require(mono, "exponents", where), where + " exponents")});
        }
        jump.rate = RateFunction(Polynomial(std::move(terms)));
        def.jumps.push_back(std::move(jump));
    }

    const auto& domain = require(doc, "domain", "model");
    check_keys(domain, {"lower", "upper", "sum"}, "domain");
    def.domain.lower = get_as<std::vector<double>>(require(domain, "lower", "domain"), "domain lower");
    def.domain.upper = get_as<std::vector<double>>(require(domain, "upper", "domain"), "domain upper");
    def.domain.sum   = domain.contains("sum") ? parse_sum(get_as<std::string>(domain.at("sum"), "domain sum"))
                                              : SumConstraint::none;

    if (doc.contains("infected")) {
        def.infected = get_as<std::vector<std::size_t>>(doc.at("infected"), "infected");
    }
    if (doc.contains("dependent")) {
        def.dependent = get_as<std::size_t>(doc.at("dependent"), "dependent");
    }
    CompartmentalModel checked(def);
    def.metzler = derive_metzler_form(def.jumps, def.compartments.size());
    return def.metzler ? CompartmentalModel(std::move(def)) : checked;
}

CompartmentalModel load_model_file(const std::filesystem::path& path, const std::map<std::string, double>& overrides)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read model file '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model_json(buffer.str(), overrides);
}

std::string model_to_json(const CompartmentalModel& model)
{
    json doc;
    doc["name"]         = model.name();
    doc["dimension"]    = model.dimension();
    doc["compartments"] = model.compartments();
    json jumps          = json::array();
    for (const auto& jump : model.jumps()) {
        const auto* poly = jump.rate.polynomial();
        if (!poly) {
            throw ConfigError("only polynomial rates can be written to a model file");
        }
        json monomials = json::array();
        for (const auto& term : poly->terms()) {
            monomials.push_back({{"coefficient", term.coefficient}, {"exponents", term.exponents}});
        }
        jumps.push_back({{"direction", jump.direction}, {"rate", {{"monomials", monomials}}}, {"label", jump.label}});
    }
    doc["jumps"]      = jumps;
    doc["domain"]     = {{"lower", model.domain().lower}, {"upper", model.domain().upper},
                         {"sum", sum_name(model.domain().sum)}};
    doc["parameters"] = model.parameters();
    doc["infected"]   = model.infected();
    if (model.dependent()) {
        doc["dependent"] = *model.dependent();
    }
    return doc.dump(2);
}

CompartmentalModel resolve_model(const std::string& selector, const std::map<std::string, double>& overrides)
{
    if (selector == "sis" || selector == "siv" || selector == "siv_printed") {
        return make_builtin(selector, overrides);
    }
    return load_model_file(selector, overrides);
}

} // namespace epildp
