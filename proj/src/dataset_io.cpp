#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "fdd/core.hpp"

namespace fdd {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view field, std::size_t line, std::size_t column) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("not a number: '" + std::string(field) + "'", line, column);
    return v;
}

}  // namespace

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

FunctionalDataset parse_dataset(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    std::optional<std::vector<double>> grid;
    std::vector<double> values;
    std::vector<std::string> labels;

    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_fields(line);
        if (!grid) {
            if (trim(fields[0]) != "grid") throw ParseError("header must start with 'grid'", line_no, 1);
            if (fields.size() < 3) throw ParseError("header needs at least 2 grid points", line_no, fields.size());
            std::vector<double> t;
            for (std::size_t c = 1; c < fields.size(); ++c) t.push_back(parse_real(fields[c], line_no, c + 1));
            grid = std::move(t);
            continue;
        }
        if (fields.size() != grid->size() + 1)
            throw ParseError("row has " + std::to_string(fields.size() - 1) + " values, expected " +
                                 std::to_string(grid->size()),
                             line_no, fields.size());
        labels.emplace_back(trim(fields[0]));
        for (std::size_t c = 1; c < fields.size(); ++c) values.push_back(parse_real(fields[c], line_no, c + 1));
    }
    if (!grid) throw ParseError("missing header", line_no, 1);
    if (labels.empty()) throw ParseError("no curves", line_no, 1);

    try {
        return FunctionalDataset(Grid(std::move(*grid)), std::move(values), std::move(labels));
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 1, 1);
    }
}

FunctionalDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_dataset(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.detail(), e.line(), e.column());
    }
}

std::string format_dataset(const FunctionalDataset& ds, const std::string& comment) {
    std::string out;
    if (!comment.empty()) {
        std::istringstream lines(comment);
        std::string l;
        while (std::getline(lines, l)) out += "# " + l + "\n";
    }
    out += "grid";
    for (double t : ds.grid().points()) out += "," + format_real(t);
    out += "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& label = ds.labels()[i];
        if (label.find_first_of(",\n#") != std::string::npos)
            throw DomainError("label '" + label + "' contains a reserved character");
        out += label;
        for (double v : ds.curve(i)) out += "," + format_real(v);
        out += "\n";
    }
    return out;
}

void save_dataset(const FunctionalDataset& ds, const std::string& path, const std::string& comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset '" + path + "'");
    out << format_dataset(ds, comment);
}

}  // namespace fdd
