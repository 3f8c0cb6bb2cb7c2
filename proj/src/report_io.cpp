#include "potlab/report_io.hpp"
#include <cmath>

#include "potlab/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace potlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ordered_json json_number(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

ordered_json to_json(const SolveReport& r) {
    ordered_json j;
    j["status"] = to_string(r.status);
    j["iterations"] = r.iterations;
    j["energy"] = r.energy;
    j["residual"] = r.residual;
    j["epsilon"] = r.epsilon;
    return j;
}

void write_json_artifact(const std::filesystem::path& path, const ordered_json& body) {
    ordered_json doc;
    doc["schema"] = 1;
    for (const auto& [k, v] : body.items()) doc[k] = v;
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

ordered_json read_json_artifact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot read " + path.string());
    ordered_json doc = ordered_json::parse(in, nullptr, true);
    if (!doc.contains("schema") || doc["schema"] != 1)
        throw parse_error(path.string() + " lacks the schema: 1 header");
    return doc;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
}

void write_node_table(const std::filesystem::path& path, const DiscreteDomain& d,
                      const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write " + path.string());
    out << "index,r";
    if (d.kind() == DomainKind::surface2d) out << ",theta";
    out << ",tag";
    for (const auto& [name, f] : fields) {
        if (f->values.size() != d.node_count())
            throw invalid_range("field '" + name + "' does not match the domain");
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        out << i << ',' << format_double(d.node_r(i));
        if (d.kind() == DomainKind::surface2d)
            out << ',' << format_double(d.node_theta(i));
        out << ',' << (int)d.tag(i);
        for (const auto& [name, f] : fields) out << ',' << format_double(f->values[i]);
        out << '\n';
    }
}

ScalarField read_node_table_field(const std::filesystem::path& path,
                                  const DiscreteDomain& d, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path.string() + " is empty");
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::size_t col = names.size();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == column) col = i;
    if (col == names.size())
        throw parse_error("column '" + column + "' not found in " + path.string());

    ScalarField f(d);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= d.node_count())
            throw parse_error(path.string() + " has more rows than domain nodes");
        std::stringstream ss(line);
        std::string cell;
        std::size_t i = 0;
        double v = 0.0;
        while (std::getline(ss, cell, ',')) {
            if (i == col) v = std::stod(cell);
            ++i;
        }
        if (i <= col) throw parse_error("short row in " + path.string());
        f[row++] = v;
    }
    if (row != d.node_count())
        throw parse_error(path.string() + " has fewer rows than domain nodes");
    return f;
}

} // namespace potlab
