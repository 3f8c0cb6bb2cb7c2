#pragma once

#include "potlab/discrete_domain.hpp"
#include "potlab/plaplace_solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace potlab {

/// Key order is preserved and doubles serialize shortest-round-trip, so
/// artifacts are byte-identical across runs with equal inputs.
using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const SolveReport& r);

/// Numbers that can legitimately be infinite (tail estimates, blown-up
/// capacities) serialize as the strings "inf"/"-inf"; JSON has no inf.
ordered_json json_number(double v);

/// Writes `body` with "schema": 1 injected as the first key.
void write_json_artifact(const std::filesystem::path& path, const ordered_json& body);

ordered_json read_json_artifact(const std::filesystem::path& path);

/// CSV with '.' decimals, ',' delimiter, %.17g doubles (round-trip exact).
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Node table: index,r[,theta],tag,<one column per named field>.
void write_node_table(const std::filesystem::path& path, const DiscreteDomain& d,
                      const std::vector<std::pair<std::string, const ScalarField*>>& fields);

/// Reads a named field column back from a node table written by
/// write_node_table; the domain must match row-for-row.
ScalarField read_node_table_field(const std::filesystem::path& path,
                                  const DiscreteDomain& d, const std::string& column);

std::string format_double(double v); // %.17g

} // namespace potlab
