#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sfgm/graph.hpp"
#include "sfgm/latent.hpp"
#include "sfgm/linalg.hpp"
#include "sfgm/trace.hpp"

namespace sfgm {

/// Dense numeric CSV; an optional non-numeric first line is treated as a header.
MatrixXd load_csv_matrix(const std::filesystem::path& path);
void save_csv_matrix(const std::filesystem::path& path, const MatrixXd& m,
                     const std::vector<std::string>& header = {});

/// Graph text format: first line "p <int>", then one "v w" pair per line,
/// 1-indexed.
UndirectedGraph load_graph(std::istream& in);
UndirectedGraph load_graph(const std::filesystem::path& path);
void save_graph(std::ostream& out, const UndirectedGraph& g);

/// Contingency table: header "vars: a b c ...", then 2^p counts in row-major
/// lexicographic order with the last variable varying fastest.
ContingencyTable load_contingency_table(std::istream& in);
ContingencyTable load_contingency_table(const std::filesystem::path& path);

/// Trace CSV: alpha_1..p, lambda_1..p, Delta, e_v_w columns (1-indexed);
/// the precision entries go to a sparse triplet sidecar.
void save_trace_csv(const std::filesystem::path& path, const Trace& trace);
void save_trace_k_sidecar(const std::filesystem::path& path, const Trace& trace);
Trace load_trace_csv(const std::filesystem::path& path);

void save_cumulative_edges(const std::filesystem::path& path, const VectorXd& series);

}  // namespace sfgm
