#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlmc/chain.hpp"
#include "nlmc/graph.hpp"
#include "nlmc/ricci_flow.hpp"
#include "nlmc/separation.hpp"

namespace nlmc {

using Json = nlohmann::ordered_json;

// Graph document: {"vertices": N, "edges": [{"u", "v", "w", "len"}], "measure": [...]}.
// Errors are ValidationError messages prefixed with "<source>:<line>:".
WeightedGraph parse_graph_text(const std::string& text, const std::string& source = "<input>");
WeightedGraph parse_graph(const std::filesystem::path& path);
Json graph_to_json(const WeightedGraph& g);

// Partition document: {"X": [ids], "K": [ids], "Y": [ids]}, validated against g.
PartitionXKY parse_partition_text(const std::string& text, const WeightedGraph& g,
                                  const std::string& source = "<input>");
PartitionXKY parse_partition(const std::filesystem::path& path, const WeightedGraph& g);

// Matrix family document: {"matrices": [[[row], ...], ...]} or {"matrix": [[row], ...]}.
std::vector<Matrix> parse_family_text(const std::string& text,
                                      const std::string& source = "<input>");
std::vector<Matrix> parse_family(const std::filesystem::path& path);

// Comma or whitespace separated numbers, or a JSON array.
Vec parse_vector_text(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
// Throws ValidationError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// One row of the trace schema. Optional fields are emitted empty (CSV) or null (JSON).
struct TraceRecord {
  std::size_t n = 0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double delta_sup = 0.0;
  double base_value = 0.0;
  std::optional<double> curvature_min;
  std::optional<double> curvature_max;
  std::string deleted_edge;  // "u-v", several joined by ';'

  bool operator==(const TraceRecord&) const = default;
};

inline constexpr const char* kTraceHeader =
    "n,lambda_plus,lambda_minus,delta_sup,base_value,curvature_min,curvature_max,deleted_edge";

TraceRecord to_record(const TraceRow& row);
TraceRecord to_record(const FlowTraceRow& row);
std::vector<TraceRecord> to_records(const std::vector<TraceRow>& rows);
std::vector<TraceRecord> to_records(const std::vector<FlowTraceRow>& rows);

enum class TraceFormat { csv, json };
TraceFormat parse_trace_format(const std::string& name);

std::string trace_csv(const std::vector<TraceRecord>& rows);
// {"config": ..., "rows": [...]} when config is given, otherwise the bare row array.
Json trace_json(const std::vector<TraceRecord>& rows, const std::optional<Json>& config = {});
std::vector<TraceRecord> trace_from_json(const Json& doc);
std::vector<TraceRecord> trace_from_csv(const std::string& text);

void emit_trace(const std::vector<TraceRecord>& rows, TraceFormat format,
                const std::filesystem::path& path, const std::optional<Json>& config = {});

// Doubles as 17-significant-digit JSON numbers; non-finite values become strings.
Json number(double v);
Json vector_json(std::span<const double> v);
// Two-space indented JSON with a trailing newline.
std::string dump(const Json& doc);

}  // namespace nlmc
