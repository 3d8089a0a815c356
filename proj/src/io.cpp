#include "nlmc/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "nlmc/error.hpp"
#include "nlmc/format.hpp"

namespace nlmc {

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Line of the first character of element `index` of the array stored under
// the top-level key `key`; 0 when it cannot be located.
std::size_t locate_element(const std::string& text, const std::string& key, std::size_t index) {
  int depth = 0;
  std::string last_string;
  bool in_string = false, escaped = false, awaiting_array = false;
  std::size_t array_depth = 0, element = 0;
  bool expecting_element = false;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') {
        in_string = false;
        last_string = current;
      } else current += c;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (expecting_element) {
      expecting_element = false;
      if (element == index) return line_of_offset(text, i);
    }
    switch (c) {
      case '"':
        in_string = true;
        current.clear();
        break;
      case ':':
        awaiting_array = depth == 1 && last_string == key;
        break;
      case '{':
      case '[':
        ++depth;
        if (c == '[' && awaiting_array) {
          array_depth = static_cast<std::size_t>(depth);
          expecting_element = true;
        }
        awaiting_array = false;
        break;
      case '}':
      case ']':
        if (array_depth != 0 && static_cast<std::size_t>(depth) == array_depth) return 0;
        --depth;
        break;
      case ',':
        if (array_depth != 0 && static_cast<std::size_t>(depth) == array_depth) {
          ++element;
          expecting_element = true;
        }
        break;
      default:
        break;
    }
  }
  return 0;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw ValidationError(source + ":" + (line ? std::to_string(line) : std::string("?")) + ": " +
                        what);
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail_at(source, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1),
            std::string("malformed JSON: ") + e.what());
  }
}

double number_field(const Json& obj, const char* name, const std::string& source,
                    std::size_t line, const std::string& where) {
  if (!obj.contains(name)) fail_at(source, line, where + ": missing field '" + name + "'");
  const Json& v = obj.at(name);
  if (!v.is_number()) fail_at(source, line, where + ": field '" + name + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail_at(source, line, where + ": field '" + name + "' is not finite");
  return x;
}

std::size_t index_value(const Json& v, const std::string& source, std::size_t line,
                        const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail_at(source, line, where + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> id_list(const Json& doc, const char* key, std::size_t n,
                                 const std::string& source, const std::string& text) {
  std::vector<std::size_t> out;
  if (!doc.contains(key)) return out;
  const Json& arr = doc.at(key);
  if (!arr.is_array()) fail_at(source, locate_element(text, key, 0), std::string(key) + " must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::size_t line = locate_element(text, key, i);
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    const std::size_t v = index_value(arr[i], source, line, where);
    if (v >= n) fail_at(source, line, where + " = " + std::to_string(v) + " is not a vertex");
    out.push_back(v);
  }
  return out;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string join_edges(const std::vector<Edge>& edges) {
  std::string out;
  for (const Edge& e : edges) {
    if (!out.empty()) out += ';';
    out += e.label();
  }
  return out;
}

double json_double(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError("expected a number, got " + v.dump());
}

double csv_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ValidationError("bad number '" + s + "' in trace");
  }
  if (pos != s.size()) throw ValidationError("bad number '" + s + "' in trace");
  return v;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw ValidationError(path.string() + ": write failed");
}

WeightedGraph parse_graph_text(const std::string& text, const std::string& source) {
  const Json doc = parse_json(text, source);
  if (!doc.is_object()) fail_at(source, 1, "graph document must be a JSON object");
  if (!doc.contains("vertices")) fail_at(source, 1, "missing field 'vertices'");
  const std::size_t n = index_value(doc.at("vertices"), source, 1, "vertices");
  if (n == 0) fail_at(source, 1, "graph needs at least one vertex");

  std::vector<EdgeSpec> edges;
  if (doc.contains("edges")) {
    const Json& arr = doc.at("edges");
    if (!arr.is_array()) fail_at(source, 1, "'edges' must be an array");
    std::set<Edge> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::size_t line = locate_element(text, "edges", i);
      const std::string where = "edges[" + std::to_string(i) + "]";
      const Json& e = arr[i];
      if (!e.is_object()) fail_at(source, line, where + " must be an object");
      if (!e.contains("u") || !e.contains("v"))
        fail_at(source, line, where + ": missing endpoint 'u' or 'v'");
      EdgeSpec s;
      s.u = index_value(e.at("u"), source, line, where + ".u");
      s.v = index_value(e.at("v"), source, line, where + ".v");
      s.weight = number_field(e, "w", source, line, where);
      s.length = e.contains("len") ? number_field(e, "len", source, line, where) : 1.0;
      if (s.u >= n || s.v >= n)
        fail_at(source, line, where + ": endpoint out of range 0.." + std::to_string(n - 1));
      if (s.u == s.v) fail_at(source, line, where + ": self loop at " + std::to_string(s.u));
      if (!(s.weight > 0.0)) fail_at(source, line, where + ": weight must be positive");
      if (!(s.length > 0.0)) fail_at(source, line, where + ": length must be positive");
      const Edge key = make_edge(s.u, s.v);
      if (!seen.insert(key).second)
        fail_at(source, line, where + ": duplicate pair " + key.label());
      edges.push_back(s);
    }
  }

  Vec measure;
  if (doc.contains("measure")) {
    const Json& arr = doc.at("measure");
    const std::size_t line = locate_element(text, "measure", 0);
    if (!arr.is_array()) fail_at(source, line, "'measure' must be an array");
    if (arr.size() != n)
      fail_at(source, line, "'measure' has " + std::to_string(arr.size()) + " entries, expected " +
                                std::to_string(n));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::size_t at = locate_element(text, "measure", i);
      if (!arr[i].is_number()) fail_at(source, at, "measure[" + std::to_string(i) + "] must be a number");
      const double m = arr[i].get<double>();
      if (!(m > 0.0) || !std::isfinite(m))
        fail_at(source, at, "measure[" + std::to_string(i) + "] must be positive");
      measure.push_back(m);
    }
  }
  try {
    return WeightedGraph(n, edges, std::move(measure));
  } catch (const ValidationError& e) {
    fail_at(source, 1, e.what());
  }
}

WeightedGraph parse_graph(const std::filesystem::path& path) {
  return parse_graph_text(read_text_file(path), path.string());
}

Json graph_to_json(const WeightedGraph& g) {
  Json doc;
  doc["vertices"] = g.size();
  Json edges = Json::array();
  for (const Edge& e : g.edges()) {
    Json o;
    o["u"] = e.u;
    o["v"] = e.v;
    o["w"] = g.weight(e.u, e.v);
    o["len"] = g.length(e.u, e.v);
    edges.push_back(std::move(o));
  }
  doc["edges"] = std::move(edges);
  doc["measure"] = vector_json(g.measures());
  return doc;
}

PartitionXKY parse_partition_text(const std::string& text, const WeightedGraph& g,
                                  const std::string& source) {
  const Json doc = parse_json(text, source);
  if (!doc.is_object()) fail_at(source, 1, "partition document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "X" && key != "K" && key != "Y")
      fail_at(source, 1, "unknown partition key '" + key + "'");
  }
  const auto x = id_list(doc, "X", g.size(), source, text);
  const auto k = id_list(doc, "K", g.size(), source, text);
  const auto y = id_list(doc, "Y", g.size(), source, text);
  try {
    PartitionXKY part = PartitionXKY::from_sets(g.size(), x, k, y);
    part.validate(g);
    return part;
  } catch (const ValidationError& e) {
    fail_at(source, 1, e.what());
  }
}

PartitionXKY parse_partition(const std::filesystem::path& path, const WeightedGraph& g) {
  return parse_partition_text(read_text_file(path), g, path.string());
}

std::vector<Matrix> parse_family_text(const std::string& text, const std::string& source) {
  const Json doc = parse_json(text, source);
  std::vector<Json> members;
  if (doc.is_object() && doc.contains("matrices")) {
    if (!doc.at("matrices").is_array()) fail_at(source, 1, "'matrices' must be an array");
    for (const Json& m : doc.at("matrices")) members.push_back(m);
  } else if (doc.is_object() && doc.contains("matrix")) {
    members.push_back(doc.at("matrix"));
  } else {
    fail_at(source, 1, "family document needs 'matrices' or 'matrix'");
  }
  if (members.empty()) fail_at(source, 1, "matrix family is empty");
  std::vector<Matrix> out;
  std::size_t n = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const Json& m = members[a];
    const std::size_t line = locate_element(text, doc.contains("matrices") ? "matrices" : "matrix", a);
    const std::string where = "matrix " + std::to_string(a);
    if (!m.is_array() || m.empty()) fail_at(source, line, where + " must be a nonempty array of rows");
    if (a == 0) n = m.size();
    if (m.size() != n) fail_at(source, line, where + " has a different size");
    Matrix mat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!m[i].is_array() || m[i].size() != n)
        fail_at(source, line, where + " row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
      for (std::size_t j = 0; j < n; ++j) {
        if (!m[i][j].is_number()) fail_at(source, line, where + " has a non-numeric entry");
        const double v = m[i][j].get<double>();
        if (!(v >= 0.0) || !std::isfinite(v))
          fail_at(source, line, where + " entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be nonnegative");
        mat(i, j) = v;
      }
    }
    out.push_back(std::move(mat));
  }
  return out;
}

std::vector<Matrix> parse_family(const std::filesystem::path& path) {
  return parse_family_text(read_text_file(path), path.string());
}

Vec parse_vector_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const Json doc = parse_json(text, "<vector>");
    Vec out;
    for (const Json& v : doc) {
      if (!v.is_number()) throw ValidationError("vector entries must be numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  Vec out;
  std::string tok;
  while (in >> tok) out.push_back(csv_double(tok));
  for (double v : out)
    if (!std::isfinite(v)) throw ValidationError("vector entries must be finite");
  return out;
}

TraceRecord to_record(const TraceRow& row) {
  return {row.n, row.lambda_plus, row.lambda_minus, row.delta_sup, row.base_value, {}, {}, {}};
}

TraceRecord to_record(const FlowTraceRow& row) {
  return {row.n,           row.lambda_plus,   row.lambda_minus, row.delta_sup, row.base_value,
          row.curvature_min, row.curvature_max, join_edges(row.deleted)};
}

std::vector<TraceRecord> to_records(const std::vector<TraceRow>& rows) {
  std::vector<TraceRecord> out;
  for (const auto& r : rows) out.push_back(to_record(r));
  return out;
}

std::vector<TraceRecord> to_records(const std::vector<FlowTraceRow>& rows) {
  std::vector<TraceRecord> out;
  for (const auto& r : rows) out.push_back(to_record(r));
  return out;
}

TraceFormat parse_trace_format(const std::string& name) {
  if (name == "csv") return TraceFormat::csv;
  if (name == "json") return TraceFormat::json;
  throw ValidationError("unknown format '" + name + "' (expected csv or json)");
}

std::string trace_csv(const std::vector<TraceRecord>& rows) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + format_double(r.lambda_plus) + ',' +
           format_double(r.lambda_minus) + ',' + format_double(r.delta_sup) + ',' +
           format_double(r.base_value) + ',' + optional_field(r.curvature_min) + ',' +
           optional_field(r.curvature_max) + ',' + r.deleted_edge + '\n';
  }
  return out;
}

Json trace_json(const std::vector<TraceRecord>& rows, const std::optional<Json>& config) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json o;
    o["n"] = r.n;
    o["lambda_plus"] = number(r.lambda_plus);
    o["lambda_minus"] = number(r.lambda_minus);
    o["delta_sup"] = number(r.delta_sup);
    o["base_value"] = number(r.base_value);
    o["curvature_min"] = r.curvature_min ? number(*r.curvature_min) : Json();
    o["curvature_max"] = r.curvature_max ? number(*r.curvature_max) : Json();
    o["deleted_edge"] = r.deleted_edge;
    arr.push_back(std::move(o));
  }
  if (!config) return arr;
  Json doc;
  doc["config"] = *config;
  doc["rows"] = std::move(arr);
  return doc;
}

std::vector<TraceRecord> trace_from_json(const Json& doc) {
  const Json& arr = doc.is_object() ? doc.at("rows") : doc;
  if (!arr.is_array()) throw ValidationError("trace rows must be an array");
  std::vector<TraceRecord> out;
  for (const Json& o : arr) {
    TraceRecord r;
    r.n = o.at("n").get<std::size_t>();
    r.lambda_plus = json_double(o.at("lambda_plus"));
    r.lambda_minus = json_double(o.at("lambda_minus"));
    r.delta_sup = json_double(o.at("delta_sup"));
    r.base_value = json_double(o.at("base_value"));
    if (!o.at("curvature_min").is_null()) r.curvature_min = json_double(o.at("curvature_min"));
    if (!o.at("curvature_max").is_null()) r.curvature_max = json_double(o.at("curvature_max"));
    r.deleted_edge = o.at("deleted_edge").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw ValidationError("trace CSV header mismatch");
  std::vector<TraceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 8) throw ValidationError("trace CSV row needs 8 fields: " + line);
    TraceRecord r;
    r.n = static_cast<std::size_t>(std::stoull(cells[0]));
    r.lambda_plus = csv_double(cells[1]);
    r.lambda_minus = csv_double(cells[2]);
    r.delta_sup = csv_double(cells[3]);
    r.base_value = csv_double(cells[4]);
    if (!cells[5].empty()) r.curvature_min = csv_double(cells[5]);
    if (!cells[6].empty()) r.curvature_max = csv_double(cells[6]);
    r.deleted_edge = cells[7];
    out.push_back(std::move(r));
  }
  return out;
}

void emit_trace(const std::vector<TraceRecord>& rows, TraceFormat format,
                const std::filesystem::path& path, const std::optional<Json>& config) {
  write_text_file(path, format == TraceFormat::csv ? trace_csv(rows) : dump(trace_json(rows, config)));
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json vector_json(std::span<const double> v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace nlmc
