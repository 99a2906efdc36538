#include "restop/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "restop/errors.hpp"

namespace restop {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, size_t line, const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

void check_value(const std::string& path, size_t line, double v) {
  if (!std::isfinite(v)) fail(path, line, "non-finite value");
}

void check_cost(const std::string& path, size_t line, double c) {
  if (!std::isfinite(c) || c <= 0.0) fail(path, line, "cost must be a positive finite number");
}

CurveDataset load_jsonl(const std::string& path, std::istream& in) {
  std::vector<Curve> curves;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      fail(path, line_no, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("values"))
      fail(path, line_no, "record must be an object with 'id' and 'values'");
    Curve c;
    try {
      c.id = rec.at("id").get<std::string>();
      c.values = rec.at("values").get<std::vector<double>>();
      if (rec.contains("costs")) c.costs = rec.at("costs").get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail(path, line_no, std::string("malformed record: ") + e.what());
    }
    if (c.values.empty()) fail(path, line_no, "curve '" + c.id + "' has no values");
    for (double v : c.values) check_value(path, line_no, v);
    if (!c.costs.empty() && c.costs.size() != c.values.size())
      fail(path, line_no, "costs length differs from values length");
    for (double v : c.costs) check_cost(path, line_no, v);
    for (const Curve& prev : curves) {
      if (prev.id == c.id) fail(path, line_no, "duplicate curve id '" + c.id + "'");
    }
    curves.push_back(std::move(c));
  }
  if (curves.empty()) throw DataError(path + ": empty file");
  return CurveDataset::from_curves(std::move(curves));
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& path, size_t line, const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(path, line, "malformed number '" + s + "'");
    return v;
  } catch (const std::exception&) {
    fail(path, line, "malformed number '" + s + "'");
  }
}

CurveDataset load_csv(const std::string& path, std::istream& in) {
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_cost;
  if (line == "run_id,step,value") {
    has_cost = false;
  } else if (line == "run_id,step,value,cost") {
    has_cost = true;
  } else {
    fail(path, line_no, "expected header 'run_id,step,value[,cost]'");
  }

  std::vector<Curve> curves;
  std::vector<std::string> finished;  // runs whose block has ended
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_row(line);
    if (fields.size() != (has_cost ? 4u : 3u)) fail(path, line_no, "wrong field count");
    const std::string& id = fields[0];
    long step = long(parse_number(path, line_no, fields[1]));
    double value = parse_number(path, line_no, fields[2]);
    check_value(path, line_no, value);
    double cost = 1.0;
    if (has_cost) {
      cost = parse_number(path, line_no, fields[3]);
      check_cost(path, line_no, cost);
    }

    if (!curves.empty() && curves.back().id == id) {
      Curve& cur = curves.back();
      if (step != cur.length() + 1)
        fail(path, line_no, "steps for run '" + id + "' must be contiguous from 1");
      cur.values.push_back(value);
      if (has_cost) cur.costs.push_back(cost);
    } else {
      for (const std::string& f : finished) {
        if (f == id) fail(path, line_no, "rows for run '" + id + "' are not contiguous");
      }
      if (!curves.empty()) finished.push_back(curves.back().id);
      if (step != 1) fail(path, line_no, "steps for run '" + id + "' must start at 1");
      Curve c;
      c.id = id;
      c.values.push_back(value);
      if (has_cost) c.costs.push_back(cost);
      curves.push_back(std::move(c));
    }
  }
  if (curves.empty()) throw DataError(path + ": no data rows");
  return CurveDataset::from_curves(std::move(curves));
}

}  // namespace

CurveFormat curve_format_from_name(const std::string& name) {
  if (name == "jsonl") return CurveFormat::kJsonl;
  if (name == "csv") return CurveFormat::kCsv;
  throw DataError("unknown curve format '" + name + "' (expected jsonl or csv)");
}

CurveFormat curve_format_from_path(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return CurveFormat::kCsv;
  return CurveFormat::kJsonl;
}

CurveDataset load_curves(const std::string& path, CurveFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return format == CurveFormat::kJsonl ? load_jsonl(path, in) : load_csv(path, in);
}

std::string curves_to_jsonl(const CurveDataset& dataset) {
  std::string out;
  for (const Curve& c : dataset.curves) {
    nlohmann::ordered_json rec;
    rec["id"] = c.id;
    rec["values"] = c.values;
    if (!c.costs.empty()) rec["costs"] = c.costs;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void save_curves_jsonl(const CurveDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << curves_to_jsonl(dataset);
}

}  // namespace restop
