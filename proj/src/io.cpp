#include "weave/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "weave/error.hpp"

namespace weave::io {

namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return !s.empty() && ec == std::errc() && ptr == end;
}

double field(const std::string& source, const pt::ptree& section, const std::string& section_name,
             const std::string& key) {
  const auto value = section.get_optional<std::string>(key);
  if (!value) throw ParseError(source, 0, "missing field " + section_name + "." + key);
  double out = 0.0;
  if (!parse_double(*value, out)) {
    throw ParseError(source, 0,
                     "field " + section_name + "." + key + " is not a number: '" + *value + "'");
  }
  return out;
}

void reject_unknown(const std::string& source, const pt::ptree& section,
                    const std::string& section_name, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : section) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParseError(source, 0, "unknown field " + section_name + "." + key);
    }
  }
}

}  // namespace

ConfigFile parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source, e.line(), e.message());
  }

  ConfigFile cfg;
  cfg.source = source;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ParseError(source, 0, "key '" + name + "' outside of a section");
    }
    if (name == "flows") {
      const bool raw = section.count("f_enter") || section.count("f_exit") || section.count("f2") ||
                       section.count("f1");
      const bool normalized =
          section.count("n_enter") || section.count("n_exit") || section.count("n2");
      if (raw && normalized) {
        throw ParseError(source, 0, "[flows] gives both raw f_* and normalized n_* values");
      }
      if (normalized) {
        reject_unknown(source, section, "flows", {"n_enter", "n_exit", "n2"});
        cfg.flows = FlowConfiguration::make(field(source, section, "flows", "n_enter"),
                                            field(source, section, "flows", "n_exit"),
                                            field(source, section, "flows", "n2"),
                                            kFileSimplexTolerance);
      } else if (raw) {
        reject_unknown(source, section, "flows", {"f_enter", "f_exit", "f2", "f1"});
        FlowRates r;
        r.f_enter = field(source, section, "flows", "f_enter");
        r.f_exit = field(source, section, "flows", "f_exit");
        r.f2 = field(source, section, "flows", "f2");
        r.f1 = section.count("f1") ? field(source, section, "flows", "f1") : 800.0;
        cfg.rates = r;
      } else {
        throw ParseError(source, 0, "[flows] is empty");
      }
    } else if (name == "coefficients") {
      reject_unknown(source, section, "coefficients",
                     {"c1_t", "c2_t", "c1_m", "c2_m", "alpha", "beta", "omega", "gamma", "rho",
                      "delta"});
      std::array<double, CostCoefficients::kCount> v{};
      for (std::size_t i = 0; i < CostCoefficients::kCount; ++i) {
        const std::string key(CostCoefficients::kNames[i]);
        v[i] = (i < CostCoefficients::kFirstWeight && !section.count(key))
                   ? 1.0
                   : field(source, section, "coefficients", key);
      }
      cfg.coeffs = CostCoefficients::from_array(v);
    } else if (name == "options") {
      for (const auto& [key, value] : section) cfg.options[key] = value.data();
    } else {
      throw ParseError(source, 0, "unknown section [" + name + "]");
    }
  }
  return cfg;
}

ConfigFile read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_config(in, path.string());
}

FlowConfiguration require_flows(const ConfigFile& cfg) {
  if (cfg.flows) return *cfg.flows;
  if (cfg.rates) return normalize_flows(*cfg.rates);
  throw ParseError(cfg.source, 0, "missing section [flows]");
}

CostCoefficients require_coefficients(const ConfigFile& cfg) {
  if (!cfg.coeffs) throw ParseError(cfg.source, 0, "missing section [coefficients]");
  return *cfg.coeffs;
}

CostCoefficients read_coefficients(const std::filesystem::path& path) {
  return require_coefficients(read_config(path));
}

void write_coefficients(std::ostream& out, const CostCoefficients& coeffs,
                        const std::string& comment) {
  if (!comment.empty()) out << "; " << comment << '\n';
  out << "[coefficients]\n";
  const auto v = coeffs.as_array();
  char buf[64];
  for (std::size_t i = 0; i < CostCoefficients::kCount; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out << CostCoefficients::kNames[i] << " = " << buf << '\n';
  }
}

std::string format_sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

std::string format_percent(double value) {
  if (std::isnan(value)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", value);
  return buf;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << kDatasetHeader << '\n';
  for (const auto& p : data) {
    if (p.scenario_id.find_first_of(",\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "scenario id '" + p.scenario_id + "' contains a comma or newline");
    }
    out << p.scenario_id << ',' << format_sig(p.flows.n_enter(), 9) << ','
        << format_sig(p.flows.n_exit(), 9) << ',' << format_sig(p.flows.n2(), 9) << ','
        << format_sig(p.observed.x1_s(), 9) << ',' << format_sig(p.observed.x1_b(), 9) << ','
        << format_sig(p.weight, 9) << '\n';
  }
}

namespace {

DataPoint point_from_values(double ne, double nx, double n2, double xs, double xb, double weight,
                            std::string id) {
  DataPoint p{FlowConfiguration::make(ne, nx, n2, kFileSimplexTolerance),
              FlowDistribution::make(xs, xb, kFileSimplexTolerance), weight, std::move(id)};
  validate_dataset({p});
  return p;
}

DataPoint point_from_json(const json& j) {
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw Error(ErrorCode::ParseError, std::string("missing numeric field '") + key + "'");
    }
    return j[key].get<double>();
  };
  const double weight = j.contains("weight") ? num("weight") : 1.0;
  std::string id;
  if (j.contains("scenario_id")) {
    id = j["scenario_id"].is_string() ? j["scenario_id"].get<std::string>() : j["scenario_id"].dump();
  }
  return point_from_values(num("n_enter"), num("n_exit"), num("n2"), num("x1_s"), num("x1_b"),
                           weight, std::move(id));
}

Dataset read_json_dataset(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  const json* items = &doc;
  if (doc.is_object() && doc.contains("points")) items = &doc["points"];
  Dataset data;
  try {
    if (items->is_array()) {
      for (const auto& item : *items) {
        // Validation reports nest the observation under "point".
        data.push_back(point_from_json(item.contains("point") ? item["point"] : item));
      }
    } else if (items->is_object()) {
      data.push_back(point_from_json(*items));
    } else {
      throw Error(ErrorCode::ParseError, "expected an object or an array of objects");
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(source, 0, e.what());
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  return data;
}

}  // namespace

Dataset read_dataset(std::istream& in, const std::string& source) {
  in >> std::ws;
  const int first = in.peek();
  if (first == '{' || first == '[') return read_json_dataset(in, source);

  Dataset data;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != kDatasetHeader) {
        throw Error(ErrorCode::MissingHeader, source + ":" + std::to_string(line_no) +
                                                  ": expected header '" + kDatasetHeader + "'");
      }
      have_header = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      fields.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (fields.size() != 7) {
      throw ParseError(source, line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    double v[6];
    for (int k = 0; k < 6; ++k) {
      if (!parse_double(fields[1 + k], v[k])) {
        throw ParseError(source, line_no, "bad number '" + std::string(fields[1 + k]) + "'");
      }
    }
    try {
      data.push_back(point_from_values(v[0], v[1], v[2], v[3], v[4], v[5], std::string(fields[0])));
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::MissingHeader, source + ": empty dataset file");
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_dataset(in, path.string());
}

json to_json(const CostCoefficients& coeffs) {
  json j = json::object();
  const auto v = coeffs.as_array();
  for (std::size_t i = 0; i < CostCoefficients::kCount; ++i) {
    j[std::string(CostCoefficients::kNames[i])] = v[i];
  }
  return j;
}

json to_json(const WeavingConfiguration& cfg, const EquilibriumResult& result) {
  const auto& x = result.distribution;
  return {
      {"n_enter", cfg.flows().n_enter()},
      {"n_exit", cfg.flows().n_exit()},
      {"n2", cfg.flows().n2()},
      {"x1_s", x.x1_s()},
      {"x1_b", x.x1_b()},
      {"case", to_string(result.regime)},
      {"cost_steadfast", cost_steadfast(cfg, x)},
      {"cost_bypass", cost_bypass(cfg, x)},
      {"cost_gap", result.cost_gap_at_solution},
      {"residual", equilibrium_residual(cfg, x)},
      {"coefficients", to_json(cfg.coeffs())},
  };
}

json to_json(const CalibrationResult& result) {
  return {
      {"coefficients", to_json(result.coeffs)},
      {"objective", result.objective},
      {"per_restart_objectives", result.per_restart_objectives},
      {"iterations_used", result.iterations_used},
      {"degenerate", result.degenerate},
      {"warnings", result.warnings},
  };
}

namespace {
json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
}  // namespace

json to_json(const ValidationReport& report) {
  json points = json::array();
  for (const auto& e : report.points) {
    points.push_back({
        {"point",
         {{"scenario_id", e.point.scenario_id},
          {"n_enter", e.point.flows.n_enter()},
          {"n_exit", e.point.flows.n_exit()},
          {"n2", e.point.flows.n2()},
          {"x1_s", e.point.observed.x1_s()},
          {"x1_b", e.point.observed.x1_b()},
          {"weight", e.point.weight}}},
        {"predicted_x1_s", e.predicted.x1_s()},
        {"predicted_x1_b", e.predicted.x1_b()},
        {"abs_error", e.abs_error},
        {"rel_error", nullable(e.rel_error)},
    });
  }
  json grouped = json::object();
  for (const auto& [label, value] : report.grouped_mper) grouped[label] = nullable(value);
  json j = {
      {"mper", report.mper},
      {"n_points", report.n_points},
      {"excluded_zero_observed", report.excluded_zero_observed},
      {"grouped_mper", grouped},
      {"points", points},
  };
  j["group_by"] = report.group_by ? json(*report.group_by) : json(nullptr);
  return j;
}

json to_json(const FluctuationReport& report) {
  return {
      {"baseline", to_json(report.baseline)},
      {"variant", to_json(report.variant)},
      {"fr", report.fr},
      {"significant", report.significant},
      {"threshold", report.threshold},
  };
}

std::string format_solution(const WeavingConfiguration& cfg, const EquilibriumResult& result) {
  const auto& x = result.distribution;
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "n_enter         " << cfg.flows().n_enter() << '\n'
      << "n_exit          " << cfg.flows().n_exit() << '\n'
      << "n2              " << cfg.flows().n2() << '\n'
      << "x1_s            " << x.x1_s() << '\n'
      << "x1_b            " << x.x1_b() << '\n'
      << "case            " << to_string(result.regime) << '\n'
      << "cost_steadfast  " << cost_steadfast(cfg, x) << '\n'
      << "cost_bypass     " << cost_bypass(cfg, x) << '\n'
      << "cost_gap        " << std::setprecision(3) << std::scientific
      << result.cost_gap_at_solution << '\n';
  return out.str();
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  out << "points    " << report.n_points << '\n';
  if (report.excluded_zero_observed) {
    out << "excluded  " << report.excluded_zero_observed << " (observed x1_s = 0)\n";
  }
  out << "MPER      " << format_percent(report.mper) << '\n';
  if (!report.grouped_mper.empty()) {
    out << '\n' << std::left << std::setw(16) << (report.group_by ? *report.group_by : "group")
        << std::right << std::setw(10) << "MPER" << '\n';
    for (const auto& [label, value] : report.grouped_mper) {
      out << std::left << std::setw(16) << label << std::right << std::setw(10)
          << format_percent(value) << '\n';
    }
  }
  return out.str();
}

std::string format_report(const FluctuationReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "param" << std::right << std::setw(12) << "baseline"
      << std::setw(12) << "variant" << std::setw(12) << "FR" << '\n';
  const auto b = report.baseline.as_array();
  const auto v = report.variant.as_array();
  for (std::size_t i = 0; i < CostCoefficients::kCount; ++i) {
    const std::string name(CostCoefficients::kNames[i]);
    const auto it = report.fr.find(name);
    if (it == report.fr.end()) continue;
    out << std::left << std::setw(8) << name << std::right << std::fixed << std::setprecision(3)
        << std::setw(12) << b[i] << std::setw(12) << v[i] << std::setw(12)
        << format_percent(it->second) << (report.significant.count(name) ? "  *" : "") << '\n';
  }
  out << "* |FR| > " << format_sig(report.threshold, 4) << "%\n";
  return out.str();
}

void write_validation_csv(std::ostream& out, const ValidationReport& report) {
  out << "scenario_id,n_enter,n_exit,n2,observed_x1_s,predicted_x1_s,abs_error,rel_error\n";
  for (const auto& e : report.points) {
    out << e.point.scenario_id << ',' << format_sig(e.point.flows.n_enter(), 9) << ','
        << format_sig(e.point.flows.n_exit(), 9) << ',' << format_sig(e.point.flows.n2(), 9) << ','
        << format_sig(e.point.observed.x1_s(), 9) << ',' << format_sig(e.predicted.x1_s(), 9) << ','
        << format_sig(e.abs_error, 9) << ','
        << (std::isnan(e.rel_error) ? std::string() : format_sig(e.rel_error, 9)) << '\n';
  }
}

}  // namespace weave::io
