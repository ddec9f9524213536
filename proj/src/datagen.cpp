#include "weave/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <tuple>
#include <unordered_set>

#include "weave/equilibrium.hpp"
#include "weave/error.hpp"

namespace weave {

namespace {

constexpr double kGridEps = 1e-9;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::mt19937_64 substream(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Integer key used to sort and deduplicate lattice points that may differ
// in the last few bits depending on how they were computed.
using GridKey = std::tuple<long long, long long, long long>;
GridKey key_of(const FlowConfiguration& c) {
  return {std::llround(c.n_enter() * 1e9), std::llround(c.n_exit() * 1e9),
          std::llround(c.n2() * 1e9)};
}

std::vector<FlowConfiguration> sorted_unique(std::vector<FlowConfiguration> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.as_array() < b.as_array();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return key_of(a) == key_of(b); }),
            pts.end());
  return pts;
}

// Ratios that are (to within rounding) a fraction over 720720 = lcm(1..16)
// are replaced by the correctly rounded quotient, so the same lattice point
// reached by different arithmetic compares equal.
double snap(double x) {
  constexpr double kDenominator = 720720.0;
  const double scaled = x * kDenominator;
  const double nearest = std::round(scaled);
  return std::fabs(scaled - nearest) < 1e-6 ? nearest / kDenominator : x;
}

FlowConfiguration lattice_point(double a, double b, double c) {
  return FlowConfiguration::make(snap(a), snap(b), snap(c));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

const char* to_string(FlowClass c) {
  switch (c) {
    case FlowClass::Enter: return "enter";
    case FlowClass::Exit: return "exit";
    case FlowClass::Lane2: return "lane2";
    case FlowClass::None: return "none";
  }
  return "none";
}

std::optional<FlowClass> parse_flow_class(std::string_view text) {
  const auto s = lower(trim(text));
  if (s == "enter" || s == "n_enter") return FlowClass::Enter;
  if (s == "exit" || s == "n_exit") return FlowClass::Exit;
  if (s == "lane2" || s == "n2") return FlowClass::Lane2;
  if (s == "none" || s.empty()) return FlowClass::None;
  return std::nullopt;
}

void ScenarioGrid::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(total_flow > 0.0) || !(neighbor_budget > 0.0) || !(f1 > 0.0)) {
    bad("grid flows must be positive");
  }
  if (std::fabs(neighbor_budget + f1 - total_flow) > 1e-9 * total_flow) {
    bad("neighbor_budget + f1 must equal total_flow");
  }
  if (!(fixed_value >= 0.0 && fixed_value <= 1.0)) bad("fixed_value must lie in [0, 1]");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) bad("grid_step must lie in (0, 1]");
  if (!std::isfinite(free_min) || !std::isfinite(free_max)) bad("free range must be finite");
}

std::vector<FlowConfiguration> generate_grid(const ScenarioGrid& grid) {
  grid.validate();
  const double s = grid.grid_step;
  auto in_range = [&](double v) {
    return v >= grid.free_min - kGridEps && v <= grid.free_max + kGridEps;
  };

  std::vector<FlowConfiguration> pts;
  if (grid.fixed_class == FlowClass::None) {
    for (long i = 0; i * s <= 1.0 + kGridEps; ++i) {
      const double a = std::min(1.0, i * s);
      for (long j = 0; a + j * s <= 1.0 + kGridEps; ++j) {
        const double b = std::min(1.0 - a, j * s);
        const double c = std::max(0.0, 1.0 - a - b);
        if (in_range(a) && in_range(b) && in_range(c)) {
          pts.push_back(lattice_point(a, b, c));
        }
      }
    }
  } else {
    const double v = grid.fixed_value;
    const double rem = 1.0 - v;
    for (long k = 0; k * s <= rem + kGridEps; ++k) {
      const double a = std::min(rem, k * s);
      const double b = std::max(0.0, rem - a);
      if (!in_range(a) || !in_range(b)) continue;
      switch (grid.fixed_class) {
        case FlowClass::Enter: pts.push_back(lattice_point(v, a, b)); break;
        case FlowClass::Exit: pts.push_back(lattice_point(a, v, b)); break;
        case FlowClass::Lane2: pts.push_back(lattice_point(a, b, v)); break;
        case FlowClass::None: break;
      }
    }
  }
  pts = sorted_unique(std::move(pts));
  if (pts.empty()) throw Error(ErrorCode::EmptyGrid, "grid constraints admit no points");
  return pts;
}

std::vector<FlowConfiguration> generate_grids(const std::vector<ScenarioGrid>& grids) {
  std::vector<FlowConfiguration> all;
  for (const auto& g : grids) {
    auto pts = generate_grid(g);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  all = sorted_unique(std::move(all));
  if (all.empty()) throw Error(ErrorCode::EmptyGrid, "grid constraints admit no points");
  return all;
}

std::vector<ScenarioGrid> calibration_grids() {
  std::vector<ScenarioGrid> grids;
  const ScenarioGrid base;
  for (FlowClass c : {FlowClass::Enter, FlowClass::Exit, FlowClass::Lane2}) {
    for (double fixed_flow : {100.0, 200.0, 250.0, 400.0}) {
      ScenarioGrid g = base;
      g.fixed_class = c;
      g.fixed_value = fixed_flow / base.neighbor_budget;
      g.grid_step = 10.0 / base.neighbor_budget;
      grids.push_back(g);
    }
  }
  return grids;
}

Dataset synthesize_equilibrium_noise(const std::vector<FlowConfiguration>& configs,
                                     const CostCoefficients& hidden, double sigma,
                                     int samples_per_config, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be finite and >= 0");
  }
  if (samples_per_config < 1) {
    throw Error(ErrorCode::InvalidArgument, "samples_per_config must be >= 1");
  }
  hidden.validate();

  Dataset data;
  data.reserve(configs.size() * static_cast<std::size_t>(samples_per_config));
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto eq = solve_equilibrium(WeavingConfiguration(configs[i], hidden));
    auto rng = substream(seed, i);
    std::normal_distribution<double> noise(0.0, sigma);
    for (int k = 0; k < samples_per_config; ++k) {
      DataPoint p{configs[i], eq.distribution, 1.0, std::to_string(i)};
      if (sigma > 0.0) {
        p.observed = FlowDistribution::from_steadfast(
            std::clamp(eq.distribution.x1_s() + noise(rng), 0.0, 1.0));
      }
      data.push_back(std::move(p));
    }
  }
  return data;
}

double logit_fixed_point(const WeavingConfiguration& cfg, double sensitivity, int iterations,
                         bool* converged) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorCode::InvalidArgument, "sensitivity must be > 0");
  }
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");

  auto response = [&](double xb) {
    const auto x = FlowDistribution::from_bypass(xb);
    return logistic(sensitivity * (cost_steadfast(cfg, x) - cost_bypass(cfg, x)));
  };

  double xb = 0.5;
  double step = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const double next = (1.0 - kLogitDamping) * xb + kLogitDamping * response(xb);
    step = std::fabs(next - xb);
    xb = next;
  }
  const bool settled = step <= kLogitConvergenceTolerance;
  if (converged) *converged = settled;
  if (settled) return xb;

  // The damped map oscillates when sensitivity times the cost slope is
  // large. x - response(x) is strictly increasing, so bisect for its root.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - response(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LogitResult synthesize_logit(const std::vector<FlowConfiguration>& configs,
                             const CostCoefficients& hidden, double sensitivity,
                             std::int64_t population, int iterations, std::uint64_t seed) {
  if (population < 1) throw Error(ErrorCode::InvalidArgument, "population must be >= 1");
  hidden.validate();

  LogitResult out;
  out.data.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const WeavingConfiguration cfg(configs[i], hidden);
    bool converged = true;
    const double p = logit_fixed_point(cfg, sensitivity, iterations, &converged);
    if (!converged) {
      out.nonconverged.push_back(i);
    }
    auto rng = substream(seed, i);
    std::binomial_distribution<std::int64_t> draw(population, std::clamp(p, 0.0, 1.0));
    const auto bypass = draw(rng);
    const double share = static_cast<double>(bypass) / static_cast<double>(population);
    out.data.push_back({configs[i], FlowDistribution::from_bypass(share),
                        static_cast<double>(population), std::to_string(i)});
  }
  if (!out.nonconverged.empty()) {
    out.warnings.push_back("NonConvergence: damped logit iteration did not settle for " +
                           std::to_string(out.nonconverged.size()) + " of " +
                           std::to_string(configs.size()) +
                           " configurations; fixed point refined by bisection");
  }
  return out;
}

namespace {

std::optional<VehicleClass> parse_vclass(std::string_view s) {
  const auto v = lower(s);
  if (v == "through1") return VehicleClass::Through1;
  if (v == "through2") return VehicleClass::Through2;
  if (v == "enter") return VehicleClass::Enter;
  if (v == "exit") return VehicleClass::Exit;
  return std::nullopt;
}

std::optional<Decision> parse_decision(std::string_view s) {
  const auto v = lower(s);
  if (v == "steadfast") return Decision::Steadfast;
  if (v == "bypass") return Decision::Bypass;
  if (v == "na" || v.empty()) return Decision::NA;
  return std::nullopt;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct ScenarioTally {
  std::string id;
  FlowConfiguration flows;
  std::size_t line;
  std::int64_t steadfast = 0;
  std::int64_t bypass = 0;
  std::unordered_set<std::string> seen;
};

}  // namespace

IngestResult ingest_vehicle_log(std::istream& in, const IngestOptions& opts,
                                const std::string& source) {
  if (opts.warmup_steps < 0) throw Error(ErrorCode::InvalidArgument, "warmup_steps must be >= 0");
  if (opts.window_steps <= 0) throw Error(ErrorCode::InvalidArgument, "window_steps must be > 0");
  const std::int64_t window_end = opts.warmup_steps + opts.window_steps;

  IngestResult result;
  std::optional<ScenarioTally> current;
  auto finish = [&]() {
    if (!current) return;
    const auto total = current->steadfast + current->bypass;
    if (total == 0) {
      result.warnings.push_back("NoThroughVehicles: scenario '" + current->id +
                                "' has no Through1 decisions in the window; skipped");
    } else {
      result.data.push_back({current->flows,
                             FlowDistribution::from_steadfast(static_cast<double>(current->steadfast) /
                                                              static_cast<double>(total)),
                             static_cast<double>(total), current->id});
    }
    current.reset();
  };

  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '#') {
      const auto fields = split(line, ',');
      if (fields[0] != "#scenario") continue;
      if (!have_header) {
        throw Error(ErrorCode::MissingHeader,
                    source + ":" + std::to_string(line_no) + ": scenario row before column header");
      }
      if (fields.size() != 5) {
        throw ParseError(source, line_no, "expected #scenario,<id>,<n_enter>,<n_exit>,<n2>");
      }
      double n[3];
      for (int k = 0; k < 3; ++k) {
        if (!parse_number(fields[2 + k], n[k])) {
          throw ParseError(source, line_no, "bad flow ratio '" + std::string(fields[2 + k]) + "'");
        }
      }
      finish();
      try {
        current.emplace(ScenarioTally{std::string(fields[1]),
                                      FlowConfiguration::make(n[0], n[1], n[2], 1e-6), line_no, 0, 0, {}});
      } catch (const Error& e) {
        throw ParseError(source, line_no, e.what());
      }
      continue;
    }

    const auto fields = split(line, ',');
    if (!have_header) {
      if (fields.size() == 4 && fields[0] == "timestep" && fields[1] == "vehicle_id" &&
          fields[2] == "vclass" && fields[3] == "decision") {
        have_header = true;
        continue;
      }
      throw Error(ErrorCode::MissingHeader,
                  source + ":" + std::to_string(line_no) +
                      ": expected header 'timestep,vehicle_id,vclass,decision'");
    }
    if (!current) {
      throw Error(ErrorCode::MissingHeader,
                  source + ":" + std::to_string(line_no) + ": record before any #scenario row");
    }
    if (fields.size() != 4) throw ParseError(source, line_no, "expected 4 fields");

    VehicleRecord rec;
    if (!parse_number(fields[0], rec.timestep)) {
      throw ParseError(source, line_no, "bad timestep '" + std::string(fields[0]) + "'");
    }
    rec.vehicle_id = std::string(fields[1]);
    const auto vclass = parse_vclass(fields[2]);
    if (!vclass) throw ParseError(source, line_no, "unknown vclass '" + std::string(fields[2]) + "'");
    const auto decision = parse_decision(fields[3]);
    if (!decision) {
      throw ParseError(source, line_no, "unknown decision '" + std::string(fields[3]) + "'");
    }
    rec.vclass = *vclass;
    rec.decision = *decision;
    if ((rec.vclass == VehicleClass::Through1) != (rec.decision != Decision::NA)) {
      throw ParseError(source, line_no, "a decision is required for Through1 and only Through1");
    }
    ++result.records_read;

    if (rec.vclass != VehicleClass::Through1) continue;
    // First appearance decides; later rows of the same vehicle are ignored.
    if (!current->seen.insert(rec.vehicle_id).second) continue;
    if (rec.timestep < opts.warmup_steps || rec.timestep >= window_end) continue;
    ++result.records_in_window;
    if (rec.decision == Decision::Steadfast) {
      ++current->steadfast;
    } else {
      ++current->bypass;
    }
  }
  if (!have_header) throw Error(ErrorCode::MissingHeader, source + ": empty vehicle log");
  finish();
  if (result.data.empty()) {
    throw Error(ErrorCode::NoThroughVehicles,
                source + ": no scenario has Through1 decisions after warmup");
  }
  return result;
}

IngestResult ingest_vehicle_log(const std::filesystem::path& path, const IngestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return ingest_vehicle_log(in, opts, path.string());
}

}  // namespace weave
