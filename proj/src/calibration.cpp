#include "weave/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "weave/equilibrium.hpp"
#include "weave/error.hpp"

namespace weave {

void CalibrationOptions::validate() const {
  if (!(weight_lower_bound > 0.0 && weight_lower_bound < weight_upper_bound) ||
      !std::isfinite(weight_upper_bound)) {
    throw Error(ErrorCode::InvalidArgument, "weight bounds must satisfy 0 < lower < upper");
  }
  if (!(unit_cost_lower_bound > 0.0 && unit_cost_lower_bound < unit_cost_upper_bound) ||
      !std::isfinite(unit_cost_upper_bound)) {
    throw Error(ErrorCode::InvalidArgument, "unit cost bounds must satisfy 0 < lower < upper");
  }
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
}

FlowDistribution predict(const CostCoefficients& coeffs, const FlowConfiguration& flows) {
  return solve_equilibrium(WeavingConfiguration(flows, coeffs)).distribution;
}

double calibration_objective(const CostCoefficients& coeffs, const Dataset& data) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : data) {
    const double err = predict(coeffs, p.flows).x1_s() - p.observed.x1_s();
    num += p.weight * err * err;
    den += p.weight;
  }
  return den > 0.0 ? num / den : 0.0;
}

namespace {

// Maps the unit cube onto the search box, log-uniformly per axis.
class SearchSpace {
 public:
  SearchSpace(const CalibrationOptions& opts) {
    if (!opts.fixed_unit_costs) {
      // C1t stays at 1 as the numeraire.
      for (std::size_t i : {1u, 2u, 3u}) {
        add(i, opts.unit_cost_lower_bound, opts.unit_cost_upper_bound);
      }
    }
    for (std::size_t i = CostCoefficients::kFirstWeight; i < CostCoefficients::kCount; ++i) {
      add(i, opts.weight_lower_bound, opts.weight_upper_bound);
    }
  }

  std::size_t dim() const { return index_.size(); }

  CostCoefficients decode(const std::vector<double>& u) const {
    std::array<double, CostCoefficients::kCount> v{};
    v.fill(1.0);
    for (std::size_t k = 0; k < index_.size(); ++k) {
      const double t = std::clamp(u[k], 0.0, 1.0);
      // Pin the end points exactly so active bounds are reported as such.
      double value = t == 0.0   ? lo_[k]
                     : t == 1.0 ? hi_[k]
                                : lo_[k] * std::exp(t * std::log(hi_[k] / lo_[k]));
      v[index_[k]] = std::clamp(value, lo_[k], hi_[k]);
    }
    return CostCoefficients::from_array(v);
  }

 private:
  void add(std::size_t i, double lo, double hi) {
    index_.push_back(i);
    lo_.push_back(lo);
    hi_.push_back(hi);
  }
  std::vector<std::size_t> index_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct LocalResult {
  std::vector<double> u;
  double value;
  int iterations;
};

// Nelder-Mead on [0,1]^n with trial points projected back onto the cube.
// Restarts the simplex around the incumbent after each convergence until a
// restart no longer improves by more than the tolerance.
template <typename F>
LocalResult nelder_mead(F&& f, std::vector<double> start, int max_iterations, double tolerance) {
  const std::size_t n = start.size();
  auto project = [](std::vector<double>& u) {
    for (double& t : u) t = std::clamp(t, 0.0, 1.0);
  };
  project(start);

  std::vector<std::vector<double>> pts(n + 1);
  std::vector<double> vals(n + 1);
  int iterations = 0;
  double incumbent = f(start);
  std::vector<double> best = start;
  double edge = 0.1;

  while (iterations < max_iterations) {
    pts[0] = best;
    vals[0] = incumbent;
    for (std::size_t i = 0; i < n; ++i) {
      pts[i + 1] = best;
      // Step inward when the incumbent sits on the upper face.
      pts[i + 1][i] += best[i] + edge <= 1.0 ? edge : -edge;
      project(pts[i + 1]);
      vals[i + 1] = f(pts[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    while (iterations < max_iterations) {
      ++iterations;
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t lo = order.front();
      const std::size_t hi = order.back();
      const std::size_t second = order[n - 1];

      double size = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::fabs(pts[i][k] - pts[lo][k]));
      }
      if (vals[hi] - vals[lo] <= tolerance * (std::fabs(vals[lo]) + tolerance) && size <= std::sqrt(tolerance)) break;
      if (size <= 1e-10) break;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == hi) continue;
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
      }
      auto along = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (pts[hi][k] - centroid[k]);
        project(p);
        return p;
      };

      auto reflected = along(-1.0);
      const double fr = f(reflected);
      if (fr < vals[lo]) {
        auto expanded = along(-2.0);
        const double fe = f(expanded);
        if (fe < fr) {
          pts[hi] = std::move(expanded);
          vals[hi] = fe;
        } else {
          pts[hi] = std::move(reflected);
          vals[hi] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[hi] = std::move(reflected);
        vals[hi] = fr;
        continue;
      }
      auto contracted = fr < vals[hi] ? along(-0.5) : along(0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, vals[hi])) {
        pts[hi] = std::move(contracted);
        vals[hi] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == lo) continue;
        for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[lo][k] + 0.5 * (pts[i][k] - pts[lo][k]);
        vals[i] = f(pts[i]);
      }
    }

    const auto lo = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    const double improvement = incumbent - vals[lo];
    if (vals[lo] < incumbent) {
      incumbent = vals[lo];
      best = pts[lo];
    }
    if (improvement <= tolerance * (std::fabs(incumbent) + tolerance)) break;
    edge = std::max(0.01, edge * 0.5);
  }
  return {best, incumbent, iterations};
}

// The equilibrium only sees beta, omega and delta through
// C1t*beta + C1m*omega (intercept) and C2m*delta + C1m*omega (slope), so
// moving along (C1m/C1t, -1, C1m/C2m) changes no prediction. Slide omega
// down to its lower bound, as far as the upper bounds on beta and delta
// allow, so that fits are reported in one canonical form.
CostCoefficients canonicalize(CostCoefficients c, const CalibrationOptions& opts) {
  const double beta_rate = c.c1_m / c.c1_t;
  const double delta_rate = c.c1_m / c.c2_m;
  double shift = c.omega - opts.weight_lower_bound;
  shift = std::min(shift, (opts.weight_upper_bound - c.beta) / beta_rate);
  shift = std::min(shift, (opts.weight_upper_bound - c.delta) / delta_rate);
  if (!(shift > 0.0)) return c;
  c.omega -= shift;
  c.beta = std::min(opts.weight_upper_bound, c.beta + beta_rate * shift);
  c.delta = std::min(opts.weight_upper_bound, c.delta + delta_rate * shift);
  if (c.omega - opts.weight_lower_bound < 1e-12) c.omega = opts.weight_lower_bound;
  return c;
}

}  // namespace

CalibrationResult calibrate(const Dataset& data, const CalibrationOptions& opts) {
  opts.validate();
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "calibration needs at least one point");
  validate_dataset(data);
  double total_weight = 0.0;
  for (const auto& p : data) total_weight += p.weight;
  if (!(total_weight > 0.0)) {
    throw Error(ErrorCode::EmptyDataset, "all data point weights are zero");
  }

  CalibrationResult result;
  const double first = data.front().observed.x1_s();
  result.degenerate = (first == 0.0 || first == 1.0) &&
                      std::all_of(data.begin(), data.end(),
                                  [&](const DataPoint& p) { return p.observed.x1_s() == first; });
  if (result.degenerate) {
    result.warnings.push_back(
        "DegenerateDataset: every observation sits at the same boundary; coefficients are only "
        "constrained by an inequality");
  }

  const SearchSpace space(opts);
  auto objective = [&](const std::vector<double>& u) {
    return calibration_objective(space.decode(u), data);
  };

  struct Candidate {
    CostCoefficients coeffs;
    double value;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(opts.restarts));
  for (int r = 0; r < opts.restarts; ++r) {
    // Independent stream per restart so the result does not depend on the
    // order restarts are run in.
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> start(space.dim());
    for (double& t : start) t = unit(rng);

    const auto local = nelder_mead(objective, start, opts.max_iterations, opts.tolerance);
    result.iterations_used += local.iterations;
    auto fitted = space.decode(local.u);
    double value = local.value;
    const auto canonical = canonicalize(fitted, opts);
    const double canonical_value = calibration_objective(canonical, data);
    // Rounding may move the objective by a few ulps along the invariant
    // direction; anything larger means the shift was not neutral.
    if (canonical_value <= value + opts.tolerance * (value + opts.tolerance)) {
      fitted = canonical;
      value = canonical_value;
    }
    result.per_restart_objectives.push_back(value);
    candidates.push_back({fitted, value});
  }

  const auto winner = std::min_element(
      candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.coeffs.as_array() < b.coeffs.as_array();
      });
  result.coeffs = winner->coeffs;
  result.objective = winner->value;
  return result;
}

}  // namespace weave
