#include "weave/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "weave/calibration.hpp"
#include "weave/error.hpp"

namespace weave {

double compensated_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

MperResult mper(std::span<const double> predicted, std::span<const double> observed,
                std::optional<std::span<const double>> weights) {
  if (predicted.size() != observed.size() || predicted.empty()) {
    throw Error(ErrorCode::LengthMismatch,
                "predicted (" + std::to_string(predicted.size()) + ") and observed (" +
                    std::to_string(observed.size()) + ") must be equal-length and non-empty");
  }
  if (weights && weights->size() != observed.size()) {
    throw Error(ErrorCode::LengthMismatch, "weights must match the observations in length");
  }

  MperResult out;
  std::vector<double> terms;
  std::vector<double> used_weights;
  terms.reserve(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] == 0.0) {
      ++out.excluded_zero_observed;
      continue;
    }
    const double w = weights ? (*weights)[i] : 1.0;
    terms.push_back(w * std::fabs((observed[i] - predicted[i]) / observed[i]));
    used_weights.push_back(w);
  }
  out.used = terms.size();
  if (terms.empty()) {
    throw Error(ErrorCode::ZeroObserved, "every observed x1_s is zero; MPER is undefined");
  }
  const double total_weight = compensated_sum(used_weights);
  if (!(total_weight > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "weights of the usable points sum to zero");
  }
  out.percent = compensated_sum(terms) / total_weight * 100.0;
  return out;
}

std::optional<GroupKey> parse_group_key(std::string_view text) {
  if (text == "scenario" || text == "scenario_id") return GroupKey::ScenarioId;
  if (text == "enter" || text == "n_enter") return GroupKey::NEnter;
  if (text == "exit" || text == "n_exit") return GroupKey::NExit;
  if (text == "lane2" || text == "n2") return GroupKey::N2;
  return std::nullopt;
}

const char* to_string(GroupKey key) {
  switch (key) {
    case GroupKey::ScenarioId: return "scenario_id";
    case GroupKey::NEnter: return "n_enter";
    case GroupKey::NExit: return "n_exit";
    case GroupKey::N2: return "n2";
  }
  return "";
}

namespace {

std::string group_label(const DataPoint& p, GroupKey key) {
  double v = 0.0;
  switch (key) {
    case GroupKey::ScenarioId: return p.scenario_id;
    case GroupKey::NEnter: v = p.flows.n_enter(); break;
    case GroupKey::NExit: v = p.flows.n_exit(); break;
    case GroupKey::N2: v = p.flows.n2(); break;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

ValidationReport validate(const CostCoefficients& coeffs, const Dataset& data,
                          std::optional<GroupKey> group_by) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to validate");
  coeffs.validate();

  ValidationReport report;
  report.n_points = data.size();
  report.points.reserve(data.size());
  std::vector<double> pred;
  std::vector<double> obs;
  for (const auto& p : data) {
    const auto x = predict(coeffs, p.flows);
    const double abs_err = std::fabs(p.observed.x1_s() - x.x1_s());
    const double rel = p.observed.x1_s() == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                                : abs_err / p.observed.x1_s();
    report.points.push_back({p, x, abs_err, rel});
    pred.push_back(x.x1_s());
    obs.push_back(p.observed.x1_s());
  }
  const auto overall = mper(pred, obs);
  report.mper = overall.percent;
  report.excluded_zero_observed = overall.excluded_zero_observed;

  if (group_by) {
    report.group_by = to_string(*group_by);
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto& g = groups[group_label(data[i], *group_by)];
      g.first.push_back(pred[i]);
      g.second.push_back(obs[i]);
    }
    for (const auto& [label, g] : groups) {
      try {
        report.grouped_mper[label] = mper(g.first, g.second).percent;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroObserved) throw;
        report.grouped_mper[label] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return report;
}

FluctuationReport fluctuating_rate(const CostCoefficients& baseline,
                                   const CostCoefficients& variant, double threshold,
                                   bool include_unit_costs) {
  baseline.validate();
  variant.validate();
  FluctuationReport out{baseline, variant, {}, {}, threshold};
  const auto b = baseline.as_array();
  const auto v = variant.as_array();
  const std::size_t first = include_unit_costs ? 0 : CostCoefficients::kFirstWeight;
  for (std::size_t i = first; i < CostCoefficients::kCount; ++i) {
    const std::string name(CostCoefficients::kNames[i]);
    const double fr = (v[i] - b[i]) / b[i] * 100.0;
    out.fr[name] = fr;
    if (std::fabs(fr) > threshold) out.significant.insert(name);
  }
  return out;
}

}  // namespace weave
