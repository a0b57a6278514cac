#include <sstream>

#include "json_util.hpp"
#include "ssdeconv/harness.hpp"
#include "ssdeconv/series_io.hpp"

namespace ssdeconv {

namespace {

using detail::json;

json config_json(const ExperimentConfig& c) {
  json j;
  j["model"] = to_string(c.model);
  j["n"] = c.n;
  j["replicates"] = c.replicates;
  j["master_seed"] = c.master_seed;
  j["nodes"] = c.nodes;
  j["mc_draws"] = c.mc_draws;
  j["tolerance"] = c.tolerance;
  j["max_doublings"] = c.max_doublings;
  j["level"] = c.level;
  j["t2_samples"] = c.t2_samples;
  j["conv_draws"] = c.conv_draws;
  j["truth_draws"] = c.truth_draws;
  j["truth_seed"] = c.truth_seed;
  j["burn_in"] = c.burn_in;
  j["bandwidth"] = c.bandwidth ? json(*c.bandwidth) : json(nullptr);
  j["kalman_init"] = to_string(c.kalman_init);
  j["grid"] = {c.grid_lo, c.grid_hi, c.grid_points};
  return j;
}

std::string header(const ExperimentConfig& c, double h) {
  return "# config_hash=" + c.hash() + " master_seed=" + std::to_string(c.master_seed) + " h=" + format_double(h) +
         "\n# config=" + config_json(c).dump() + "\n";
}

std::string cell(const QuantityStats* q, bool mean) {
  if (!q) return "";
  return format_double(mean ? q->mean : q->q90);
}

}  // namespace

std::string ExperimentConfig::to_json() const { return config_json(*this).dump(); }

const QuantityStats* MetricReport::quantity(const std::string& name) const {
  for (const auto& q : errors)
    if (q.quantity == name) return &q;
  return nullptr;
}

const MethodStats* MetricReport::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.method == name) return &m;
  return nullptr;
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << header(config, bandwidth);
  const std::string prefix =
      to_string(config.model) + "," + std::to_string(config.n) + "," + std::to_string(config.replicates) + ",";
  if (table == "table1") {
    out << "model,n,replicates,h,A_mean,A_q90,fX_mean,fX_q90,feps_mean,feps_q90,z_mean,z_q90,g_mean,g_q90\n";
    out << prefix << format_double(bandwidth);
    for (const char* name : {"A", "f_X", "f_eps", "z", "g"}) {
      const auto* q = quantity(name);
      out << ',' << cell(q, true) << ',' << cell(q, false);
    }
    out << '\n';
  } else {
    out << "model,n,replicates,method,cov_F,cov_PX,cov_PY,len_F,len_PX,len_PY\n";
    for (const auto& m : methods) {
      out << prefix << m.method;
      for (double c : m.coverage) out << ',' << format_double(c);
      for (double l : m.mean_length) out << ',' << format_double(l);
      out << '\n';
    }
  }
  return out.str();
}

std::string MetricReport::to_json() const {
  json j;
  j["table"] = table;
  j["config"] = config_json(config);
  j["config_hash"] = config.hash();
  j["bandwidth"] = bandwidth;
  json errs = json::object();
  for (const auto& q : errors) errs[q.quantity] = {{"mean", q.mean}, {"q90", q.q90}, {"values", q.values}};
  j["errors"] = errs;
  json ms = json::object();
  for (const auto& m : methods) {
    json entry;
    const char* names[3] = {"F", "PX", "PY"};
    for (int k = 0; k < 3; ++k) {
      std::vector<int> hits(m.hits[k].begin(), m.hits[k].end());
      entry[names[k]] = {{"coverage", m.coverage[k]}, {"mean_length", m.mean_length[k]},
                         {"hits", hits}, {"lengths", m.lengths[k]}};
    }
    ms[m.method] = entry;
  }
  j["methods"] = ms;
  return j.dump(2);
}

std::string BandTable::to_csv() const {
  std::ostringstream out;
  out << header(config, config.bandwidth_for(BenchmarkModel::make(config.model))) << "# target=" << to_string(target) << '\n';
  out << "grid,truth,mean,q05,q95,q50\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_double(grid[i]) << ',' << format_double(truth[i]) << ',' << format_double(mean[i]) << ','
        << format_double(q05[i]) << ',' << format_double(q95[i]) << ',' << format_double(q50[i]) << '\n';
  }
  return out.str();
}

}  // namespace ssdeconv
