#include <weberlab/report.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace weberlab {

namespace {

// Shortest text that round-trips the double.
std::string num(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

nlohmann::json row_json(const WeberRow& r, bool omit_timings) {
  nlohmann::json j;
  j["level"] = r.level;
  j["n"] = r.n;
  j["h"] = r.h;
  j["dofs"] = r.dofs;
  j["degree"] = r.degree;
  j["policy"] = r.policy;
  j["flavor"] = to_string(r.flavor);
  j["include_flux"] = r.include_flux;
  j["lambda_max"] = r.lambda_max;
  j["c_w"] = r.c_w;
  j["lambda_min_A"] = r.lambda_min_A;
  j["residual"] = r.residual;
  j["wall_ms"] = omit_timings ? nlohmann::json(nullptr) : nlohmann::json(r.wall_ms);
  j["method"] = r.method;
  j["mesh_hash"] = r.mesh_hash;
  return j;
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["kind"] = c.kind ? nlohmann::json(to_string(*c.kind)) : nlohmann::json(nullptr);
  j["mesh_path"] = c.mesh_path;
  j["n"] = c.n;
  j["degree"] = c.degree;
  j["policy"] = c.policy;
  j["flavor"] = c.flavor;
  j["include_flux"] = c.include_flux;
  j["levels"] = c.levels;
  j["eta"] = c.eta;
  j["output"] = c.output;
  j["dof_cap"] = c.dof_cap;
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (!kind && mesh_path.empty()) throw ConfigError("either a domain kind or a mesh path is required");
  if (kind && !mesh_path.empty()) throw ConfigError("give a domain kind or a mesh path, not both");
  if (n < 0) throw ConfigError("divisions must be positive");
  if (degree < 0 || degree > max_supported_degree)
    throw ConfigError("degree must lie in 0.." + std::to_string(max_supported_degree));
  if (levels < 1) throw ConfigError("levels must be positive");
  if (dof_cap == 0) throw ConfigError("the DOF cap must be positive");
  if (threads < 0) throw ConfigError("thread count must be non-negative");
  try {
    FaceSpacePolicy::parse(policy);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("policy: ") + e.what());
  }
  if (flavor != "tangential" && flavor != "normal") throw ConfigError("flavor must be tangential or normal");
  if (!eta.empty()) {
    try {
      EtaSpec::parse(eta);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("eta: ") + e.what());
    }
  }
}

std::string RunConfig::to_json() const { return config_json(*this).dump(); }

std::string csv_header() {
  return "level,h,dofs,degree,policy,flavor,include_flux,lambda_max,c_w,lambda_min_A,residual,wall_ms";
}

std::string csv_row(const WeberRow& r, bool omit_timings) {
  return std::to_string(r.level) + "," + num(r.h) + "," + std::to_string(r.dofs) + "," + std::to_string(r.degree) + "," +
         r.policy + "," + to_string(r.flavor) + "," + (r.include_flux ? "1" : "0") + "," + num(r.lambda_max) + "," +
         num(r.c_w) + "," + num(r.lambda_min_A) + "," + num(r.residual) + "," + (omit_timings ? "NA" : num(r.wall_ms));
}

void write_csv(std::ostream& os, const std::vector<WeberRow>& rows, bool omit_timings) {
  os << csv_header() << '\n';
  for (const auto& r : rows) os << csv_row(r, omit_timings) << '\n';
}

std::string report_json(const RunConfig& cfg, const std::vector<WeberRow>& rows, bool truncated,
                        const std::string& notice, bool omit_timings) {
  nlohmann::json j;
  j["config"] = config_json(cfg);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) j["rows"].push_back(row_json(r, omit_timings));
  j["truncated"] = truncated;
  j["notice"] = notice;
  return j.dump(2) + "\n";
}

}  // namespace weberlab
