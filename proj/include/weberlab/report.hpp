// Run configuration and machine-readable study reports (CSV primary, JSON mirror).
#ifndef WEBERLAB_REPORT_HPP
#define WEBERLAB_REPORT_HPP

#include <weberlab/spectral.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace weberlab {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;                    // e.g. "weber study"
  std::optional<DomainKind> kind;
  std::string mesh_path;                  // used when kind is not set
  int n = 0;                              // divisions for a generated mesh (0: command default)
  int degree = 0;
  std::string policy = "minimal";
  std::string flavor = "tangential";
  bool include_flux = true;
  int levels = 3;
  std::string eta;                        // empty: as stored in the mesh
  std::string output;
  std::size_t dof_cap = 40000;
  int threads = 0;                        // 0: WEBERLAB_THREADS or hardware
  std::uint64_t seed = 1;

  // Throws ConfigError on the first invalid field.
  void validate() const;
  std::string to_json() const;
};

std::string csv_header();
// wall_ms is written as "NA" when timings are omitted, so reruns are byte-identical.
std::string csv_row(const WeberRow& row, bool omit_timings = false);
void write_csv(std::ostream& os, const std::vector<WeberRow>& rows, bool omit_timings = false);

// Config, mesh hashes, rows and truncation notice.
std::string report_json(const RunConfig& cfg, const std::vector<WeberRow>& rows, bool truncated = false,
                        const std::string& notice = "", bool omit_timings = false);

}  // namespace weberlab

#endif
