// Per-cell verification suites: polynomial decompositions, stabilization consistency and
// tangential jump control, reconstruction relations and commutation.
//
#ifndef WEBERLAB_VERIFY_HPP
#define WEBERLAB_VERIFY_HPP

#include <weberlab/hybridspace.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace weberlab {

struct CheckRow {
  std::string suite;
  std::string check;
  long cell = -1;  // -1 for mesh-level checks
  int degree = 0;
  std::string policy;
  double value = 0.;
  double limit = 0.;
  bool pass = false;
  bool skipped = false;  // non-star-shaped cell
};

struct VerifyReport {
  std::vector<CheckRow> rows;
  bool ok() const;
  std::vector<long> failing_cells() const;
  std::size_t failures() const;
};

struct VerifyOptions {
  int max_degree = 4;   // koszul: degrees 0..max_degree; stab/reconstruct: 0..max_degree
  int samples = 30;     // random polynomials per cell
  std::uint64_t seed = 1;
  std::vector<FaceSpacePolicy> policies = {FaceSpacePolicy::minimal(), FaceSpacePolicy::full()};
};

// Dimensions against closed-form counts, direct-sum conditioning (< 1e8), trace identities, and the
// Div inverse bound value / ((2/3) h_T) <= 1.
VerifyReport verify_koszul(const PolyMesh& mesh, const VerifyOptions& opt = {});

// Stabilization forms on interpolated random polynomials (relative action <= 1e-11) and finiteness
// of the tangential jump control constant with its kernel containment.
VerifyReport verify_stab(const PolyMesh& mesh, const VerifyOptions& opt = {});

// Defining-relation residuals on random DOF vectors (<= 1e-11) and commutation with the reduction
// on random polynomial fields (<= 1e-10): D under every policy, C under the full policy.
VerifyReport verify_reconstruct(const PolyMesh& mesh, const VerifyOptions& opt = {});

}  // namespace weberlab

#endif
