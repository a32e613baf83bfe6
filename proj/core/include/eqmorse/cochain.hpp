#pragma once

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqmorse/critstruct.hpp"
#include "eqmorse/flow.hpp"
#include "eqmorse/rational_matrix.hpp"

namespace eqmorse {

// Inconsistent complex: missing covers, entries in nonexistent degrees,
// failed identities.
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A degree beyond the reliable window of a truncated complex was requested.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invariant forms on one critical orbit: the constant 1 and, on circle
// orbits, d(tau) normalized so that it pairs to 1 with the fundamental field.
struct InvariantFormBasis {
  std::string orbit;
  std::string label;
  int index = 0;
  int orbit_dim = 0;
  std::vector<std::string> names;
  // Contraction of the degree-1 generator with the fundamental field.
  int pairing = 0;

  int top_degree() const { return static_cast<int>(names.size()) - 1; }
};

std::vector<InvariantFormBasis> invariant_form_bases(const Scenario& s, const CriticalAnalysis& a);

struct CartanGenerator {
  std::size_t orbit = 0;  // position in the orbit list
  int form_degree = 0;
  int theta_power = 0;
  int total_degree = 0;
  std::string name;
  // Its theta-raising image lies beyond the truncation and was dropped.
  bool truncation_boundary = false;
};

enum class ComplexVariant { ordinary, cartan };
std::string to_string(ComplexVariant v);

struct CochainComplex {
  ComplexVariant variant = ComplexVariant::ordinary;
  int truncation = 0;
  std::vector<InvariantFormBasis> bases;
  // Sorted by (total degree, orbit, form degree, theta power).
  std::vector<CartanGenerator> generators;
  // d[p]: rows are generators of degree p+1, columns those of degree p.
  std::map<int, RationalMatrix> differential;
  // Highest degree whose cohomology is unaffected by truncation.
  int safe_max_degree = 0;

  int max_degree() const;
  std::vector<std::size_t> in_degree(int p) const;
  // Zero matrix of the right shape when nothing maps out of degree p.
  RationalMatrix d(int p) const;
  std::size_t position_in_degree(std::size_t generator) const;
};

struct AssemblyOptions {
  // Accept unstable orbits; entries that would need their covers must then
  // vanish for degree reasons.
  bool allow_unstable = false;
};

// Covers are looked up by (source id, target id); absent pairs with a
// possible entry raise AssemblyError.
CochainComplex assemble_ordinary(const Scenario& s, const CriticalAnalysis& a,
                                 const std::vector<ModuliCover>& covers,
                                 const AssemblyOptions& opts = {});
CochainComplex assemble_cartan(const Scenario& s, const CriticalAnalysis& a,
                               const std::vector<ModuliCover>& covers, int truncation,
                               const AssemblyOptions& opts = {});

// Pairs (source, target) whose covers the assembly reads.
std::vector<std::pair<std::string, std::string>> required_covers(const Scenario& s,
                                                                 const CriticalAnalysis& a);

struct CohomologyOptions {
  // -1: up to the safe window (Cartan) or the top degree (ordinary).
  int max_degree = -1;
  bool acknowledge_truncation = false;
};

struct CohomologyReport {
  std::vector<int> ranks;  // indexed by degree
  // Kernel vectors independent modulo the image, in the basis in_degree(p).
  std::map<int, std::vector<std::vector<Rational>>> representatives;
  std::vector<std::string> module_notes;
};

CohomologyReport cohomology(const CochainComplex& c, const CohomologyOptions& opts = {});

struct ThetaAction {
  // shift[p]: degree p to degree p + 2, multiplication by theta.
  std::map<int, RationalMatrix> shift;
  // Commutation with the differential was checked in degrees below this.
  int checked_below = 0;
};

// Throws AssemblyError if the shift fails to commute with the differential
// inside the safe window.
ThetaAction theta_module_action(const CochainComplex& c);

// "s00 + rbar00" style rendering of a vector in the basis in_degree(p).
std::string format_combination(const CochainComplex& c, int p, const std::vector<Rational>& v);

// Generators, entries as "num/den" and the reliable window. max_theta >= 0
// lists only generators and entries with theta power up to max_theta.
void write_complex(std::ostream& out, const CochainComplex& c, int max_theta = -1);

// Matrix product d[p+1] * d[p] vanishes for every p.
bool squares_to_zero(const CochainComplex& c);

}  // namespace eqmorse
