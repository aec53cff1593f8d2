#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grid.hpp"

namespace ucprop {

// Axis-aligned cube given by center and side length.
struct Cube {
  Point center{0, 0, 0};
  double side = 0;
  int dim = 0;
};

// Dyadic sub-cube of a root cube, identified by its path of child indices.
// Child index bits select the half along each axis (bit d set = upper half).
class DyadicCube {
 public:
  DyadicCube() = default;
  DyadicCube(Cube root, std::vector<std::uint8_t> path);

  const Cube& root() const { return root_; }
  const std::vector<std::uint8_t>& path() const { return path_; }
  int rank() const { return static_cast<int>(path_.size()); }
  int dim() const { return root_.dim; }

  Cube geometry() const;
  double side() const;
  double measure() const;

  DyadicCube parent() const;  // parent of the root is the root itself
  DyadicCube child(std::uint8_t l) const;
  bool is_root() const { return path_.empty(); }

  // this cube is an ancestor of (or equal to) other
  bool contains(const DyadicCube& other) const;
  bool operator==(const DyadicCube& o) const { return path_ == o.path_; }
  bool operator<(const DyadicCube& o) const { return path_ < o.path_; }

  std::string path_string() const;

 private:
  Cube root_;
  std::vector<std::uint8_t> path_;
};

// Finite set of dyadic cubes sharing one root. Canonical form is an
// antichain: no member contains another.
class CubeFamily {
 public:
  CubeFamily() = default;
  explicit CubeFamily(Cube root) : root_(root) {}
  CubeFamily(Cube root, std::vector<DyadicCube> cubes);

  const Cube& root() const { return root_; }
  const std::vector<DyadicCube>& cubes() const { return cubes_; }
  bool empty() const { return cubes_.empty(); }
  std::size_t size() const { return cubes_.size(); }
  int max_rank() const;
  bool is_antichain() const;
  bool is_root_only() const;

  // Exact measure of the union, in units of the root measure: the returned
  // integer is |E| * 2^{dim*scale_rank} / |Q0|.
  std::uint64_t union_measure_scaled(int scale_rank) const;
  double union_measure_fraction() const;

  // Drop cubes contained in another member; union unchanged.
  CubeFamily reduced() const;

  void add(DyadicCube c) { cubes_.push_back(std::move(c)); }

 private:
  Cube root_;
  std::vector<DyadicCube> cubes_;
};

// |cube n set| / |cube| by node counting (half-open cube box).
double filled_ratio(const DyadicCube& cube, const RegionMask& set);

// All maximal beta-filled dyadic cubes of the root w.r.t. a node set
// (node-counting ratios), searched to max_rank.
CubeFamily maximal_filled_cubes(const DyadicCube& root, const RegionMask& set,
                                double beta, int max_rank);

enum class StepCase { I, II };

struct NadirashviliResult {
  CubeFamily family1;    // dyadic parents of the maximal covered cubes
  CubeFamily covered;    // the maximal cubes R with |R n E| > beta |R|
  StepCase step_case = StepCase::I;
  double e_measure = 0;   // |E| / |Q0|
  double e1_measure = 0;  // |E1| / |Q0|
};

// One step of the covering lemma, exact dyadic arithmetic (no grid).
NadirashviliResult nadirashvili_step(const CubeFamily& family, double beta);

struct IterationTrace {
  int steps = 0;  // number of step applications until case II fires
  std::vector<CubeFamily> trace;  // E_1 = input, ..., E_N = {Q0}
  std::vector<double> measures;   // |E_j| / |Q0|
};

IterationTrace iterate_families(const CubeFamily& family1, double beta,
                                int step_budget = -1);

// Brute-force oracle: enumerate every dyadic cube up to max_rank, test the
// filled condition with exact arithmetic, keep maximal cubes, take parents.
// Independent of the recursive implementation above.
NadirashviliResult nadirashvili_step_bruteforce(const CubeFamily& family,
                                                double beta, int max_rank);

// All maximal dyadic cubes fully inside a mask with side >= 4h (grid-to-cube
// bridge; the cube lattice is anchored at the root cube).
CubeFamily mask_to_cubes(const Cube& root, const RegionMask& mask);

// Line-oriented text serialization: one "rank path" tuple per line.
void save_family(const CubeFamily& family, const std::string& path);
CubeFamily load_family(const std::string& path);

}  // namespace ucprop
