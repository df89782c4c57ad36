#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

namespace driftlab {

// Discretely observed trajectory: values X_0..X_n at times k/n.
struct Path {
  int n = 0;
  std::vector<double> values;  // length n + 1
  std::optional<int> label;

  double dt() const { return 1.0 / n; }
};

// Z_k = (X_{k+1} - X_k) / dt, k = 0..n-1 (drift regression response).
std::vector<double> responses_z(const Path& path);

// U_k = (X_{k+1} - X_k)^2 / dt, k = 0..n-1 (squared-diffusion response).
std::vector<double> responses_u(const Path& path);

// Labeled collection of paths sharing the same n.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Path> paths);

  const std::vector<Path>& paths() const { return paths_; }
  int n() const { return n_; }
  long size() const { return static_cast<long>(paths_.size()); }
  long count(int label) const { return label == 0 ? count0_ : count1_; }

 private:
  std::vector<Path> paths_;
  int n_ = 0;
  long count0_ = 0;
  long count1_ = 0;
};

// Plain-text dump: header "n N", then one line per path "label v0 ... vn".
// Values are written with 17 significant digits so the round trip is exact.
void dump_dataset(std::ostream& out, const Dataset& dataset);
Dataset load_dataset(std::istream& in);

}  // namespace driftlab
