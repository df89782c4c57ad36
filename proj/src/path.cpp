#include "driftlab/path.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "driftlab/errors.hpp"

namespace driftlab {

std::vector<double> responses_z(const Path& path) {
  if (path.n < 1 || path.values.size() != static_cast<size_t>(path.n) + 1)
    throw ConfigError("responses_z: malformed path");
  std::vector<double> z(path.n);
  const double scale = static_cast<double>(path.n);
  for (int k = 0; k < path.n; ++k) z[k] = (path.values[k + 1] - path.values[k]) * scale;
  return z;
}

std::vector<double> responses_u(const Path& path) {
  if (path.n < 1 || path.values.size() != static_cast<size_t>(path.n) + 1)
    throw ConfigError("responses_u: malformed path");
  std::vector<double> u(path.n);
  const double scale = static_cast<double>(path.n);
  for (int k = 0; k < path.n; ++k) {
    const double d = path.values[k + 1] - path.values[k];
    u[k] = d * d * scale;
  }
  return u;
}

Dataset::Dataset(std::vector<Path> paths) : paths_(std::move(paths)) {
  if (paths_.empty()) throw ConfigError("dataset: no paths");
  n_ = paths_.front().n;
  for (const Path& p : paths_) {
    if (p.n != n_) throw ConfigError("dataset: paths disagree on n");
    if (p.values.size() != static_cast<size_t>(n_) + 1)
      throw ConfigError("dataset: malformed path values");
    if (p.label) {
      if (*p.label == 0)
        ++count0_;
      else if (*p.label == 1)
        ++count1_;
      else
        throw ConfigError("dataset: label must be 0 or 1");
    }
  }
}

void dump_dataset(std::ostream& out, const Dataset& dataset) {
  out << dataset.n() << ' ' << dataset.size() << '\n';
  char buf[40];
  for (const Path& p : dataset.paths()) {
    out << (p.label ? *p.label : -1);
    for (double v : p.values) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

Dataset load_dataset(std::istream& in) {
  int n = 0;
  long total = 0;
  if (!(in >> n >> total) || n < 1 || total < 1)
    throw ConfigError("load_dataset: malformed header");
  std::vector<Path> paths;
  paths.reserve(total);
  for (long j = 0; j < total; ++j) {
    Path p;
    p.n = n;
    int label = 0;
    if (!(in >> label)) throw ConfigError("load_dataset: truncated file");
    if (label == 0 || label == 1) p.label = label;
    p.values.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
      if (!(in >> p.values[k])) throw ConfigError("load_dataset: truncated path values");
    }
    paths.push_back(std::move(p));
  }
  return Dataset(std::move(paths));
}

}  // namespace driftlab
