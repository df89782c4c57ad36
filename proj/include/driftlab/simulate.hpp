#pragma once

#include <cstdint>

#include "driftlab/mixture_model.hpp"
#include "driftlab/path.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

// Euler-Maruyama trajectory with n observed steps (dt = 1/n). With
// substeps > 1 the scheme advances at dt/substeps and records every
// substeps-th state. Throws NumericalError if a state becomes non-finite.
Path euler_maruyama(const MixtureModel& model, int label, int n, Rng& rng, int substeps = 1);

// N labeled paths; path j draws its label and trajectory from the stream
// derived from (stream, j), so the result is independent of thread count.
Dataset generate_dataset(const MixtureModel& model, long total, int n, std::uint64_t stream,
                         int substeps = 1, int threads = 1);

// Visits the same paths generate_dataset would produce, one at a time and in
// order, without materializing the dataset. visit(j, path) is called for
// j = 0..total-1.
template <class Visitor>
void for_each_path(const MixtureModel& model, long total, int n, std::uint64_t stream,
                   int substeps, Visitor&& visit) {
  for (long j = 0; j < total; ++j) {
    Rng rng(derive_stream(stream, {static_cast<std::uint64_t>(j)}));
    const int label = sample_label(model.p0(), rng);
    const Path path = euler_maruyama(model, label, n, rng, substeps);
    visit(j, path);
  }
}

}  // namespace driftlab
