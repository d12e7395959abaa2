#ifndef SCOREQ_EVAL_DIAGNOSTICS_HPP_
#define SCOREQ_EVAL_DIAGNOSTICS_HPP_

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoreq/data/manifest.hpp"
#include "scoreq/data/sample.hpp"
#include "scoreq/eval/embedding.hpp"
#include "scoreq/eval/stats.hpp"
#include "scoreq/model/model.hpp"

namespace scoreq {

struct DiagnosticsReport {
  Layer layer = Layer::projection;
  Matrix pca_coords;
  double explained_variance[2] = {0.0, 0.0};
  std::vector<int> cluster_assignments;
  std::size_t clusters = 0;
  double nmi = 0.0;
  /// Pearson between NMR distance and MOS.
  double pc_dist_mos = 0.0;
  std::vector<double> nmr_distance;
};

/// Embeddings at `layer` projected to 2-D, clustered with k-means (k = number
/// of degradation families unless given) and scored by NMI against the family
/// tags, plus the Pearson correlation between NMR distance and MOS.
inline DiagnosticsReport diagnose_embeddings(const Model& model, std::span<const LabeledSample> samples,
                                             std::span<const LabeledSample> refs, Layer layer, std::uint64_t seed,
                                             std::size_t k = 0) {
  const auto families = families_of(samples);
  if (k == 0) k = families.size();
  if (samples.size() < k) throw std::invalid_argument("diagnose_embeddings: fewer samples than clusters");

  const auto ptrs = feature_ptrs(samples);
  const Matrix emb = model.embed_many(ptrs, layer);
  DiagnosticsReport rep;
  rep.layer = layer;
  const PcaResult pca = pca2(emb);
  rep.pca_coords = pca.coords;
  rep.explained_variance[0] = pca.explained_variance[0];
  rep.explained_variance[1] = pca.explained_variance[1];

  KMeansOptions opt;
  opt.k = k;
  opt.seed = seed;
  rep.cluster_assignments = kmeans(emb, opt).assignments;
  rep.clusters = k;
  std::vector<std::string> tags;
  for (const auto& s : samples) tags.push_back(s.degradation);
  rep.nmi = nmi(rep.cluster_assignments, tags);

  const auto ref_ptrs = feature_ptrs(refs);
  const ReferenceSet rs = make_reference_set(model, ref_ptrs, layer);
  rep.nmr_distance.reserve(samples.size());
  for (std::size_t i = 0; i < emb.rows(); ++i) rep.nmr_distance.push_back(nmr_distance(emb.row(i), rs));
  rep.pc_dist_mos = pearson(rep.nmr_distance, mos_labels(samples));
  return rep;
}

/// Plot-ready rows: id,x,y,mos,degradation,cluster.
inline void write_embeddings_csv(std::ostream& os, std::span<const LabeledSample> samples,
                                 const DiagnosticsReport& rep) {
  os << "id,x,y,mos,degradation,cluster\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    os << samples[i].id << ',' << format_double(rep.pca_coords(i, 0)) << ',' << format_double(rep.pca_coords(i, 1))
       << ',' << format_double(samples[i].mos) << ',' << samples[i].degradation << ',' << rep.cluster_assignments[i]
       << '\n';
  }
}

}  // namespace scoreq

#endif  // SCOREQ_EVAL_DIAGNOSTICS_HPP_
