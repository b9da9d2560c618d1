#pragma once

#include <string>
#include <vector>

#include "actclust/tensor.hpp"

namespace actclust {

// Binary PGM (P5, maxval 255). `pixels` is side*side floats in [0, 1].
void write_pgm(const std::string& path, const float* pixels, int side);

// One PGM per index under outdir, named <prefix><index>.pgm. The square image
// side is inferred from the per-sample pixel count. Returns the paths written.
std::vector<std::string> emit_thumbnails(const Tensor& images, const std::vector<int>& indices,
                                         const std::string& outdir, const std::string& prefix = "train_");

// Builds <results_dir>/report.html from the artifacts a pipeline run leaves
// behind: metrics table from eval.json plus a section per similarity result
// file (similar_*.json) and per concept file (concepts_*.json). Thumbnails
// are rendered when the dataset samples are square images.
void emit_html_report(const std::string& results_dir);

}  // namespace actclust
