#include "snnsc/dataset.hpp"

#include "snnsc/rng.hpp"

namespace snnsc {

Dataset make_toy_dataset(const Config& cfg, uint64_t split_tag, int n) {
  const int chw = cfg.image_channels * cfg.image_size * cfg.image_size;
  Dataset d;
  d.num_classes = cfg.classes;
  d.images = Tensor::zeros({n, cfg.image_channels, cfg.image_size, cfg.image_size});
  d.labels.resize(static_cast<size_t>(n));

  // Class centers are shared by every split.
  std::vector<std::vector<double>> centers(static_cast<size_t>(cfg.classes));
  for (int k = 0; k < cfg.classes; ++k) {
    Rng rng(counter_hash(cfg.seed, 0xC1A55, 0, static_cast<uint64_t>(k)));
    centers[static_cast<size_t>(k)].resize(static_cast<size_t>(chw));
    for (double& x : centers[static_cast<size_t>(k)]) x = cfg.center_sigma * rng.normal();
  }

  for (int i = 0; i < n; ++i) {
    const int label = i % cfg.classes;
    d.labels[static_cast<size_t>(i)] = label;
    Rng rng(counter_hash(cfg.seed, 0x5A3B1E, split_tag, static_cast<uint64_t>(i)));
    double* img = d.images.data() + static_cast<int64_t>(i) * chw;
    const double* c = centers[static_cast<size_t>(label)].data();
    for (int j = 0; j < chw; ++j) img[j] = c[j] + cfg.noise_sigma * rng.normal();
  }
  return d;
}

Tensor gather_images(const Dataset& d, const std::vector<int>& order, int begin, int count) {
  Shape s = d.images.shape;
  const int64_t chw = numel(s) / s[0];
  s[0] = count;
  Tensor out = Tensor::zeros(s);
  for (int i = 0; i < count; ++i) {
    const int src = order[static_cast<size_t>(begin + i)];
    for (int64_t j = 0; j < chw; ++j)
      out.v[static_cast<int64_t>(i) * chw + j] = d.images.v[static_cast<int64_t>(src) * chw + j];
  }
  return out;
}

std::vector<int> gather_labels(const Dataset& d, const std::vector<int>& order, int begin,
                               int count) {
  std::vector<int> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<size_t>(i)] = d.labels[static_cast<size_t>(order[static_cast<size_t>(begin + i)])];
  return out;
}

}  // namespace snnsc
