#pragma once

#include <vector>

#include "snnsc/config.hpp"
#include "snnsc/tensor.hpp"

namespace snnsc {

struct Dataset {
  Tensor images;            // (N, C, H, W)
  std::vector<int> labels;  // class index per sample
  int num_classes = 0;

  int size() const { return static_cast<int>(labels.size()); }
};

// Gaussian-cluster images: per-class center drawn once from the seed, each
// sample = center + isotropic noise. Labels cycle 0..K-1 so splits are
// balanced. Sample i is a pure function of (seed, split_tag, i).
Dataset make_toy_dataset(const Config& cfg, uint64_t split_tag, int n);

inline Dataset make_train_split(const Config& cfg) { return make_toy_dataset(cfg, 1, cfg.train_samples); }
inline Dataset make_test_split(const Config& cfg) { return make_toy_dataset(cfg, 2, cfg.test_samples); }

// Rows of `images` for the given index range of `order`.
Tensor gather_images(const Dataset& d, const std::vector<int>& order, int begin, int count);
std::vector<int> gather_labels(const Dataset& d, const std::vector<int>& order, int begin, int count);

}  // namespace snnsc
