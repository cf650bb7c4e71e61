#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sliceset/tensor.hpp"
#include "sliceset/volume.hpp"

namespace sliceset {

/// The K planes of a volume along one axis, as a [K, C, H, W] block.
/// Plane orientation: sagittal -> (coronal, axial), coronal -> (sagittal,
/// axial), axial -> (sagittal, coronal). Channels are copies of the single
/// intensity channel.
struct SliceStack {
  Axis axis = Axis::sagittal;
  std::size_t count = 0;
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  Extents source_extents{0, 0, 0};
  std::vector<float> data;

  std::size_t slice_size() const { return channels * height * width; }
  std::span<const float> slice(std::size_t k) const { return {data.data() + k * slice_size(), slice_size()}; }
};

// (K, H, W) of the stack for a given volume geometry.
struct SliceGeometry {
  std::size_t count;
  std::size_t height;
  std::size_t width;
};
SliceGeometry slice_geometry(const Extents& extents, Axis axis);

SliceStack slice_volume(const Volume& volume, Axis axis, std::size_t channels = 1);

// Inverse of slice_volume (channel 0). Subject id and target are not kept.
Volume restack(const SliceStack& stack);

// Reorders the planes of a volume along `axis`: plane k of the result is
// plane order[k] of the input.
Volume permute_along_axis(const Volume& volume, Axis axis, std::span<const std::size_t> order);

template <typename T>
Tensor<T> to_tensor(const SliceStack& stack);

// Concatenates the stacks of several volumes into [B * K, C, H, W].
template <typename T>
Tensor<T> batch_tensor(std::span<const SliceStack* const> stacks);

}  // namespace sliceset
