#include "sliceset/slicing.hpp"

#include <algorithm>

#include "sliceset/errors.hpp"

namespace sliceset {

SliceGeometry slice_geometry(const Extents& e, Axis axis) {
  switch (axis) {
    case Axis::sagittal: return {e[0], e[1], e[2]};
    case Axis::coronal: return {e[1], e[0], e[2]};
    case Axis::axial: return {e[2], e[0], e[1]};
  }
  throw ConfigError("axis: invalid value");
}

namespace {

// Volume voxel index of pixel (h, w) on plane k.
std::size_t voxel_of(const Volume& v, Axis axis, std::size_t k, std::size_t h, std::size_t w) {
  switch (axis) {
    case Axis::sagittal: return v.index(k, h, w);
    case Axis::coronal: return v.index(h, k, w);
    case Axis::axial: return v.index(h, w, k);
  }
  return 0;
}

}  // namespace

SliceStack slice_volume(const Volume& volume, Axis axis, std::size_t channels) {
  volume.validate();
  if (channels == 0) throw ConfigError("input_channels: must be positive");
  const auto geo = slice_geometry(volume.extents, axis);
  SliceStack stack;
  stack.axis = axis;
  stack.count = geo.count;
  stack.channels = channels;
  stack.height = geo.height;
  stack.width = geo.width;
  stack.source_extents = volume.extents;
  stack.data.resize(geo.count * channels * geo.height * geo.width);
  const std::size_t plane = geo.height * geo.width;
  for (std::size_t k = 0; k < geo.count; ++k) {
    float* dst = stack.data.data() + k * channels * plane;
    for (std::size_t h = 0; h < geo.height; ++h)
      for (std::size_t w = 0; w < geo.width; ++w) dst[h * geo.width + w] = volume.voxels[voxel_of(volume, axis, k, h, w)];
    for (std::size_t c = 1; c < channels; ++c) std::copy_n(dst, plane, dst + c * plane);
  }
  return stack;
}

Volume restack(const SliceStack& stack) {
  Volume v = Volume::zeros(stack.source_extents);
  const std::size_t plane = stack.height * stack.width;
  for (std::size_t k = 0; k < stack.count; ++k) {
    const float* src = stack.data.data() + k * stack.channels * plane;
    for (std::size_t h = 0; h < stack.height; ++h)
      for (std::size_t w = 0; w < stack.width; ++w) v.voxels[voxel_of(v, stack.axis, k, h, w)] = src[h * stack.width + w];
  }
  return v;
}

Volume permute_along_axis(const Volume& volume, Axis axis, std::span<const std::size_t> order) {
  auto stack = slice_volume(volume, axis, 1);
  if (order.size() != stack.count) throw ShapeError("permutation length does not match slice count");
  SliceStack permuted = stack;
  for (std::size_t k = 0; k < stack.count; ++k) {
    if (order[k] >= stack.count) throw ShapeError("permutation index out of range");
    auto src = stack.slice(order[k]);
    std::copy(src.begin(), src.end(), permuted.data.begin() + static_cast<std::ptrdiff_t>(k * stack.slice_size()));
  }
  Volume out = restack(permuted);
  out.subject_id = volume.subject_id;
  out.target = volume.target;
  return out;
}

template <typename T>
Tensor<T> to_tensor(const SliceStack& stack) {
  return Tensor<T>(Shape{stack.count, stack.channels, stack.height, stack.width},
                   std::vector<T>(stack.data.begin(), stack.data.end()));
}

template <typename T>
Tensor<T> batch_tensor(std::span<const SliceStack* const> stacks) {
  if (stacks.empty()) throw ShapeError("batch_tensor: no stacks");
  const auto& first = *stacks.front();
  std::vector<T> data;
  data.reserve(stacks.size() * first.data.size());
  for (const auto* s : stacks) {
    if (s->count != first.count || s->channels != first.channels || s->height != first.height ||
        s->width != first.width) {
      throw ShapeError("batch_tensor: stacks in one batch must share geometry");
    }
    data.insert(data.end(), s->data.begin(), s->data.end());
  }
  return Tensor<T>(Shape{stacks.size() * first.count, first.channels, first.height, first.width}, std::move(data));
}

template Tensor<float> to_tensor<float>(const SliceStack&);
template Tensor<double> to_tensor<double>(const SliceStack&);
template Tensor<float> batch_tensor<float>(std::span<const SliceStack* const>);
template Tensor<double> batch_tensor<double>(std::span<const SliceStack* const>);

}  // namespace sliceset
