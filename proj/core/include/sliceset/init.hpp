#pragma once

#include <cstdint>

#include "sliceset/layers.hpp"

namespace sliceset {

template <typename T>
class SliceSetModel;

/// He initialization: entries marked he_normal draw from
/// Normal(0, sqrt(2 / fan_in)), fan_in = product of shape[1:]; the others are
/// set to zeros or ones per their rule. Entries are visited in state order
/// from one mt19937_64 stream, so equal seeds give bit-identical parameters.
template <typename T>
void he_init(const StateList<T>& state, std::uint64_t seed);

template <typename T>
void he_init(SliceSetModel<T>& model, std::uint64_t seed);

}  // namespace sliceset
