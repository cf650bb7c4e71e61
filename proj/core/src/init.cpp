#include "sliceset/init.hpp"

#include <cmath>
#include <random>

#include "sliceset/model.hpp"

namespace sliceset {

template <typename T>
void he_init(const StateList<T>& state, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const auto& entry : state) {
    Tensor<T> t = entry.tensor;
    auto values = t.mutable_data();
    switch (entry.init) {
      case InitRule::zeros:
        std::fill(values.begin(), values.end(), T(0));
        break;
      case InitRule::ones:
        std::fill(values.begin(), values.end(), T(1));
        break;
      case InitRule::he_normal: {
        std::size_t fan_in = 1;
        for (std::size_t i = 1; i < t.dim(); ++i) fan_in *= t.size(i);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (auto& v : values) v = static_cast<T>(dist(rng));
        break;
      }
    }
  }
}

template <typename T>
void he_init(SliceSetModel<T>& model, std::uint64_t seed) {
  he_init(model.state(), seed);
}

template void he_init<float>(const StateList<float>&, std::uint64_t);
template void he_init<double>(const StateList<double>&, std::uint64_t);
template void he_init<float>(SliceSetModel<float>&, std::uint64_t);
template void he_init<double>(SliceSetModel<double>&, std::uint64_t);

}  // namespace sliceset
