#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sliceset/archive.hpp"
#include "sliceset/model.hpp"

namespace sliceset {

// Every state entry (parameters and buffers) rounded to float32.
template <typename T>
WeightArchive export_state(const StateList<T>& state);

// Full model export; metadata carries the model configuration as JSON under
// "model_config".
WeightArchive export_model(const Model& model);

/// Loads an archive that covers the state exactly. Missing, extra or
/// mis-shaped entries raise ArchiveMismatch naming the entry; nothing is
/// written unless every check passes.
void import_strict(const StateList<float>& state, const WeightArchive& archive);
void import_strict(Model& model, const WeightArchive& archive);

// Builds a model from an archive written by export_model.
Model model_from_archive(const WeightArchive& archive);

// Strictly loads `prefix`-named entries into a standalone encoder, ignoring
// anything else in the archive.
void load_encoder(Encoder<float>& encoder, const WeightArchive& archive, std::string_view prefix = "encoder.");

// How a pretrained stem convolution with more input channels than the model
// is brought in.
enum class StemAdapter {
  replicate,     // sum the kernel over input channels (equal to replicating a 1-channel input)
  reinitialize,  // leave the model's stem as initialized
};

StemAdapter parse_stem_adapter(std::string_view text, std::string_view field = "stem_adapter");

struct ImportOptions {
  StemAdapter stem_adapter = StemAdapter::replicate;
  double min_match_fraction = 0.5;
};

struct SkippedEntry {
  std::string name;  // archive name
  std::string reason;
};

/// Outcome of a partial encoder import. `matched` and `reinitialized` are
/// model state names and together cover the whole model state; `skipped`
/// lists archive entries that were not used; `adapted` annotates matched
/// entries that were transformed on the way in.
struct LoadReport {
  std::vector<std::string> matched;
  std::vector<SkippedEntry> skipped;
  std::vector<std::string> reinitialized;
  std::vector<std::string> adapted;
  std::size_t encoder_entries = 0;

  std::string to_text() const;
};

/// Loads the encoder part of an archive into a slice-set model by name.
/// Archive names may carry the "encoder." prefix or not. Head entries and
/// anything the encoder lacks are skipped; the model's positional table,
/// aggregator and head keep their current values. Raises ArchiveMismatch
/// when fewer than min_match_fraction of the encoder entries are matched.
LoadReport import_encoder(Model& model, const WeightArchive& archive, const ImportOptions& options = {});

}  // namespace sliceset
