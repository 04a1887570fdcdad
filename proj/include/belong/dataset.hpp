#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "belong/model.hpp"

namespace belong {

enum class DatasetKind { gaussian_blobs, striped_patterns, mixed };

std::string to_string(DatasetKind k);
DatasetKind parse_dataset_kind(const std::string& s);

struct DatasetSpec {
    std::string id;  // defaults to "<kind>-s<seed>"
    DatasetKind kind = DatasetKind::gaussian_blobs;
    ImageShape image_shape;
    std::size_t classes = 4;
    std::size_t count = 256;
    std::uint64_t seed = 0;
    double noise = 0.04;  // per-pixel Gaussian noise std
};

struct Dataset {
    std::string id;
    DatasetSpec spec;
    std::vector<LabeledImage> items;
    std::optional<std::string> overlap_source;  // id of the dataset this one shares images with
    double overlap_fraction = 0.0;
};

/// Deterministic synthetic images with values in [0, 1].
///
/// Blobs: one Gaussian bump on a dim background, centred near a class anchor.
/// Stripes: a sinusoidal grating whose orientation depends on the class.
/// Mixed: each image is a blob or a grating with equal probability.
/// Every image gets independent pixel noise, so the data does not lie on a
/// low-dimensional manifold.
Dataset synth_dataset(const DatasetSpec& spec);

/// round(fraction * count) images drawn from base plus fresh images from fresh_spec.
Dataset overlap_dataset(const Dataset& base, double fraction, const DatasetSpec& fresh_spec);

/// Number of images of a that occur bit-identically in b.
std::size_t shared_images(const Dataset& a, const Dataset& b);

// Directory layout: manifest.json + images.bin (one RNTZ tensor [count, C, H, W]).
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace belong
