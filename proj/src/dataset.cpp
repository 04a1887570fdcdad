#include "belong/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "belong/error.hpp"
#include "json.hpp"

namespace belong {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::gaussian_blobs: return "gaussian-blobs";
        case DatasetKind::striped_patterns: return "striped-patterns";
        case DatasetKind::mixed: return "mixed";
    }
    return "?";
}

DatasetKind parse_dataset_kind(const std::string& s) {
    if (s == "gaussian-blobs" || s == "blobs") return DatasetKind::gaussian_blobs;
    if (s == "striped-patterns" || s == "stripes") return DatasetKind::striped_patterns;
    if (s == "mixed") return DatasetKind::mixed;
    throw Error("unknown dataset kind '" + s + "' (expected gaussian-blobs, striped-patterns or mixed)");
}

namespace {

using Pixels = std::vector<double>;

void blob(const ImageShape& s, std::size_t cls, std::size_t classes, Rng& rng, Pixels& img) {
    const double cx0 = (static_cast<double>(s.width) - 1.0) / 2.0;
    const double cy0 = (static_cast<double>(s.height) - 1.0) / 2.0;
    const double radius = 0.28 * static_cast<double>(std::min(s.width, s.height));
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(cls) / static_cast<double>(classes);
    const double cx = cx0 + radius * std::cos(angle) + 0.6 * rng.normal();
    const double cy = cy0 + radius * std::sin(angle) + 0.6 * rng.normal();
    const double width = rng.uniform(1.0, 2.0);
    const double amplitude = rng.uniform(0.5, 0.8);
    const double background = rng.uniform(0.05, 0.25);
    const std::size_t plane = s.height * s.width;
    for (std::size_t c = 0; c < s.channels; ++c) {
        const double tint = s.channels == 1 ? 1.0 : rng.uniform(0.6, 1.0);
        for (std::size_t y = 0; y < s.height; ++y) {
            for (std::size_t x = 0; x < s.width; ++x) {
                const double dx = static_cast<double>(x) - cx;
                const double dy = static_cast<double>(y) - cy;
                const double bump = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
                img[c * plane + y * s.width + x] = background + tint * amplitude * bump;
            }
        }
    }
}

void stripes(const ImageShape& s, std::size_t cls, std::size_t classes, Rng& rng, Pixels& img) {
    const double theta = std::numbers::pi * static_cast<double>(cls) / static_cast<double>(classes) + 0.1 * rng.normal();
    const double freq = rng.uniform(0.6, 1.2);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double contrast = rng.uniform(0.25, 0.45);
    const double mean = rng.uniform(0.4, 0.6);
    const std::size_t plane = s.height * s.width;
    for (std::size_t c = 0; c < s.channels; ++c) {
        const double tint = s.channels == 1 ? 1.0 : rng.uniform(0.7, 1.0);
        for (std::size_t y = 0; y < s.height; ++y) {
            for (std::size_t x = 0; x < s.width; ++x) {
                const double u = static_cast<double>(x) * std::cos(theta) + static_cast<double>(y) * std::sin(theta);
                img[c * plane + y * s.width + x] = mean + tint * contrast * std::sin(freq * u + phase);
            }
        }
    }
}

}  // namespace

Dataset synth_dataset(const DatasetSpec& spec) {
    if (spec.count == 0) throw Error("synth_dataset: count must be at least 1");
    if (spec.classes == 0) throw Error("synth_dataset: classes must be at least 1");
    if (spec.image_shape.pixels() == 0 || spec.image_shape.height < 2 || spec.image_shape.width < 2) {
        throw ShapeError("synth_dataset: invalid image shape " + to_string(spec.image_shape));
    }
    if (spec.noise < 0.0) throw Error("synth_dataset: noise must be non-negative");

    Dataset ds;
    ds.spec = spec;
    ds.id = spec.id.empty() ? to_string(spec.kind) + "-s" + std::to_string(spec.seed) : spec.id;
    ds.spec.id = ds.id;
    Rng rng(spec.seed);
    const auto& s = spec.image_shape;
    Pixels img(s.pixels());
    for (std::size_t i = 0; i < spec.count; ++i) {
        const std::size_t cls = rng.index(spec.classes);
        DatasetKind kind = spec.kind;
        if (kind == DatasetKind::mixed) {
            kind = rng.uniform() < 0.5 ? DatasetKind::gaussian_blobs : DatasetKind::striped_patterns;
        }
        if (kind == DatasetKind::gaussian_blobs) {
            blob(s, cls, spec.classes, rng, img);
        } else {
            stripes(s, cls, spec.classes, rng, img);
        }
        for (auto& v : img) v = std::clamp(v + spec.noise * rng.normal(), 0.0, 1.0);
        ds.items.push_back({Tensor::from_doubles(s.shape(), img), cls});
    }
    return ds;
}

Dataset overlap_dataset(const Dataset& base, double fraction, const DatasetSpec& fresh_spec) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("overlap fraction must lie in [0, 1]");
    const std::size_t shared = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(fresh_spec.count)));
    if (shared > base.items.size()) throw Error("overlap needs more images than the base dataset holds");
    if (fresh_spec.image_shape != base.spec.image_shape) throw ShapeError("overlap: image shapes differ");

    Rng rng = Rng::derive(fresh_spec.seed, 0x0f0f);
    std::vector<std::size_t> order(base.items.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < shared; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);

    Dataset ds;
    if (shared < fresh_spec.count) {
        DatasetSpec fresh = fresh_spec;
        fresh.count = fresh_spec.count - shared;
        ds = synth_dataset(fresh);
    }
    ds.spec = fresh_spec;
    ds.id = fresh_spec.id.empty() ? base.id + "-overlap" + std::to_string(std::lround(fraction * 100)) : fresh_spec.id;
    ds.spec.id = ds.id;
    ds.overlap_source = base.id;
    ds.overlap_fraction = fraction;
    std::vector<LabeledImage> items;
    for (std::size_t i = 0; i < shared; ++i) items.push_back(base.items[order[i]]);
    items.insert(items.end(), ds.items.begin(), ds.items.end());
    ds.items = std::move(items);
    return ds;
}

std::size_t shared_images(const Dataset& a, const Dataset& b) {
    auto key = [](const Tensor& t) {
        std::string bytes(t.size() * sizeof(float), '\0');
        std::memcpy(bytes.data(), t.data().data(), bytes.size());
        return bytes;
    };
    std::set<std::string> in_b;
    for (const auto& item : b.items) in_b.insert(key(item.image));
    std::size_t n = 0;
    for (const auto& item : a.items) n += in_b.count(key(item.image));
    return n;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    const auto& s = ds.spec.image_shape;
    json manifest = {{"id", ds.id},
                     {"kind", to_string(ds.spec.kind)},
                     {"image_shape", {s.channels, s.height, s.width}},
                     {"classes", ds.spec.classes},
                     {"count", ds.items.size()},
                     {"seed", ds.spec.seed},
                     {"noise", ds.spec.noise}};
    json labels = json::array();
    for (const auto& item : ds.items) labels.push_back(item.label ? json(*item.label) : json(nullptr));
    manifest["labels"] = labels;
    if (ds.overlap_source) {
        manifest["overlap"] = {{"source", *ds.overlap_source}, {"fraction", ds.overlap_fraction}};
    }
    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw Error("cannot write dataset manifest in " + dir);
    mf << manifest.dump(2) << '\n';

    std::vector<float> all;
    all.reserve(ds.items.size() * s.pixels());
    for (const auto& item : ds.items) all.insert(all.end(), item.image.data().begin(), item.image.data().end());
    save_tensor(Tensor({ds.items.size(), s.channels, s.height, s.width}, std::move(all)),
                (fs::path(dir) / "images.bin").string());
}

Dataset load_dataset(const std::string& dir) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw MissingArtifactError(manifest_path.string());
    const Tensor images = load_tensor((fs::path(dir) / "images.bin").string());
    try {
        const json manifest = json::parse(mf);
        Dataset ds;
        ds.id = manifest.at("id").get<std::string>();
        ds.spec.id = ds.id;
        ds.spec.kind = parse_dataset_kind(manifest.at("kind").get<std::string>());
        const auto shape = manifest.at("image_shape").get<std::vector<std::size_t>>();
        if (shape.size() != 3) throw FormatError("image_shape must have 3 entries");
        ds.spec.image_shape = {shape[0], shape[1], shape[2]};
        ds.spec.classes = manifest.at("classes").get<std::size_t>();
        ds.spec.count = manifest.at("count").get<std::size_t>();
        ds.spec.seed = manifest.at("seed").get<std::uint64_t>();
        ds.spec.noise = manifest.value("noise", 0.0);
        if (manifest.contains("overlap")) {
            ds.overlap_source = manifest["overlap"].at("source").get<std::string>();
            ds.overlap_fraction = manifest["overlap"].at("fraction").get<double>();
        }
        const Shape expected{ds.spec.count, shape[0], shape[1], shape[2]};
        if (images.shape() != expected) {
            throw FormatError("images.bin has shape " + shape_to_string(images.shape()) + ", manifest implies " +
                              shape_to_string(expected));
        }
        const auto& labels = manifest.at("labels");
        const std::size_t p = ds.spec.image_shape.pixels();
        for (std::size_t i = 0; i < ds.spec.count; ++i) {
            std::vector<float> px(images.data().begin() + static_cast<std::ptrdiff_t>(i * p),
                                  images.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * p));
            std::optional<std::size_t> label;
            if (!labels.at(i).is_null()) label = labels[i].get<std::size_t>();
            ds.items.push_back({Tensor(ds.spec.image_shape.shape(), std::move(px)), label});
        }
        return ds;
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
}

}  // namespace belong
