#include "gvd/dataset.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>

static_assert(std::endian::native == std::endian::little,
              "dataset serialization assumes a little-endian host");

namespace gvd {

namespace {

constexpr uint32_t k_magic_data = 0x53445647u;  // "GVDS" as bytes
constexpr uint32_t k_magic_soft = 0x4c424c53u;  // "SLBL" as bytes
constexpr uint32_t k_version = 1;

struct FileCloser {
    void operator()(std::FILE * f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_bytes(std::FILE * f, const void * data, size_t n, const std::string & path) {
    if (std::fwrite(data, 1, n, f) != n) {
        throw error(error_kind::io, "short write", path);
    }
}

template <typename T>
void write_pod(std::FILE * f, T value, const std::string & path) {
    write_bytes(f, &value, sizeof(T), path);
}

void read_bytes(std::FILE * f, void * data, size_t n, const std::string & path) {
    if (std::fread(data, 1, n, f) != n) {
        throw error(error_kind::format, "unexpected end of file",
                    path + " at offset " + std::to_string(std::ftell(f)));
    }
}

template <typename T>
T read_pod(std::FILE * f, const std::string & path) {
    T value;
    read_bytes(f, &value, sizeof(T), path);
    return value;
}

}  // namespace

void VideoDataset::append(uint32_t class_id, Mat latent) {
    if (latent.rows() != frames || latent.cols() != dim) {
        throw error(error_kind::dimension, "record shape does not match dataset",
                    "got " + std::to_string(latent.rows()) + "x" + std::to_string(latent.cols()) +
                        ", want " + std::to_string(frames) + "x" + std::to_string(dim));
    }
    if (class_id >= uint32_t(class_count)) {
        throw error(error_kind::dimension, "class id out of range",
                    "class " + std::to_string(class_id) + " of " + std::to_string(class_count));
    }
    if (!all_finite(latent)) {
        throw error(error_kind::numeric, "record contains non-finite values",
                    "class " + std::to_string(class_id) + " record " + std::to_string(records.size()));
    }
    quantize_storage(latent);
    records.push_back({class_id, std::move(latent)});
}

std::vector<size_t> VideoDataset::indices_of_class(uint32_t class_id) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].class_id == class_id) out.push_back(i);
    }
    return out;
}

size_t VideoDataset::count_of_class(uint32_t class_id) const {
    size_t n = 0;
    for (const auto & r : records) n += r.class_id == class_id;
    return n;
}

void VideoDataset::validate() const {
    if (frames < 1 || dim < 1) throw error(error_kind::dimension, "dataset needs frames >= 1 and dim >= 1");
    if (class_count < 1) throw error(error_kind::dimension, "dataset needs at least one class");
    for (size_t i = 0; i < records.size(); ++i) {
        const auto & r = records[i];
        if (r.latent.rows() != frames || r.latent.cols() != dim) {
            throw error(error_kind::dimension, "record shape does not match dataset", "record " + std::to_string(i));
        }
        if (r.class_id >= uint32_t(class_count)) {
            throw error(error_kind::dimension, "class id out of range", "record " + std::to_string(i));
        }
        if (!all_finite(r.latent)) {
            throw error(error_kind::numeric, "record contains non-finite values", "record " + std::to_string(i));
        }
    }
    if (!soft_labels.empty()) {
        if (soft_labels.size() != records.size()) {
            throw error(error_kind::dimension, "soft label count does not match record count");
        }
        for (size_t i = 0; i < soft_labels.size(); ++i) {
            if (soft_labels[i].size() != class_count) {
                throw error(error_kind::dimension, "soft label row has wrong width", "record " + std::to_string(i));
            }
            if (!all_finite(soft_labels[i])) {
                throw error(error_kind::numeric, "soft label row contains non-finite values",
                            "record " + std::to_string(i));
            }
        }
    }
}

void save_dataset(const VideoDataset & ds, const std::string & path) {
    ds.validate();
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw error(error_kind::io, "cannot open file for writing", path);

    write_pod<uint32_t>(f.get(), k_magic_data, path);
    write_pod<uint32_t>(f.get(), k_version, path);
    write_pod<uint32_t>(f.get(), uint32_t(ds.frames), path);
    write_pod<uint32_t>(f.get(), uint32_t(ds.dim), path);
    write_pod<uint32_t>(f.get(), uint32_t(ds.class_count), path);
    write_pod<uint64_t>(f.get(), uint64_t(ds.records.size()), path);

    std::vector<float> row(size_t(ds.flat_dim()));
    for (const auto & r : ds.records) {
        write_pod<uint32_t>(f.get(), r.class_id, path);
        for (int fr = 0; fr < ds.frames; ++fr)
            for (int d = 0; d < ds.dim; ++d) row[size_t(fr) * ds.dim + d] = float(r.latent(fr, d));
        write_bytes(f.get(), row.data(), row.size() * sizeof(float), path);
    }

    if (ds.has_soft_labels()) {
        write_pod<uint32_t>(f.get(), k_magic_soft, path);
        write_pod<uint32_t>(f.get(), uint32_t(ds.class_count), path);
        std::vector<float> probs(size_t(ds.class_count));
        for (const auto & sl : ds.soft_labels) {
            for (int c = 0; c < ds.class_count; ++c) probs[size_t(c)] = float(sl(c));
            write_bytes(f.get(), probs.data(), probs.size() * sizeof(float), path);
        }
    }

    if (std::fflush(f.get()) != 0) throw error(error_kind::io, "flush failed", path);
}

VideoDataset load_dataset(const std::string & path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw error(error_kind::io, "cannot open file for reading", path);

    if (read_pod<uint32_t>(f.get(), path) != k_magic_data) {
        throw error(error_kind::format, "bad magic, not a video dataset file", path);
    }
    uint32_t version = read_pod<uint32_t>(f.get(), path);
    if (version != k_version) {
        throw error(error_kind::format, "unsupported format version " + std::to_string(version), path);
    }

    VideoDataset ds;
    ds.frames = int(read_pod<uint32_t>(f.get(), path));
    ds.dim = int(read_pod<uint32_t>(f.get(), path));
    ds.class_count = int(read_pod<uint32_t>(f.get(), path));
    uint64_t count = read_pod<uint64_t>(f.get(), path);
    if (ds.frames < 1 || ds.dim < 1 || ds.class_count < 1) {
        throw error(error_kind::format, "header has non-positive dimensions", path);
    }

    ds.records.reserve(count);
    std::vector<float> row(size_t(ds.flat_dim()));
    for (uint64_t i = 0; i < count; ++i) {
        uint32_t class_id = read_pod<uint32_t>(f.get(), path);
        read_bytes(f.get(), row.data(), row.size() * sizeof(float), path);
        Mat latent(ds.frames, ds.dim);
        for (int fr = 0; fr < ds.frames; ++fr)
            for (int d = 0; d < ds.dim; ++d) latent(fr, d) = double(row[size_t(fr) * ds.dim + d]);
        if (class_id >= uint32_t(ds.class_count)) {
            throw error(error_kind::format, "record class id out of range",
                        path + " record " + std::to_string(i));
        }
        ds.records.push_back({class_id, std::move(latent)});
    }

    uint32_t soft_magic = 0;
    size_t got = std::fread(&soft_magic, 1, sizeof(soft_magic), f.get());
    if (got != 0) {
        if (got != sizeof(soft_magic) || soft_magic != k_magic_soft) {
            throw error(error_kind::format, "trailing bytes are not a soft-label block", path);
        }
        uint32_t soft_classes = read_pod<uint32_t>(f.get(), path);
        if (soft_classes != uint32_t(ds.class_count)) {
            throw error(error_kind::format, "soft-label class count mismatch", path);
        }
        std::vector<float> probs(size_t(ds.class_count));
        ds.soft_labels.reserve(count);
        for (uint64_t i = 0; i < count; ++i) {
            read_bytes(f.get(), probs.data(), probs.size() * sizeof(float), path);
            Vec sl(ds.class_count);
            for (int c = 0; c < ds.class_count; ++c) sl(c) = double(probs[size_t(c)]);
            ds.soft_labels.push_back(std::move(sl));
        }
        if (std::fread(&soft_magic, 1, 1, f.get()) != 0) {
            throw error(error_kind::format, "trailing bytes after soft-label block", path);
        }
    }

    ds.validate();
    return ds;
}

}  // namespace gvd
