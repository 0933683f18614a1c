// In-memory video dataset and its binary file format.
//
// Layout (little-endian):
//   magic "GVDS" | u32 version=1 | u32 frames | u32 dim | u32 class_count
//   | u64 record_count
//   then per record: u32 class_id | frames*dim float32, frame-major
//   then optionally: magic "SLBL" | u32 class_count
//   | record_count * class_count float32 soft-label rows
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvd/latent.hpp"

namespace gvd {

struct VideoRecord {
    uint32_t class_id = 0;
    Mat latent;  // frames x dim
};

struct VideoDataset {
    int frames = 0;
    int dim = 0;
    int class_count = 0;
    std::vector<VideoRecord> records;
    std::vector<Vec> soft_labels;  // empty, or one row of class_count probs per record

    bool has_soft_labels() const { return !soft_labels.empty(); }
    int flat_dim() const { return frames * dim; }

    // Validates shape and finiteness, snaps the latent to float32 storage
    // precision, and appends.
    void append(uint32_t class_id, Mat latent);

    std::vector<size_t> indices_of_class(uint32_t class_id) const;
    size_t count_of_class(uint32_t class_id) const;

    void validate() const;
};

void save_dataset(const VideoDataset & ds, const std::string & path);
VideoDataset load_dataset(const std::string & path);

}  // namespace gvd
