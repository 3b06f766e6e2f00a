#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace georank {

// Dense row-major float32 matrix, the on-disk embedding format.
struct EmbeddingMatrix {
    uint32_t count = 0;
    uint32_t dim = 0;
    std::vector<float> data;  // count * dim

    const float* row(uint32_t i) const { return data.data() + static_cast<size_t>(i) * dim; }
    std::vector<float> row_vec(uint32_t i) const {
        return {row(i), row(i) + dim};
    }
};

// Binary sidecar: magic "GRNK", u32 count, u32 dim (little-endian),
// then count*dim little-endian float32.
void write_embeddings(const std::string& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embeddings(const std::string& path);

// JSON-lines: one object per non-empty line. Errors carry the 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& lines);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace georank
