#include "georank/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace georank {

namespace {
constexpr char kMagic[4] = {'G', 'R', 'N', 'K'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void write_embeddings(const std::string& path, const EmbeddingMatrix& m) {
    if (m.data.size() != static_cast<size_t>(m.count) * m.dim)
        throw std::invalid_argument("write_embeddings: data size does not match count*dim");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_embeddings: cannot open " + path);
    os.write(kMagic, 4);
    put_u32(os, m.count);
    put_u32(os, m.dim);
    // assumes little-endian IEEE-754 host, which is all targets we build for
    os.write(reinterpret_cast<const char*>(m.data.data()),
             static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!os) throw std::runtime_error("write_embeddings: write failed for " + path);
}

EmbeddingMatrix read_embeddings(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_embeddings: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_embeddings: bad magic in " + path);
    EmbeddingMatrix m;
    m.count = get_u32(is);
    m.dim = get_u32(is);
    if (!is) throw std::runtime_error("read_embeddings: truncated header in " + path);
    m.data.resize(static_cast<size_t>(m.count) * m.dim);
    is.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!is) throw std::runtime_error("read_embeddings: truncated payload in " + path);
    return m;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_jsonl: cannot open " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ": malformed JSON at line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& lines) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_jsonl: cannot open " + path);
    for (const auto& j : lines) os << j.dump() << '\n';
    if (!os) throw std::runtime_error("write_jsonl: write failed for " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_text_file: cannot open " + path);
    os << content;
    if (!os) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace georank
