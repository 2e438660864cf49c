#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace densitrace {

struct NamedTensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;  // row-major

    std::int64_t numel() const;
};

/// Named-tensor container in the safetensors layout: an 8-byte little-endian
/// header length, a JSON header mapping name -> {dtype, shape, data_offsets},
/// then raw little-endian data. Only F32 tensors are read or written.
class TensorFile {
public:
    static TensorFile read(const std::filesystem::path& path);
    void write(const std::filesystem::path& path) const;

    void add(const std::string& name, std::vector<std::int64_t> shape, std::vector<float> data);
    const NamedTensor* find(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }
    void erase(const std::string& name) { tensors_.erase(name); }

    const std::map<std::string, NamedTensor>& tensors() const { return tensors_; }
    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

private:
    std::map<std::string, NamedTensor> tensors_;
    std::map<std::string, std::string> metadata_;
};

}  // namespace densitrace
