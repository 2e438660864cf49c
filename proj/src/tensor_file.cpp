#include "densitrace/tensor_file.hpp"

#include "densitrace/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace densitrace {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

std::int64_t NamedTensor::numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

TensorFile TensorFile::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingFile, path.string());

    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);
    if (file_size < 8) fail(ErrorKind::MalformedContainer, path.string() + ": shorter than the header length field");

    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), 8);
    if (header_len > file_size - 8) fail(ErrorKind::MalformedContainer, path.string() + ": header length exceeds file size");

    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::MalformedContainer, path.string() + ": header is not valid JSON (" + e.what() + ")");
    }
    if (!meta.is_object()) fail(ErrorKind::MalformedContainer, path.string() + ": header is not a JSON object");

    const std::uint64_t data_start = 8 + header_len;
    const std::uint64_t data_len = file_size - data_start;

    TensorFile out;
    for (auto it = meta.begin(); it != meta.end(); ++it) {
        if (it.key() == "__metadata__") {
            if (it->is_object())
                for (auto m = it->begin(); m != it->end(); ++m)
                    if (m->is_string()) out.metadata_[m.key()] = m->get<std::string>();
            continue;
        }
        const auto& entry = it.value();
        const std::string& name = it.key();
        try {
            const auto dtype = entry.at("dtype").get<std::string>();
            if (dtype != "F32") fail(ErrorKind::MalformedContainer, name + ": unsupported dtype " + dtype);
            NamedTensor t;
            t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
            const auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
            if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > data_len)
                fail(ErrorKind::MalformedContainer, name + ": data offsets out of range");
            for (auto d : t.shape)
                if (d < 0) fail(ErrorKind::MalformedContainer, name + ": negative dimension");
            const auto bytes = offsets[1] - offsets[0];
            if (bytes != static_cast<std::uint64_t>(t.numel()) * sizeof(float))
                fail(ErrorKind::MalformedContainer, name + ": byte span does not match shape");
            t.data.resize(static_cast<std::size_t>(t.numel()));
            in.seekg(static_cast<std::streamoff>(data_start + offsets[0]));
            in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(bytes));
            if (!in) fail(ErrorKind::MalformedContainer, name + ": truncated data");
            out.tensors_.emplace(name, std::move(t));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::MalformedContainer, name + ": bad header entry (" + e.what() + ")");
        }
    }
    return out;
}

void TensorFile::write(const std::filesystem::path& path) const {
    nlohmann::json meta = nlohmann::json::object();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors_) {
        const std::uint64_t bytes = t.data.size() * sizeof(float);
        meta[name] = {{"dtype", "F32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + bytes}}};
        offset += bytes;
    }
    if (!metadata_.empty()) meta["__metadata__"] = metadata_;

    std::string header = meta.dump();
    // Pad with spaces so the data section starts 8-byte aligned.
    while ((8 + header.size()) % 8 != 0) header.push_back(' ');
    const std::uint64_t header_len = header.size();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::MissingFile, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(&header_len), 8);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& [name, t] : tensors_)
        out.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

void TensorFile::add(const std::string& name, std::vector<std::int64_t> shape, std::vector<float> data) {
    NamedTensor t{std::move(shape), std::move(data)};
    if (static_cast<std::int64_t>(t.data.size()) != t.numel())
        fail(ErrorKind::ShapeMismatch, name + ": data length does not match shape");
    tensors_.insert_or_assign(name, std::move(t));
}

const NamedTensor* TensorFile::find(const std::string& name) const {
    auto it = tensors_.find(name);
    return it == tensors_.end() ? nullptr : &it->second;
}

}  // namespace densitrace
