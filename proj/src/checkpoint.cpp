#include "semsteg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace semsteg {

namespace {

constexpr char kMagic[] = "SSCKPT1\n";

static_assert(sizeof(double) == 8);

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw MagicMismatchError("'" + path + "' is not an SSCKPT1 checkpoint");
    std::string line;
    if (!std::getline(in, line) || line.rfind("header ", 0) != 0)
        throw FormatError("missing header length line in '" + path + "'");
    std::size_t header_len = std::stoull(line.substr(7));
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (static_cast<std::size_t>(in.gcount()) != header_len)
        throw TruncatedCheckpointError("header cut short in '" + path + "'");
    try {
        return nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad checkpoint header in '" + path + "': " + e.what());
    }
}

}  // namespace

void save_checkpoint(const std::vector<Parameter*>& params, const nlohmann::json& config_echo,
                     const std::string& path) {
    nlohmann::json tensors = nlohmann::json::array();
    std::int64_t offset = 0;
    for (const auto* p : params) {
        tensors.push_back({{"name", p->name}, {"shape", p->value.shape}, {"offset", offset}});
        offset += p->value.size();
    }
    nlohmann::json header = {{"config", config_echo}, {"tensors", tensors}, {"total", offset}};
    std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out.write(kMagic, 8);
    out << "header " << htext.size() << "\n";
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto* p : params)
        out.write(reinterpret_cast<const char*>(p->value.data.data()),
                  static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
    if (!out) throw FormatError("short write to '" + path + "'");
}

nlohmann::json load_checkpoint(const std::vector<Parameter*>& params, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    nlohmann::json header = read_header(in, path);

    std::int64_t total = header.at("total").get<std::int64_t>();
    std::vector<double> payload(static_cast<std::size_t>(total));
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != payload.size() * sizeof(double))
        throw TruncatedCheckpointError("payload cut short in '" + path + "'");

    struct Entry {
        std::vector<int> shape;
        std::int64_t offset;
    };
    std::map<std::string, Entry> index;
    for (const auto& t : header.at("tensors"))
        index[t.at("name").get<std::string>()] = {t.at("shape").get<std::vector<int>>(),
                                                  t.at("offset").get<std::int64_t>()};

    for (auto* p : params) {
        auto it = index.find(p->name);
        if (it == index.end())
            throw FormatError("checkpoint '" + path + "' has no tensor '" + p->name + "'");
        if (it->second.shape != p->value.shape)
            throw ShapeConflictError("tensor '" + p->name + "': file " +
                                     shape_str(it->second.shape) + " vs model " +
                                     shape_str(p->value.shape));
        std::int64_t off = it->second.offset;
        if (off < 0 || off + p->value.size() > total)
            throw FormatError("tensor '" + p->name + "' offset out of range in '" + path + "'");
        std::copy(payload.begin() + off, payload.begin() + off + p->value.size(),
                  p->value.data.begin());
    }
    return header.at("config");
}

nlohmann::json peek_checkpoint_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return read_header(in, path).at("config");
}

}  // namespace semsteg
