#include "seqlab/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace seqlab {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'Q', 'L', 'A', 'B', 'V', '1'};
constexpr uint8_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    os.write(b, 4);
}

void put_f64(std::ostream& os, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
    os.write(b, 8);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw CheckpointError("truncated checkpoint");
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw CheckpointError("truncated checkpoint");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(item);
    return out;
}

std::string join_doubles(const Vec& v) {
    std::string s;
    char buf[32];
    for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        s += (i ? "," : "") + std::string(buf);
    }
    return s;
}

Vec split_doubles(const std::string& s) {
    Vec out;
    for (auto& item : split(s)) out.push_back(std::stod(item));
    return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ostringstream header;
    header << "cell=" << to_string(ck.model.kind) << "\n"
           << "mode=" << to_string(ck.model.dir) << "\n"
           << "layers=" << ck.model.layers << "\n"
           << "hidden=" << ck.model.hidden << "\n"
           << "n_x=" << ck.model.n_x << "\n"
           << "n_y=" << ck.model.n_y << "\n"
           << "class_names=" << join(ck.class_names) << "\n"
           << "feature_names=" << join(ck.feature_names) << "\n"
           << "norm_mean=" << join_doubles(ck.norm_mean) << "\n"
           << "norm_std=" << join_doubles(ck.norm_std) << "\n"
           << "decimation=" << ck.decimation << "\n"
           << "seed=" << ck.seed << "\n";

    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw CheckpointError("cannot write " + tmp.string());
        os.write(kMagic, 8);
        os.put(static_cast<char>(kVersion));
        const std::string h = header.str();
        put_u32(os, static_cast<uint32_t>(h.size()));
        os.write(h.data(), static_cast<std::streamsize>(h.size()));

        auto tensors = param_tensors(ck.model);
        put_u32(os, static_cast<uint32_t>(tensors.size()));
        for (auto& t : tensors) {
            put_u32(os, static_cast<uint32_t>(t.name.size()));
            os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
            os.put(t.cols == 0 ? 1 : 2);  // rank
            put_u32(os, static_cast<uint32_t>(t.rows));
            put_u32(os, static_cast<uint32_t>(t.cols));
            for (size_t i = 0; i < t.size; ++i) put_f64(os, t.data[i]);
        }
        if (!os) throw CheckpointError("write failure on " + tmp.string());
    }
    fs::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw CheckpointError("bad magic in " + path + " (not a checkpoint file)");
    const int version = is.get();
    if (version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

    const uint32_t hlen = get_u32(is);
    std::string header(hlen, '\0');
    if (!is.read(header.data(), hlen)) throw CheckpointError("truncated header in " + path);
    std::map<std::string, std::string> kv;
    std::istringstream hs(header);
    std::string line;
    while (std::getline(hs, line)) {
        size_t eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw CheckpointError("checkpoint header missing key: " + k);
        return it->second;
    };

    Checkpoint ck;
    const CellKind kind = cell_kind_from_string(need("cell"));
    const Direction dir = direction_from_string(need("mode"));
    const int layers = std::stoi(need("layers"));
    const int hidden = std::stoi(need("hidden"));
    const int n_x = std::stoi(need("n_x"));
    const int n_y = std::stoi(need("n_y"));
    Rng rng(1);
    ck.model = make_model(kind, dir, n_x, n_y, hidden, layers, rng);
    ck.class_names = split(need("class_names"));
    ck.feature_names = split(need("feature_names"));
    ck.norm_mean = split_doubles(need("norm_mean"));
    ck.norm_std = split_doubles(need("norm_std"));
    ck.decimation = std::stoi(need("decimation"));
    ck.seed = std::stoull(need("seed"));

    const uint32_t ntensors = get_u32(is);
    auto tensors = param_tensors(ck.model);
    if (ntensors != tensors.size())
        throw CheckpointError("checkpoint has " + std::to_string(ntensors) +
                              " tensors, model expects " + std::to_string(tensors.size()));
    for (auto& t : tensors) {
        const uint32_t nlen = get_u32(is);
        std::string name(nlen, '\0');
        if (!is.read(name.data(), nlen)) throw CheckpointError("truncated tensor name in " + path);
        if (name != t.name)
            throw CheckpointError("tensor order mismatch: expected " + t.name + ", got " + name);
        const int rank = is.get();
        const uint32_t rows = get_u32(is);
        const uint32_t cols = get_u32(is);
        if (rank != (t.cols == 0 ? 1 : 2) || rows != static_cast<uint32_t>(t.rows) ||
            cols != static_cast<uint32_t>(t.cols))
            throw CheckpointError("shape mismatch for tensor " + name);
        for (size_t i = 0; i < t.size; ++i) t.data[i] = get_f64(is);
    }
    return ck;
}

}  // namespace seqlab
