#include "cfn/rl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cfn::rl {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'N', 'P', 'P', 'O', '0', '1'};

void put_u32_le(std::ofstream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b{};
    for (int i = 0; i < 4; ++i)
        b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

void put_u64_le(std::ofstream& out, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i)
        b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint32_t get_u32_le(std::ifstream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

std::uint64_t get_u64_le(std::ifstream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

} // namespace

void save_checkpoint(const ActorCritic& net, std::uint64_t config_hash,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    const NetShape& s = net.shape();
    put_u32_le(out, static_cast<std::uint32_t>(s.obs_dim));
    put_u32_le(out, static_cast<std::uint32_t>(s.hidden1));
    put_u32_le(out, static_cast<std::uint32_t>(s.hidden2));
    put_u32_le(out, static_cast<std::uint32_t>(s.act_dim));
    put_u64_le(out, config_hash);
    put_u64_le(out, static_cast<std::uint64_t>(net.params().size()));
    for (double w : net.params())
        put_u64_le(out, std::bit_cast<std::uint64_t>(w));
    if (!out)
        throw std::runtime_error("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);

    NetShape shape;
    shape.obs_dim = static_cast<int>(get_u32_le(in));
    shape.hidden1 = static_cast<int>(get_u32_le(in));
    shape.hidden2 = static_cast<int>(get_u32_le(in));
    shape.act_dim = static_cast<int>(get_u32_le(in));
    if (!in || shape.obs_dim < 1 || shape.hidden1 < 1 || shape.hidden2 < 1 || shape.act_dim < 1)
        throw std::runtime_error("checkpoint shape header invalid: " + path);

    LoadedCheckpoint loaded{ActorCritic(shape), get_u64_le(in)};
    const auto count = get_u64_le(in);
    if (!in || count != static_cast<std::uint64_t>(shape.param_count()))
        throw std::runtime_error("checkpoint parameter count does not match its shape: " + path);
    for (double& w : loaded.net.params()) {
        w = std::bit_cast<double>(get_u64_le(in));
        if (!in)
            throw std::runtime_error("checkpoint truncated: " + path);
    }
    char extra;
    if (in.read(&extra, 1))
        throw std::runtime_error("trailing bytes after checkpoint payload: " + path);
    return loaded;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace cfn::rl
