#include "core/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace mmd {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'D', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}
void write_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

void write_layout(std::ostream& os, const ParamVector& p) {
    write_u32(os, static_cast<std::uint32_t>(p.layout().size()));
    for (const auto& e : p.layout()) {
        write_u32(os, static_cast<std::uint32_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        write_u32(os, static_cast<std::uint32_t>(e.shape.size()));
        for (auto d : e.shape) write_u32(os, d);
    }
    os.write(reinterpret_cast<const char*>(p.data()),
             static_cast<std::streamsize>(p.size() * sizeof(double)));
}

ParamVector read_layout(std::istream& is) {
    ParamVector p;
    const std::uint32_t n = read_u32(is);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t len = read_u32(is);
        std::string name(len, '\0');
        is.read(name.data(), len);
        const std::uint32_t rank = read_u32(is);
        std::vector<std::uint32_t> shape(rank);
        for (auto& d : shape) d = read_u32(is);
        p.add(name, std::move(shape));
    }
    is.read(reinterpret_cast<char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
    return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw RuntimeError("save_checkpoint: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, static_cast<std::uint32_t>(ckpt.arch.input_dim));
    write_u32(os, static_cast<std::uint32_t>(ckpt.arch.hidden_dims.size()));
    for (int h : ckpt.arch.hidden_dims) write_u32(os, static_cast<std::uint32_t>(h));
    write_u32(os, static_cast<std::uint32_t>(ckpt.arch.time_embed_dim));
    write_u32(os, static_cast<std::uint32_t>(ckpt.arch.num_classes));
    write_u32(os, 0);  // activation: silu
    write_layout(os, ckpt.params);
    const std::uint8_t has_v = ckpt.adam_v ? 1 : 0;
    os.write(reinterpret_cast<const char*>(&has_v), 1);
    if (has_v) {
        write_u32(os, static_cast<std::uint32_t>(ckpt.adam_steps));
        write_f64(os, ckpt.adam_beta2);
        write_f64(os, ckpt.adam_eps);
        write_layout(os, *ckpt.adam_v);
    }
    if (!os) throw RuntimeError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw RuntimeError("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw RuntimeError("load_checkpoint: bad magic in " + path);

    Checkpoint ckpt;
    ckpt.arch.input_dim = static_cast<int>(read_u32(is));
    const std::uint32_t nh = read_u32(is);
    ckpt.arch.hidden_dims.resize(nh);
    for (auto& h : ckpt.arch.hidden_dims) h = static_cast<int>(read_u32(is));
    ckpt.arch.time_embed_dim = static_cast<int>(read_u32(is));
    ckpt.arch.num_classes = static_cast<int>(read_u32(is));
    read_u32(is);  // activation
    ckpt.params = read_layout(is);

    std::uint8_t has_v = 0;
    is.read(reinterpret_cast<char*>(&has_v), 1);
    if (is && has_v) {
        ckpt.adam_steps = static_cast<int>(read_u32(is));
        ckpt.adam_beta2 = read_f64(is);
        ckpt.adam_eps = read_f64(is);
        ckpt.adam_v = read_layout(is);
    }
    if (!is) throw RuntimeError("load_checkpoint: truncated file " + path);
    require(ckpt.params.same_layout(denoiser_param_layout(ckpt.arch)),
            "load_checkpoint: layout does not match arch header");
    return ckpt;
}

}  // namespace mmd
