#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "drive/models.hpp"

namespace drive {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'I', 'V', 'E', 'C', 'K', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

const NamedTensor& find_tensor(const std::vector<NamedTensor>& ts, const std::string& name) {
    for (const NamedTensor& t : ts) {
        if (t.name == name) return t;
    }
    throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
}

}  // namespace

void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const NamedTensor& t : tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        out.put(t.frozen ? '\1' : '\0');
        put_u32(out, static_cast<std::uint32_t>(t.value.shape.size()));
        for (std::size_t d : t.value.shape) put_u64(out, static_cast<std::uint64_t>(d));
        for (double v : t.value.data) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::vector<NamedTensor> load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: " + path + " is not a checkpoint file");
    }
    const std::uint32_t count = get_u32(in);
    std::vector<NamedTensor> tensors;
    tensors.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        NamedTensor nt;
        const std::uint32_t name_len = get_u32(in);
        nt.name.resize(name_len);
        in.read(nt.name.data(), name_len);
        if (!in) throw std::runtime_error("checkpoint: truncated file");
        const int fz = in.get();
        if (fz == EOF) throw std::runtime_error("checkpoint: truncated file");
        nt.frozen = fz != 0;
        const std::uint32_t ndim = get_u32(in);
        std::vector<std::size_t> shape;
        std::size_t total = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            shape.push_back(static_cast<std::size_t>(get_u64(in)));
            total *= shape.back();
        }
        nt.value.shape = std::move(shape);
        nt.value.data.resize(ndim == 0 ? 0 : total);
        for (double& v : nt.value.data) v = get_f64(in);
        tensors.push_back(std::move(nt));
    }
    return tensors;
}

void save_dense_net(const std::string& path, const DenseNet& net) {
    std::vector<NamedTensor> ts;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        ts.push_back({"layer" + std::to_string(l) + ".weight", net.weights[l], net.frozen});
        ts.push_back({"layer" + std::to_string(l) + ".bias", net.biases[l], net.frozen});
    }
    save_tensors(path, ts);
}

DenseNet load_dense_net(const std::string& path) {
    std::vector<NamedTensor> ts = load_tensors(path);
    DenseNet net;
    for (std::size_t l = 0;; ++l) {
        const std::string wname = "layer" + std::to_string(l) + ".weight";
        bool found = false;
        for (const NamedTensor& t : ts) {
            if (t.name == wname) {
                found = true;
                break;
            }
        }
        if (!found) break;
        const NamedTensor& w = find_tensor(ts, wname);
        const NamedTensor& b = find_tensor(ts, "layer" + std::to_string(l) + ".bias");
        net.weights.push_back(w.value);
        net.biases.push_back(b.value);
        net.frozen = w.frozen;
        if (l == 0) net.widths.push_back(w.value.shape[0]);
        net.widths.push_back(w.value.shape[1]);
    }
    if (net.weights.empty()) throw std::runtime_error("checkpoint: " + path + " holds no layers");
    return net;
}

void save_prior(const std::string& path, const PriorModel& prior) {
    std::vector<NamedTensor> ts;
    for (std::size_t l = 0; l < prior.encoder.layer_count(); ++l) {
        ts.push_back({"encoder.layer" + std::to_string(l) + ".weight", prior.encoder.weights[l],
                      prior.backbone_frozen});
        ts.push_back({"encoder.layer" + std::to_string(l) + ".bias", prior.encoder.biases[l],
                      prior.backbone_frozen});
    }
    ts.push_back({"class_embeddings", prior.class_embeddings, prior.backbone_frozen});
    ts.push_back({"prompt_context", prior.prompt_context, false});
    ts.push_back({"temperature", DenseArray::scalar(prior.temperature), true});
    save_tensors(path, ts);
}

PriorModel load_prior(const std::string& path) {
    std::vector<NamedTensor> ts = load_tensors(path);
    PriorModel prior;
    for (std::size_t l = 0;; ++l) {
        const std::string wname = "encoder.layer" + std::to_string(l) + ".weight";
        bool found = false;
        for (const NamedTensor& t : ts) {
            if (t.name == wname) {
                found = true;
                break;
            }
        }
        if (!found) break;
        const NamedTensor& w = find_tensor(ts, wname);
        const NamedTensor& b = find_tensor(ts, "encoder.layer" + std::to_string(l) + ".bias");
        prior.encoder.weights.push_back(w.value);
        prior.encoder.biases.push_back(b.value);
        prior.backbone_frozen = w.frozen;
        prior.encoder.frozen = w.frozen;
        if (l == 0) prior.encoder.widths.push_back(w.value.shape[0]);
        prior.encoder.widths.push_back(w.value.shape[1]);
    }
    if (prior.encoder.weights.empty()) throw std::runtime_error("checkpoint: " + path + " holds no encoder");
    prior.class_embeddings = find_tensor(ts, "class_embeddings").value;
    prior.prompt_context = find_tensor(ts, "prompt_context").value;
    prior.temperature = find_tensor(ts, "temperature").value[0];
    return prior;
}

}  // namespace drive
