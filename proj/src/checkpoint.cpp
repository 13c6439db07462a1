#include "mardpg/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mardpg {

namespace {
constexpr const char* kMagic = "mardpg-checkpoint v1";

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void save_checkpoint(const std::string& path, const ParamViews& views,
                     const CheckpointMeta& meta) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_checkpoint: cannot open " + path);
    }
    out << kMagic << "\n";
    out << "seed " << meta.seed << "\n";
    out << "step " << meta.step << "\n";
    out << "arrays " << views.size() << "\n";
    for (const auto& v : views) {
        out << v.name << " " << v.rows << " " << v.cols << "\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << " ";
            out << fmt_double(v.data[i]);
        }
        out << "\n";
    }
    if (!out) {
        throw std::runtime_error("save_checkpoint: write failed for " + path);
    }
}

CheckpointMeta load_checkpoint(const std::string& path, const ParamViews& views) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_checkpoint: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    }
    CheckpointMeta meta;
    std::string key;
    in >> key >> meta.seed;
    if (key != "seed") throw std::runtime_error("load_checkpoint: expected seed header");
    in >> key >> meta.step;
    if (key != "step") throw std::runtime_error("load_checkpoint: expected step header");
    std::size_t count = 0;
    in >> key >> count;
    if (key != "arrays") throw std::runtime_error("load_checkpoint: expected arrays header");

    std::map<std::string, const ParamView*> by_name;
    for (const auto& v : views) by_name[v.name] = &v;
    std::map<std::string, bool> filled;

    for (std::size_t a = 0; a < count; ++a) {
        std::string name;
        int rows = 0, cols = 0;
        if (!(in >> name >> rows >> cols)) {
            throw std::runtime_error("load_checkpoint: truncated array header");
        }
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw std::runtime_error("load_checkpoint: unknown array " + name);
        }
        const ParamView* v = it->second;
        if (v->rows != rows || v->cols != cols) {
            throw std::runtime_error("load_checkpoint: shape mismatch for " + name + ": file " +
                                     std::to_string(rows) + "x" + std::to_string(cols) +
                                     ", model " + std::to_string(v->rows) + "x" +
                                     std::to_string(v->cols));
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(in >> v->data[i])) {
                throw std::runtime_error("load_checkpoint: truncated values for " + name);
            }
        }
        filled[name] = true;
    }
    for (const auto& v : views) {
        if (!filled.count(v.name)) {
            throw std::runtime_error("load_checkpoint: array " + v.name + " missing from " + path);
        }
    }
    return meta;
}

}  // namespace mardpg
