#include "sqgforge/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sqgforge/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "SQGF writer assumes a little-endian host");

namespace sqgforge {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

void write_sqgf(const std::string& path, double time,
                const std::vector<const ScalarField*>& components) {
    if (components.empty()) throw ValidationError("sqgf snapshot needs components");
    const int n = components[0]->n();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os.write("SQGF", 4);
    put_u32(os, 1u);
    put_u32(os, static_cast<std::uint32_t>(n));
    put_u32(os, static_cast<std::uint32_t>(components.size()));
    os.write(reinterpret_cast<const char*>(&time), 8);
    for (const ScalarField* f : components) {
        if (f->n() != n) throw ValidationError("sqgf components on different grids");
        const auto& p = f->cphys();
        os.write(reinterpret_cast<const char*>(p.data()),
                 static_cast<std::streamsize>(p.size() * sizeof(double)));
    }
    if (!os) throw IoError("short write to " + path);
}

void write_sqgf(const std::string& path, double time, const VectorField& v) {
    write_sqgf(path, time, {&v.x, &v.y});
}

void write_sqgf(const std::string& path, double time, const SymTensorField& t) {
    write_sqgf(path, time, {&t.xx, &t.xy, &t.yy});
}

SqgfSnapshot read_sqgf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SQGF", 4) != 0)
        throw IoError(path + " is not an SQGF snapshot");
    SqgfSnapshot snap;
    snap.version = get_u32(is);
    snap.n = static_cast<int>(get_u32(is));
    std::uint32_t ncomp = get_u32(is);
    is.read(reinterpret_cast<char*>(&snap.time), 8);
    const std::size_t count = static_cast<std::size_t>(snap.n) * snap.n;
    snap.components.resize(ncomp);
    for (auto& c : snap.components) {
        c.resize(count);
        is.read(reinterpret_cast<char*>(c.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    }
    if (!is) throw IoError("truncated SQGF file " + path);
    return snap;
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

RunManifest RunManifest::parse(const std::string& text) {
    RunManifest m;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("manifest line without '=': " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto kl = key.find_last_not_of(" \t");
        key = key.substr(0, kl + 1);
        auto vf = value.find_first_not_of(" \t");
        value = vf == std::string::npos ? "" : value.substr(vf);
        m.set(key, value);
    }
    return m;
}

bool RunManifest::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

std::string RunManifest::get(const std::string& key, const std::string& fallback) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return fallback;
}

double RunManifest::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
        return std::stod(get(key));
    } catch (...) {
        throw ValidationError("manifest key " + key + " is not a number");
    }
}

long long RunManifest::get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    try {
        return std::stoll(get(key));
    } catch (...) {
        throw ValidationError("manifest key " + key + " is not an integer");
    }
}

void RunManifest::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::string RunManifest::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string RunManifest::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : serialize()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace sqgforge
