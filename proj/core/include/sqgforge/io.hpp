#pragma once

#include <map>
#include <string>
#include <vector>

#include "sqgforge/field.hpp"

namespace sqgforge {

// ---- SQGF field snapshots -------------------------------------------------
// Layout: magic "SQGF", version u32, grid n u32, component count u32,
// time f64, then row-major little-endian f64 physical samples per component.

void write_sqgf(const std::string& path, double time,
                const std::vector<const ScalarField*>& components);
void write_sqgf(const std::string& path, double time, const VectorField& v);
void write_sqgf(const std::string& path, double time, const SymTensorField& t);

struct SqgfSnapshot {
    std::uint32_t version = 0;
    int n = 0;
    double time = 0.0;
    std::vector<std::vector<double>> components;
};

SqgfSnapshot read_sqgf(const std::string& path);

// ---- Run manifest -----------------------------------------------------------
// Plain key=value lines; '#' starts a comment. Parsed manifests serialize
// back bit-exactly (insertion order, raw values).

class RunManifest {
  public:
    static RunManifest load(const std::string& path);
    static RunManifest parse(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    void set(const std::string& key, const std::string& value);

    std::string serialize() const;
    /// FNV-1a hash of the serialized form, for provenance records.
    std::string hash() const;

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace sqgforge
